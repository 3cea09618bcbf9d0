//! Flat `key = value` experiment configuration.
//!
//! Blank lines and text after `#` are ignored. Every key is optional;
//! unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::distributions::{ErrorKind, ErrorLaw, MixtureScale};
use crate::error::{Error, Result};
use crate::model::{Hyper, Method, SamplerSpec};
use crate::simulate::{CoeffScheme, Correlation, Placement, SimDesign};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub data: Option<PathBuf>,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub level: f64,
    pub replicates: usize,
    pub chains: usize,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub hyper: Hyper,
    pub design: SimDesign,
    pub replicate_index: u64,
    pub train: Option<usize>,
    pub splits: usize,
    pub write_draws: bool,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let spec = SamplerSpec::new(Method::Rbhs);
        ExperimentConfig {
            method: Method::Rbhs,
            data: None,
            n_iter: spec.n_iter,
            burn_in: spec.burn_in,
            thin: spec.thin,
            seed: spec.seed,
            level: 0.95,
            replicates: 100,
            chains: 1,
            out: PathBuf::from("out"),
            threads: None,
            hyper: Hyper::default(),
            design: SimDesign::new(100, 200, ErrorLaw::new(ErrorKind::Normal), CoeffScheme::selection15()),
            replicate_index: 0,
            train: None,
            splits: 50,
            write_draws: false,
            timing: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl ExperimentConfig {
    pub fn sampler_spec(&self) -> SamplerSpec {
        let mut spec = SamplerSpec::new(self.method).with_iterations(self.n_iter, self.burn_in).with_seed(self.seed);
        spec.thin = self.thin;
        spec.hyper = self.hyper;
        spec
    }

    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let d = &mut self.design;
        match key {
            "method" => self.method = value.parse()?,
            "data" => self.data = Some(PathBuf::from(value)),
            "iters" | "n_iter" => self.n_iter = parse(key, value)?,
            "burnin" | "burn_in" => self.burn_in = parse(key, value)?,
            "thin" => self.thin = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "level" => self.level = parse(key, value)?,
            "replicates" => self.replicates = parse(key, value)?,
            "chains" => self.chains = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = Some(parse(key, value)?),
            "sigma2_beta0" => self.hyper.sigma2_beta0 = parse(key, value)?,
            "e" => self.hyper.e = parse(key, value)?,
            "f" => self.hyper.f = parse(key, value)?,
            "c" => self.hyper.c = parse(key, value)?,
            "d" => self.hyper.d = parse(key, value)?,
            "n" => d.n = parse(key, value)?,
            "p" => d.p = parse(key, value)?,
            "corr" => {
                d.corr = match value.to_ascii_lowercase().as_str() {
                    "ar1" => Correlation::Ar1,
                    "banded" => Correlation::Banded,
                    _ => return Err(Error::Config(format!("unknown correlation `{value}`"))),
                }
            }
            "rho" => d.rho = parse(key, value)?,
            "error" => {
                d.error.kind = ErrorKind::from_index(parse(key, value)?).map_err(|e| Error::Config(e.to_string()))?
            }
            "mixture_scale" => {
                d.error.mixture_scale = match value.to_ascii_lowercase().as_str() {
                    "variance" => MixtureScale::Variance,
                    "sd" | "stddev" => MixtureScale::StdDev,
                    _ => return Err(Error::Config(format!("unknown mixture scale `{value}`"))),
                }
            }
            "heteroscedastic" => d.heteroscedastic = parse_bool(key, value)?,
            "scheme" => {
                d.scheme = match value.to_ascii_lowercase().as_str() {
                    "selection" => match d.scheme {
                        CoeffScheme::Selection { .. } => d.scheme,
                        CoeffScheme::Inference3 => CoeffScheme::selection15(),
                    },
                    "inference3" => CoeffScheme::Inference3,
                    _ => return Err(Error::Config(format!("unknown coefficient scheme `{value}`"))),
                }
            }
            "nonzero" => match &mut d.scheme {
                CoeffScheme::Selection { count, .. } => *count = parse(key, value)?,
                CoeffScheme::Inference3 => return Err(Error::Config("`nonzero` requires scheme = selection".into())),
            },
            "placement" => {
                let p = match value.to_ascii_lowercase().as_str() {
                    "even" => Placement::Even,
                    "random" => Placement::Random,
                    _ => return Err(Error::Config(format!("unknown placement `{value}`"))),
                };
                match &mut d.scheme {
                    CoeffScheme::Selection { placement, .. } => *placement = p,
                    CoeffScheme::Inference3 => {
                        return Err(Error::Config("`placement` requires scheme = selection".into()))
                    }
                }
            }
            "intercept" => d.intercept = Some(parse(key, value)?),
            "replicate" => self.replicate_index = parse(key, value)?,
            "train" => self.train = Some(parse(key, value)?),
            "splits" => self.splits = parse(key, value)?,
            "draws" => self.write_draws = parse_bool(key, value)?,
            "timing" => self.timing = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every setting in a `key = value` text, in order.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler_spec().validate()?;
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        Ok(())
    }

    /// Every setting as sorted `key = value` lines, for the run manifest.
    pub fn describe(&self) -> Vec<(String, String)> {
        let d = &self.design;
        let mut m = BTreeMap::new();
        m.insert("method", self.method.to_string());
        m.insert("data", self.data.as_ref().map_or("-".into(), |p| p.display().to_string()));
        m.insert("iters", self.n_iter.to_string());
        m.insert("burnin", self.burn_in.to_string());
        m.insert("thin", self.thin.to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("level", self.level.to_string());
        m.insert("replicates", self.replicates.to_string());
        m.insert("chains", self.chains.to_string());
        m.insert("sigma2_beta0", self.hyper.sigma2_beta0.to_string());
        m.insert("e", self.hyper.e.to_string());
        m.insert("f", self.hyper.f.to_string());
        m.insert("c", self.hyper.c.to_string());
        m.insert("d", self.hyper.d.to_string());
        m.insert("n", d.n.to_string());
        m.insert("p", d.p.to_string());
        m.insert("corr", format!("{:?}", d.corr).to_lowercase());
        m.insert("rho", d.rho.to_string());
        m.insert("error", d.error.kind.index().to_string());
        m.insert("mixture_scale", format!("{:?}", d.error.mixture_scale).to_lowercase());
        m.insert("heteroscedastic", d.heteroscedastic.to_string());
        match d.scheme {
            CoeffScheme::Selection { count, placement } => {
                m.insert("scheme", "selection".into());
                m.insert("nonzero", count.to_string());
                m.insert("placement", format!("{placement:?}").to_lowercase());
            }
            CoeffScheme::Inference3 => {
                m.insert("scheme", "inference3".into());
            }
        }
        m.insert("intercept", d.intercept().to_string());
        m.insert("replicate", self.replicate_index.to_string());
        m.insert("train", self.train.map_or("-".into(), |t| t.to_string()));
        m.insert("splits", self.splits.to_string());
        m.insert("threads", self.threads.map_or("-".into(), |t| t.to_string()));
        m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}
