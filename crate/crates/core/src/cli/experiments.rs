//! Experiment orchestration behind the subcommands. Each function returns
//! plain records; writing them out is left to the command layer.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::io::ExpressionMatrix;
use crate::distributions::RngStream;
use crate::error::{Error, Result};
use crate::gibbs::run_chain_on_stream;
use crate::inference::{
    coverage, credible_interval, evaluate, median, posterior_median, psrf, select_by_interval, CredibleInterval,
};
use crate::model::{Dataset, PosteriorDraws, SamplerSpec};
use crate::simulate::{chain_role, gen_dataset, stream_id, CoeffScheme, ROLE_SPLIT};

/// Runs `chains` chains on the streams reserved for `replicate`.
pub fn fit_chains(spec: &SamplerSpec, data: &Dataset, replicate: u64, chains: usize) -> Result<Vec<PosteriorDraws>> {
    (0..chains)
        .into_par_iter()
        .map(|c| run_chain_on_stream(spec, data, RngStream::new(spec.seed, stream_id(replicate, chain_role(c)))))
        .collect()
}

pub fn pool_draws(chains: &[PosteriorDraws]) -> Result<PosteriorDraws> {
    let mut pooled = chains.first().cloned().ok_or_else(|| Error::State("no chains".into()))?;
    for c in &chains[1..] {
        pooled.extend(c)?;
    }
    Ok(pooled)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSummary {
    pub term: String,
    pub median: f64,
    pub interval: CredibleInterval,
    pub selected: bool,
    pub psrf: Option<f64>,
}

/// Intercept row followed by one row per predictor, over the pooled draws.
pub fn summarize_fit(chains: &[PosteriorDraws], names: &[String], level: f64) -> Result<Vec<CoefficientSummary>> {
    let pooled = pool_draws(chains)?;
    let multi = chains.len() > 1;
    let mut rows = Vec::with_capacity(pooled.p() + 1);
    let b0_ci = credible_interval(&pooled.beta0, level)?;
    rows.push(CoefficientSummary {
        term: "intercept".into(),
        median: median(&pooled.beta0)?,
        interval: b0_ci,
        selected: b0_ci.excludes_zero(),
        psrf: if multi { Some(psrf(&chains.iter().map(|c| c.beta0.clone()).collect::<Vec<_>>())?) } else { None },
    });
    let medians = posterior_median(&pooled)?;
    for (j, name) in names.iter().enumerate() {
        let ci = credible_interval(&pooled.column(j), level)?;
        rows.push(CoefficientSummary {
            term: name.clone(),
            median: medians[j],
            interval: ci,
            selected: ci.excludes_zero(),
            psrf: if multi { Some(psrf(&chains.iter().map(|c| c.column(j)).collect::<Vec<_>>())?) } else { None },
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateMetrics {
    pub replicate: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub f1: f64,
    pub mcc: f64,
    pub l1: f64,
}

/// Simulates and fits every replicate of the configured design.
pub fn run_replicates(cfg: &ExperimentConfig) -> Result<Vec<ReplicateMetrics>> {
    cfg.validate()?;
    let spec = cfg.sampler_spec();
    (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let (data, truth) = gen_dataset(&cfg.design, cfg.seed, r as u64)?;
            let draws = fit_chains(&spec, &data, r as u64, 1)?.remove(0);
            let report = evaluate(&draws, &truth.beta, cfg.level)?;
            let c = report.confusion;
            Ok(ReplicateMetrics {
                replicate: r,
                tp: c.tp,
                fp: c.fp,
                fn_: c.fn_,
                tn: c.tn,
                f1: c.f1,
                mcc: c.mcc,
                l1: report.l1_error,
            })
        })
        .collect()
}

/// Intervals from every replicate of a fixed-coefficient design, plus the
/// true coefficients.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<(Vec<Vec<CredibleInterval>>, Vec<f64>)> {
    cfg.validate()?;
    if cfg.design.scheme != CoeffScheme::Inference3 {
        return Err(Error::Config("coverage studies require scheme = inference3".into()));
    }
    let spec = cfg.sampler_spec();
    let runs: Vec<(Vec<CredibleInterval>, Vec<f64>)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let (data, truth) = gen_dataset(&cfg.design, cfg.seed, r as u64)?;
            let draws = fit_chains(&spec, &data, r as u64, 1)?.remove(0);
            let intervals =
                (0..draws.p()).map(|j| credible_interval(&draws.column(j), cfg.level)).collect::<Result<Vec<_>>>()?;
            Ok((intervals, truth.beta))
        })
        .collect::<Result<_>>()?;
    let truth = runs[0].1.clone();
    Ok((runs.into_iter().map(|(i, _)| i).collect(), truth))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub term: String,
    pub coverage: f64,
    pub avg_length: f64,
}

/// Coverage and mean interval length per nonzero coefficient and for the
/// pooled zero block (first), and per coefficient over replicates only
/// (second).
pub fn coverage_tables(
    per_rep: &[Vec<CredibleInterval>],
    truth: &[f64],
) -> Result<(Vec<CoverageRow>, Vec<CoverageRow>)> {
    let reps = per_rep.len() as f64;
    let mut covered = vec![0usize; truth.len()];
    let mut length = vec![0.0; truth.len()];
    for intervals in per_rep {
        for (j, c) in coverage(intervals, truth)?.into_iter().enumerate() {
            covered[j] += usize::from(c);
            length[j] += intervals[j].length();
        }
    }
    let by_coef: Vec<CoverageRow> = (0..truth.len())
        .map(|j| CoverageRow {
            term: format!("x{}", j + 1),
            coverage: covered[j] as f64 / reps,
            avg_length: length[j] / reps,
        })
        .collect();
    let mut pooled: Vec<CoverageRow> =
        by_coef.iter().zip(truth).filter(|(_, &t)| t != 0.0).map(|(r, _)| r.clone()).collect();
    let zeros: Vec<usize> = (0..truth.len()).filter(|&j| truth[j] == 0.0).collect();
    if !zeros.is_empty() {
        let cells = reps * zeros.len() as f64;
        pooled.push(CoverageRow {
            term: "zero_block".into(),
            coverage: zeros.iter().map(|&j| covered[j]).sum::<usize>() as f64 / cells,
            avg_length: zeros.iter().map(|&j| length[j]).sum::<f64>() / cells,
        });
    }
    Ok((pooled, by_coef))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOutcome {
    pub split: usize,
    pub model_size: usize,
    pub mad: f64,
}

/// Repeated random train/test splits: fit on the training rows, count
/// interval-selected predictors, and score posterior-median predictions on
/// the held-out rows.
pub fn run_multisplit(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<SplitOutcome>> {
    cfg.validate()?;
    let n = data.n();
    let train = cfg.train.unwrap_or((2 * n).div_ceil(3));
    if train < 2 || train >= n {
        return Err(Error::Config(format!("training size {train} must lie in [2, {}] for n = {n}", n - 1)));
    }
    if cfg.splits == 0 {
        return Err(Error::Config("splits must be at least 1".into()));
    }
    let spec = cfg.sampler_spec();
    (0..cfg.splits)
        .into_par_iter()
        .map(|s| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut RngStream::new(cfg.seed, stream_id(s as u64, ROLE_SPLIT)));
            let (tr, te) = idx.split_at(train);
            let train_data = data.select_rows(tr)?;
            let draws = fit_chains(&spec, &train_data, s as u64, 1)?.remove(0);
            let intervals =
                (0..draws.p()).map(|j| credible_interval(&draws.column(j), cfg.level)).collect::<Result<Vec<_>>>()?;
            let model_size = select_by_interval(&intervals).into_iter().filter(|&b| b).count();
            let beta = posterior_median(&draws)?;
            let beta0 = median(&draws.beta0)?;
            let test_rows: Vec<Vec<f64>> = te.iter().map(|&i| data.row(i)).collect();
            let pred: Vec<f64> =
                test_rows.iter().map(|x| beta0 + x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).collect();
            let actual: Vec<f64> = te.iter().map(|&i| data.y()[i]).collect();
            Ok(SplitOutcome { split: s, model_size, mad: crate::inference::mad(&pred, &actual)? })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessOptions {
    /// Features whose maximum falls strictly below this percentile of all
    /// matrix values are dropped.
    pub percentile: f64,
    /// Features whose range is strictly below this are dropped.
    pub min_range: f64,
    /// Number of highest-CV features kept.
    pub top_k: usize,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions { percentile: 25.0, min_range: 2.0, top_k: 300 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessLog {
    pub threshold: f64,
    pub input: usize,
    pub after_max_filter: usize,
    pub after_range_filter: usize,
    pub after_top_k: usize,
}

/// Max-below-percentile filter, range filter, then top-k by coefficient of
/// variation (`sd / mean`, ties kept in input order). Survivors keep their
/// input order.
pub fn preprocess(m: &ExpressionMatrix, opts: &PreprocessOptions) -> Result<(ExpressionMatrix, PreprocessLog)> {
    if !(0.0..=100.0).contains(&opts.percentile) {
        return Err(Error::Config(format!("percentile must lie in [0, 100], got {}", opts.percentile)));
    }
    let mut all: Vec<f64> = m.values.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let threshold = crate::inference::quantile_sorted(&all, opts.percentile / 100.0);
    preprocess_with_threshold(m, opts, threshold)
}

/// As [`preprocess`], with the max filter's threshold given directly.
pub fn preprocess_with_threshold(
    m: &ExpressionMatrix,
    opts: &PreprocessOptions,
    threshold: f64,
) -> Result<(ExpressionMatrix, PreprocessLog)> {
    let max = |r: &[f64]| r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = |r: &[f64]| r.iter().copied().fold(f64::INFINITY, f64::min);
    let stage1: Vec<usize> = (0..m.ids.len()).filter(|&i| !(max(&m.values[i]) < threshold)).collect();
    let stage2: Vec<usize> =
        stage1.iter().copied().filter(|&i| !(max(&m.values[i]) - min(&m.values[i]) < opts.min_range)).collect();

    let cv = |i: usize| {
        let (mean, sd) = crate::inference::mean_sd(&m.values[i]);
        sd / mean
    };
    let mut ranked = stage2.clone();
    ranked.sort_by(|&a, &b| cv(b).total_cmp(&cv(a)));
    ranked.truncate(opts.top_k);
    ranked.sort_unstable();

    let out = ExpressionMatrix {
        samples: m.samples.clone(),
        ids: ranked.iter().map(|&i| m.ids[i].clone()).collect(),
        values: ranked.iter().map(|&i| m.values[i].clone()).collect(),
    };
    let log = PreprocessLog {
        threshold,
        input: m.ids.len(),
        after_max_filter: stage1.len(),
        after_range_filter: stage2.len(),
        after_top_k: ranked.len(),
    };
    Ok((out, log))
}

/// Splits the feature with id `response` out of `m`, returning it and the
/// remaining features.
pub fn take_response(m: &ExpressionMatrix, response: &str) -> Result<(Vec<f64>, ExpressionMatrix)> {
    let k = m
        .ids
        .iter()
        .position(|id| id == response)
        .ok_or_else(|| Error::Config(format!("response feature `{response}` not found")))?;
    let mut rest = m.clone();
    rest.ids.remove(k);
    let y = rest.values.remove(k);
    Ok((y, rest))
}

/// Sample-major dataset with `y` as response and the features as
/// predictors.
pub fn to_dataset(y: Vec<f64>, features: &ExpressionMatrix) -> Result<Dataset> {
    Dataset::from_columns(y, features.values.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[(&str, &[f64])]) -> ExpressionMatrix {
        ExpressionMatrix {
            samples: (0..rows[0].1.len()).map(|i| format!("s{i}")).collect(),
            ids: rows.iter().map(|r| r.0.to_string()).collect(),
            values: rows.iter().map(|r| r.1.to_vec()).collect(),
        }
    }

    #[test]
    fn preprocess_filters_in_order() {
        // 16 values; the 25th percentile sits at sorted position 3.75, between 0.3 and 1.
        let m = matrix(&[
            ("low", &[0.0, 0.1, 0.2, 0.3]),
            ("flat", &[7.0, 7.0, 7.0, 7.0]),
            ("wide", &[1.0, 5.0, 9.0, 13.0]),
            ("mid", &[4.0, 6.0, 8.0, 10.0]),
        ]);
        let opts = PreprocessOptions { percentile: 25.0, min_range: 2.0, top_k: 300 };
        let (out, log) = preprocess(&m, &opts).unwrap();
        assert!((log.threshold - 0.825).abs() < 1e-12);
        assert_eq!(out.ids, vec!["wide", "mid"]);
        assert_eq!((log.input, log.after_max_filter, log.after_range_filter, log.after_top_k), (4, 3, 2, 2));

        let (out, _) = preprocess(&m, &PreprocessOptions { top_k: 1, ..opts }).unwrap();
        assert_eq!(out.ids, vec!["wide"]);
    }

    #[test]
    fn top_k_ranks_by_cv() {
        let m = matrix(&[("a", &[10.0, 12.0, 14.0]), ("b", &[1.0, 5.0, 9.0]), ("c", &[20.0, 30.0, 40.0])]);
        let (out, _) = preprocess(&m, &PreprocessOptions { percentile: 0.0, min_range: 0.0, top_k: 2 }).unwrap();
        assert_eq!(out.ids, vec!["b", "c"]);
    }

    #[test]
    fn response_extraction() {
        let m = matrix(&[("a", &[1.0, 2.0]), ("y", &[3.0, 4.0]), ("b", &[5.0, 6.0])]);
        let (y, rest) = take_response(&m, "y").unwrap();
        assert_eq!(y, vec![3.0, 4.0]);
        assert_eq!(rest.ids, vec!["a", "b"]);
        assert!(take_response(&m, "zz").is_err());
    }

    #[test]
    fn coverage_with_unbounded_intervals_is_one() {
        let ci = CredibleInterval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, level: 0.95 };
        let truth = [1.0, 1.5, 2.0, 0.0, 0.0];
        let (pooled, by_coef) = coverage_tables(&vec![vec![ci; 5]; 3], &truth).unwrap();
        assert_eq!(pooled.len(), 4);
        assert!(pooled.iter().chain(&by_coef).all(|r| r.coverage == 1.0));
        assert_eq!(pooled[3].term, "zero_block");
    }
}
