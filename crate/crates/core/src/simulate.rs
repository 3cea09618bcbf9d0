//! Synthetic regression designs: correlated Gaussian covariates, five error
//! laws, an optional heteroscedastic variant, and two coefficient schemes.

use rand::Rng;

use crate::distributions::{cholesky_lower, sample_mvn_row, ErrorLaw, RngStream};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::Dataset;

/// Roles within one replicate's block of RNG streams.
pub const ROLE_DATA: u64 = 0;
pub const ROLE_SPLIT: u64 = 1023;
const STREAMS_PER_REPLICATE: u64 = 1024;

/// Stream id for `role` within `replicate`. Chain `c` uses role `1 + c`.
pub fn stream_id(replicate: u64, role: u64) -> u64 {
    replicate * STREAMS_PER_REPLICATE + role
}

pub fn chain_role(chain: usize) -> u64 {
    1 + chain as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlation {
    /// `ρ^|i-j|`
    Ar1,
    /// `ρ` on the first off-diagonals, zero beyond.
    Banded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// Positions `0, ⌊p/k⌋, 2⌊p/k⌋, …`.
    #[default]
    Even,
    /// A uniformly random `k`-subset, redrawn per replicate.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffScheme {
    /// `count` nonzero coefficients drawn i.i.d. U(0.4, 0.9); intercept 1.
    Selection { count: usize, placement: Placement },
    /// β = (1, 1.5, 2, 0, …); intercept 0.
    Inference3,
}

impl CoeffScheme {
    pub fn selection15() -> Self {
        CoeffScheme::Selection { count: 15, placement: Placement::Even }
    }

    pub fn default_intercept(&self) -> f64 {
        match self {
            CoeffScheme::Selection { .. } => 1.0,
            CoeffScheme::Inference3 => 0.0,
        }
    }

    pub fn nonzero_count(&self) -> usize {
        match self {
            CoeffScheme::Selection { count, .. } => *count,
            CoeffScheme::Inference3 => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    pub n: usize,
    pub p: usize,
    pub corr: Correlation,
    pub rho: f64,
    pub error: ErrorLaw,
    pub heteroscedastic: bool,
    pub scheme: CoeffScheme,
    /// Overrides the scheme's default intercept.
    pub intercept: Option<f64>,
}

impl SimDesign {
    pub fn new(n: usize, p: usize, error: ErrorLaw, scheme: CoeffScheme) -> Self {
        SimDesign { n, p, corr: Correlation::Ar1, rho: 0.5, error, heteroscedastic: false, scheme, intercept: None }
    }

    pub fn intercept(&self) -> f64 {
        self.intercept.unwrap_or_else(|| self.scheme.default_intercept())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.p < self.scheme.nonzero_count().max(1) {
            return Err(Error::Config(format!(
                "p = {} is smaller than the scheme's {} nonzero coefficients",
                self.p,
                self.scheme.nonzero_count()
            )));
        }
        if self.heteroscedastic && self.p < 2 {
            return Err(Error::Config("heteroscedastic errors need at least 2 predictors".into()));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::Config(format!("rho must lie in (-1, 1), got {}", self.rho)));
        }
        Ok(())
    }
}

/// True coefficients of a simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub nonzero: Vec<bool>,
}

pub fn build_correlation(corr: Correlation, p: usize, rho: f64) -> Matrix {
    let mut m = Matrix::identity(p);
    for i in 0..p {
        for j in 0..p {
            let d = i.abs_diff(j);
            m[(i, j)] = match (corr, d) {
                (_, 0) => 1.0,
                (Correlation::Ar1, d) => rho.powi(d as i32),
                (Correlation::Banded, 1) => rho,
                (Correlation::Banded, _) => 0.0,
            };
        }
    }
    m
}

pub fn gen_coefficients(scheme: CoeffScheme, p: usize, rng: &mut RngStream) -> Result<(f64, Vec<f64>, Vec<bool>)> {
    let k = scheme.nonzero_count();
    if p < k {
        return Err(Error::Config(format!("p = {p} is smaller than the scheme's {k} nonzero coefficients")));
    }
    let mut beta = vec![0.0; p];
    match scheme {
        CoeffScheme::Inference3 => beta[..3].copy_from_slice(&[1.0, 1.5, 2.0]),
        CoeffScheme::Selection { count, placement } => {
            let positions: Vec<usize> = match placement {
                Placement::Even => (0..count).map(|i| i * (p / count)).collect(),
                Placement::Random => {
                    let mut idx = rand::seq::index::sample(rng, p, count).into_vec();
                    idx.sort_unstable();
                    idx
                }
            };
            for j in positions {
                beta[j] = rng.random_range(0.4..0.9);
            }
        }
    }
    let nonzero = beta.iter().map(|&b| b != 0.0).collect();
    Ok((scheme.default_intercept(), beta, nonzero))
}

/// Generates replicate `replicate` of `design` from `master_seed`.
///
/// Coefficients, covariates and errors are all drawn from the replicate's
/// data stream, so each replicate is reproducible on its own.
pub fn gen_dataset(design: &SimDesign, master_seed: u64, replicate: u64) -> Result<(Dataset, Truth)> {
    design.validate()?;
    let mut rng = RngStream::new(master_seed, stream_id(replicate, ROLE_DATA));
    let (_, beta, nonzero) = gen_coefficients(design.scheme, design.p, &mut rng)?;
    let beta0 = design.intercept();
    let chol = cholesky_lower(&build_correlation(design.corr, design.p, design.rho))?;
    let rows: Vec<Vec<f64>> = (0..design.n).map(|_| sample_mvn_row(&chol, &mut rng)).collect::<Result<_>>()?;
    let y = rows
        .iter()
        .map(|x| {
            let eps = design.error.sample(&mut rng);
            let scale = if design.heteroscedastic { 1.0 + x[1] } else { 1.0 };
            beta0 + x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + scale * eps
        })
        .collect();
    let data = Dataset::from_rows(y, &rows)?;
    Ok((data, Truth { beta0, beta, nonzero }))
}
