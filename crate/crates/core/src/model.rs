//! Datasets, the six-method configuration space and chain state.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};

/// `ξ²` of the exponential-normal mixture, with `ξ = √8`.
pub const XI_SQUARED: f64 = 8.0;

/// Response vector plus an `n × p` design matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: Vec<f64>,
    n: usize,
    p: usize,
}

impl Dataset {
    pub fn from_columns(y: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = y.len();
        let p = columns.len();
        let mut x = Vec::with_capacity(n * p);
        for col in &columns {
            check_len(n, col.len())?;
            x.extend_from_slice(col);
        }
        Self::validated(y, x, n, p)
    }

    pub fn from_rows(y: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = y.len();
        check_len(n, rows.len())?;
        let p = rows.first().map_or(0, Vec::len);
        let mut x = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            check_len(p, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                x[j * n + i] = v;
            }
        }
        Self::validated(y, x, n, p)
    }

    fn validated(y: Vec<f64>, x: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("need at least 2 observations, got {n}")));
        }
        if p < 1 {
            return Err(Error::Config("need at least 1 predictor".into()));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("response {i} is not finite")));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("design entry ({}, {}) is not finite", k % n, k / n)));
        }
        Ok(Dataset { y, x, n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.x[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[j * self.n + i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.get(i, j)).collect()
    }

    /// Linear predictor `β₀ + xᵢᵀβ` for every row.
    pub fn predict(&self, beta0: f64, beta: &[f64]) -> Result<Vec<f64>> {
        check_len(self.p, beta.len())?;
        let mut out = vec![beta0; self.n];
        for (j, &b) in beta.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.column(j)) {
                *o += x * b;
            }
        }
        Ok(out)
    }

    /// Replaces the response, keeping the design.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        check_len(self.n, y.len())?;
        Self::validated(y, self.x.clone(), self.n, self.p)
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let y = rows.iter().map(|&i| self.y[i]).collect();
        let mut x = Vec::with_capacity(rows.len() * self.p);
        for j in 0..self.p {
            let col = self.column(j);
            x.extend(rows.iter().map(|&i| col[i]));
        }
        Self::validated(y, x, rows.len(), self.p)
    }

    /// Centers each column and scales it to unit sample standard deviation.
    /// Constant columns are only centered. Returns the per-column
    /// `(mean, sd)` used.
    pub fn standardize_columns(&mut self) -> Vec<(f64, f64)> {
        let n = self.n as f64;
        let mut scaling = Vec::with_capacity(self.p);
        for j in 0..self.p {
            let col = &mut self.x[j * self.n..(j + 1) * self.n];
            let mean = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let div = if sd > 0.0 { sd } else { 1.0 };
            for v in col.iter_mut() {
                *v = (*v - mean) / div;
            }
            scaling.push((mean, sd));
        }
        scaling
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Likelihood {
    /// Laplace working likelihood (median regression) via its
    /// exponential-normal mixture.
    RobustLaplace,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prior {
    Horseshoe,
    HorseshoePlus,
    RegularizedHorseshoe,
}

/// The six named methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Rbhs,
    RbhsPlus,
    Rbrhs,
    Bhs,
    BhsPlus,
    Brhs,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Rbhs, Method::RbhsPlus, Method::Rbrhs, Method::Bhs, Method::BhsPlus, Method::Brhs];

    pub fn new(likelihood: Likelihood, prior: Prior) -> Self {
        use Likelihood::*;
        use Prior::*;
        match (likelihood, prior) {
            (RobustLaplace, Horseshoe) => Method::Rbhs,
            (RobustLaplace, HorseshoePlus) => Method::RbhsPlus,
            (RobustLaplace, RegularizedHorseshoe) => Method::Rbrhs,
            (Gaussian, Horseshoe) => Method::Bhs,
            (Gaussian, HorseshoePlus) => Method::BhsPlus,
            (Gaussian, RegularizedHorseshoe) => Method::Brhs,
        }
    }

    pub fn likelihood(self) -> Likelihood {
        match self {
            Method::Rbhs | Method::RbhsPlus | Method::Rbrhs => Likelihood::RobustLaplace,
            Method::Bhs | Method::BhsPlus | Method::Brhs => Likelihood::Gaussian,
        }
    }

    pub fn prior(self) -> Prior {
        match self {
            Method::Rbhs | Method::Bhs => Prior::Horseshoe,
            Method::RbhsPlus | Method::BhsPlus => Prior::HorseshoePlus,
            Method::Rbrhs | Method::Brhs => Prior::RegularizedHorseshoe,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Rbhs => "rbhs",
            Method::RbhsPlus => "rbhs+",
            Method::Rbrhs => "rbrhs",
            Method::Bhs => "bhs",
            Method::BhsPlus => "bhs+",
            Method::Brhs => "brhs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Prior hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    /// Intercept prior variance.
    pub sigma2_beta0: f64,
    /// Shape of the Gamma prior on τ (robust) or Inverse-Gamma prior on σ².
    pub e: f64,
    /// Rate of the τ prior, or scale of the σ² prior.
    pub f: f64,
    /// `b² ~ Inverse-Gamma(c/2, d/2)`, regularized horseshoe only.
    pub c: f64,
    pub d: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper { sigma2_beta0: 100.0, e: 1.0, f: 1.0, c: 1.0, d: 1.0 }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("sigma2_beta0", self.sigma2_beta0), ("e", self.e), ("f", self.f), ("c", self.c), ("d", self.d)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("hyperparameter {name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    pub likelihood: Likelihood,
    pub prior: Prior,
    pub hyper: Hyper,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl SamplerSpec {
    /// Paper-default run length: 10,000 sweeps, the first half discarded.
    pub fn new(method: Method) -> Self {
        SamplerSpec {
            likelihood: method.likelihood(),
            prior: method.prior(),
            hyper: Hyper::default(),
            n_iter: 10_000,
            burn_in: 5_000,
            thin: 1,
            seed: 0,
        }
    }

    pub fn with_iterations(mut self, n_iter: usize, burn_in: usize) -> Self {
        self.n_iter = n_iter;
        self.burn_in = burn_in;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn method(&self) -> Method {
        Method::new(self.likelihood, self.prior)
    }

    pub fn retained(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.retained() == 0 {
            return Err(Error::Config("no draws would be retained after burn-in and thinning".into()));
        }
        Ok(())
    }
}

/// One full assignment of the latent variables. Fields that a method never
/// updates are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub beta0: f64,
    pub beta: Vec<f64>,
    /// Per-observation mixing scales ṽᵢ (robust only).
    pub v_tilde: Option<Vec<f64>>,
    /// Laplace precision τ (robust only).
    pub tau: Option<f64>,
    /// Noise variance σ² (Gaussian only).
    pub sigma2: Option<f64>,
    /// Local scales s_j².
    pub s2: Vec<f64>,
    /// Auxiliary ν_j of the local half-Cauchy mixture.
    pub nu: Vec<f64>,
    /// φ_j² (horseshoe+ only).
    pub phi2: Option<Vec<f64>>,
    /// ζ_j (horseshoe+ only).
    pub zeta: Option<Vec<f64>>,
    /// Global scale λ².
    pub lambda2: f64,
    /// Auxiliary ξ₁ of the global half-Cauchy mixture.
    pub xi1: f64,
    /// Slab width b² (regularized horseshoe only).
    pub b2: Option<f64>,
}

impl ChainState {
    /// Neutral starting point: zero coefficients, every scale equal to one.
    pub fn neutral(likelihood: Likelihood, prior: Prior, n: usize, p: usize) -> Self {
        let robust = likelihood == Likelihood::RobustLaplace;
        let plus = prior == Prior::HorseshoePlus;
        ChainState {
            beta0: 0.0,
            beta: vec![0.0; p],
            v_tilde: robust.then(|| vec![1.0; n]),
            tau: robust.then_some(1.0),
            sigma2: (!robust).then_some(1.0),
            s2: vec![1.0; p],
            nu: vec![1.0; p],
            phi2: plus.then(|| vec![1.0; p]),
            zeta: plus.then(|| vec![1.0; p]),
            lambda2: 1.0,
            xi1: 1.0,
            b2: (prior == Prior::RegularizedHorseshoe).then_some(1.0),
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// True when every positive-constrained field is strictly positive and
    /// finite.
    pub fn is_positive(&self) -> bool {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        let all = |v: &[f64]| v.iter().all(|&x| pos(x));
        all(&self.s2)
            && all(&self.nu)
            && pos(self.lambda2)
            && pos(self.xi1)
            && self.v_tilde.as_deref().is_none_or(all)
            && self.phi2.as_deref().is_none_or(all)
            && self.zeta.as_deref().is_none_or(all)
            && self.tau.is_none_or(pos)
            && self.sigma2.is_none_or(pos)
            && self.b2.is_none_or(pos)
    }
}

/// Deterministic neutral initialization for `spec` on `data`.
pub fn init_state(spec: &SamplerSpec, data: &Dataset) -> Result<ChainState> {
    spec.validate()?;
    Ok(ChainState::neutral(spec.likelihood, spec.prior, data.n(), data.p()))
}

/// Retained post-burn-in draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    p: usize,
    pub beta0: Vec<f64>,
    /// Row-major `m × p`.
    beta: Vec<f64>,
    /// τ (robust) or σ² (Gaussian) at each retained sweep.
    pub noise_trace: Vec<f64>,
    pub lambda2_trace: Vec<f64>,
}

impl PosteriorDraws {
    pub fn with_capacity(p: usize, m: usize) -> Self {
        PosteriorDraws {
            p,
            beta0: Vec::with_capacity(m),
            beta: Vec::with_capacity(m * p),
            noise_trace: Vec::with_capacity(m),
            lambda2_trace: Vec::with_capacity(m),
        }
    }

    pub fn push(&mut self, state: &ChainState) {
        debug_assert_eq!(state.beta.len(), self.p);
        self.beta0.push(state.beta0);
        self.beta.extend_from_slice(&state.beta);
        self.noise_trace.push(state.tau.or(state.sigma2).unwrap_or(f64::NAN));
        self.lambda2_trace.push(state.lambda2);
    }

    /// Number of retained draws.
    pub fn len(&self) -> usize {
        self.beta0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta0.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.beta[k * self.p..(k + 1) * self.p]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.beta.iter().skip(j).step_by(self.p).copied().collect()
    }

    /// Appends another set of draws over the same coefficients.
    pub fn extend(&mut self, other: &PosteriorDraws) -> Result<()> {
        check_len(self.p, other.p)?;
        self.beta0.extend_from_slice(&other.beta0);
        self.beta.extend_from_slice(&other.beta);
        self.noise_trace.extend_from_slice(&other.noise_trace);
        self.lambda2_trace.extend_from_slice(&other.lambda2_trace);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, p: usize) -> Dataset {
        let cols = (0..p).map(|j| (0..n).map(|i| (i * p + j) as f64).collect()).collect();
        Dataset::from_columns(vec![0.0; n], cols).unwrap()
    }

    #[test]
    fn gating_follows_method() {
        let data = toy(4, 3);
        let s = init_state(&SamplerSpec::new(Method::Rbhs), &data).unwrap();
        assert!(s.sigma2.is_none() && s.phi2.is_none() && s.zeta.is_none() && s.b2.is_none());
        assert_eq!(s.v_tilde.as_ref().map(Vec::len), Some(4));
        assert_eq!(s.tau, Some(1.0));

        let s = init_state(&SamplerSpec::new(Method::Brhs), &data).unwrap();
        assert_eq!(s.sigma2, Some(1.0));
        assert_eq!(s.b2, Some(1.0));
        assert!(s.v_tilde.is_none() && s.tau.is_none());

        let s = init_state(&SamplerSpec::new(Method::BhsPlus), &data).unwrap();
        assert!(s.phi2.is_some() && s.zeta.is_some());
    }

    #[test]
    fn neutral_state_is_all_ones() {
        let data = toy(5, 2);
        for m in Method::ALL {
            let s = init_state(&SamplerSpec::new(m), &data).unwrap();
            assert!(s.beta.iter().all(|&b| b == 0.0));
            assert_eq!(s.beta0, 0.0);
            let ones = |v: &[f64]| v.iter().all(|&x| x == 1.0);
            assert!(ones(&s.s2) && ones(&s.nu));
            assert_eq!((s.lambda2, s.xi1), (1.0, 1.0));
            assert!(s.phi2.as_deref().is_none_or(ones));
            assert!(s.is_positive());
        }
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(Method::new(m.likelihood(), m.prior()), m);
        }
        assert!("lasso".parse::<Method>().is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = SamplerSpec::new(Method::Bhs).with_iterations(10, 10);
        assert!(spec.validate().is_err());
        spec.burn_in = 4;
        spec.thin = 0;
        assert!(spec.validate().is_err());
        spec.thin = 3;
        spec.validate().unwrap();
        assert_eq!(spec.retained(), 2);
        spec.hyper.c = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn dataset_rejects_bad_input() {
        assert!(Dataset::from_columns(vec![1.0], vec![vec![1.0]]).is_err());
        assert!(Dataset::from_columns(vec![1.0, 2.0], vec![]).is_err());
        assert!(Dataset::from_columns(vec![1.0, f64::NAN], vec![vec![1.0, 2.0]]).is_err());
        assert!(Dataset::from_columns(vec![1.0, 2.0], vec![vec![1.0]]).is_err());
    }

    #[test]
    fn rows_and_columns_agree() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let d = Dataset::from_rows(vec![0.0; 3], &rows).unwrap();
        assert_eq!(d.column(1), &[2.0, 4.0, 6.0]);
        assert_eq!(d.row(2), vec![5.0, 6.0]);
        assert_eq!(d.predict(1.0, &[1.0, -1.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        let sub = d.select_rows(&[2, 0]).unwrap();
        assert_eq!(sub.column(0), &[5.0, 1.0]);
    }

    #[test]
    fn standardize_gives_unit_columns() {
        let mut d = toy(6, 2);
        d.standardize_columns();
        for j in 0..2 {
            let c = d.column(j);
            let mean = c.iter().sum::<f64>() / 6.0;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 5.0;
            assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        }
    }
}
