//! Seeded random-variate kernels.
//!
//! Parameterizations are fixed throughout the crate:
//!
//! * Gamma: shape-rate, density proportional to `x^(a-1) exp(-b x)`
//! * Inverse-Gamma: shape-scale, density proportional to `x^(-a-1) exp(-b / x)`
//! * Exponential: rate
//! * Inverse-Gaussian: (mean, shape)

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, LogNormal, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A reproducible random stream addressed by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent
/// sequences for distinct `stream_id`s under one seed without any
/// coordination between workers.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on the half-open interval (0, 1].
    fn open_unit(&mut self) -> f64 {
        1.0 - self.inner.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(name, value))
    }
}

/// Keeps positive-support draws strictly inside `(0, f64::MAX]`.
fn strictly_positive(x: f64) -> f64 {
    if x <= 0.0 {
        f64::MIN_POSITIVE
    } else if x.is_infinite() {
        f64::MAX
    } else {
        x
    }
}

pub fn standard_normal(rng: &mut RngStream) -> f64 {
    StandardNormal.sample(rng)
}

pub fn sample_normal(mean: f64, sd: f64, rng: &mut RngStream) -> Result<f64> {
    positive("sd", sd)?;
    if !mean.is_finite() {
        return Err(Error::param("mean", mean));
    }
    Ok(mean + sd * standard_normal(rng))
}

pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    positive("shape", shape)?;
    positive("rate", rate)?;
    let unit = Gamma::new(shape, 1.0).map_err(|_| Error::param("shape", shape))?;
    let g: f64 = unit.sample(rng);
    Ok(strictly_positive(g / rate))
}

pub fn sample_inverse_gamma(shape: f64, scale: f64, rng: &mut RngStream) -> Result<f64> {
    positive("shape", shape)?;
    positive("scale", scale)?;
    let unit = Gamma::new(shape, 1.0).map_err(|_| Error::param("shape", shape))?;
    let g: f64 = unit.sample(rng);
    Ok(strictly_positive(scale / g))
}

pub fn sample_exponential(rate: f64, rng: &mut RngStream) -> Result<f64> {
    positive("rate", rate)?;
    let e: f64 = Exp1.sample(rng);
    Ok(strictly_positive(e / rate))
}

/// Michael-Schucany-Haas transformation with one rejection step.
///
/// The smaller root of the quadratic is evaluated as
/// `mean / (1 + a + sqrt(a (a + 2)))` with `a = mean * chi2 / (2 shape)`,
/// which avoids the cancellation of the textbook form when `mean / shape`
/// is large.
pub fn sample_inverse_gaussian(mean: f64, shape: f64, rng: &mut RngStream) -> Result<f64> {
    positive("mean", mean)?;
    positive("shape", shape)?;
    let z = standard_normal(rng);
    let a = mean * z * z / (2.0 * shape);
    let root = mean / (1.0 + a + (a * (a + 2.0)).sqrt());
    let u = rng.open_unit();
    let x = if u * (mean + root) <= mean { root } else { mean * (mean / root) };
    Ok(strictly_positive(x))
}

/// How the second component of the contaminated normal error is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixtureScale {
    /// The configured 3 is the component variance.
    #[default]
    Variance,
    /// The configured 3 is the component standard deviation.
    StdDev,
}

/// The five simulation error laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// N(0, 1)
    Normal = 1,
    /// Student t with 2 degrees of freedom
    StudentT2 = 2,
    /// Laplace(0, 1)
    Laplace = 3,
    /// 0.8 N(0, 1) + 0.2 N(0, 3)
    Contaminated = 4,
    /// Lognormal(0, 1)
    LogNormal = 5,
}

impl ErrorKind {
    pub fn from_index(index: u32) -> Result<Self> {
        match index {
            1 => Ok(ErrorKind::Normal),
            2 => Ok(ErrorKind::StudentT2),
            3 => Ok(ErrorKind::Laplace),
            4 => Ok(ErrorKind::Contaminated),
            5 => Ok(ErrorKind::LogNormal),
            other => Err(Error::param("error_kind", f64::from(other))),
        }
    }

    pub fn index(self) -> u32 {
        self as u32
    }
}

/// An error law together with the contaminated-normal scale convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorLaw {
    pub kind: ErrorKind,
    pub mixture_scale: MixtureScale,
}

impl ErrorLaw {
    pub fn new(kind: ErrorKind) -> Self {
        ErrorLaw { kind, mixture_scale: MixtureScale::default() }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self.kind {
            ErrorKind::Normal => standard_normal(rng),
            ErrorKind::StudentT2 => {
                let t = StudentT::new(2.0).expect("2 degrees of freedom is valid");
                t.sample(rng)
            }
            ErrorKind::Laplace => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    e
                } else {
                    -e
                }
            }
            ErrorKind::Contaminated => {
                let sd = if rng.random::<f64>() < 0.8 {
                    1.0
                } else {
                    match self.mixture_scale {
                        MixtureScale::Variance => 3f64.sqrt(),
                        MixtureScale::StdDev => 3.0,
                    }
                };
                sd * standard_normal(rng)
            }
            ErrorKind::LogNormal => {
                let ln = LogNormal::new(0.0, 1.0).expect("unit lognormal is valid");
                ln.sample(rng)
            }
        }
    }
}

/// Draws one error variate, treating the contaminated component's 3 as a
/// variance.
pub fn sample_error(kind: ErrorKind, rng: &mut RngStream) -> f64 {
    ErrorLaw::new(kind).sample(rng)
}

/// Lower Cholesky factor `L` with `L Lᵀ = cov`.
pub fn cholesky_lower(cov: &Matrix) -> Result<Matrix> {
    if !cov.is_square() {
        return Err(Error::Shape { expected: cov.rows(), found: cov.cols() });
    }
    let dim = cov.rows();
    let mut l = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let mut diag = cov[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::Decomposition { pivot: j, value: diag });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..dim {
            let mut s = cov[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// One draw of `L z` with `z` i.i.d. standard normal.
pub fn sample_mvn_row(chol: &Matrix, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !chol.is_square() {
        return Err(Error::Shape { expected: chol.rows(), found: chol.cols() });
    }
    let dim = chol.rows();
    let z: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
    Ok((0..dim).map(|i| chol.row(i)[..=i].iter().zip(&z).map(|(l, z)| l * z).sum()).collect())
}
