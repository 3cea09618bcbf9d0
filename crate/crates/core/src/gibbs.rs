//! Full-conditional update kernels and the systematic-scan chain runner for
//! all six methods.
//!
//! The robust and Gaussian likelihoods share one set of coefficient
//! kernels: both reduce to a normal linear model with per-observation
//! variances `wᵢ`, which is `ξ² ṽᵢ / τ` under the Laplace mixture and `σ²`
//! under the Gaussian likelihood.

use crate::distributions::{sample_gamma, sample_inverse_gamma, sample_inverse_gaussian, sample_normal, RngStream};
use crate::error::{check_len, Error, Result};
use crate::model::{ChainState, Dataset, Likelihood, PosteriorDraws, Prior, SamplerSpec, XI_SQUARED};

/// Lower and upper clamp applied to s², λ², ṽ and b² after each draw.
pub const SCALE_FLOOR: f64 = 1e-12;
pub const SCALE_CEIL: f64 = 1e12;

/// Squared residuals are floored here before forming the inverse-Gaussian
/// mean for ṽ.
pub const RESIDUAL_SQ_FLOOR: f64 = 1e-12;

fn clamp_scale(x: f64) -> f64 {
    x.clamp(SCALE_FLOOR, SCALE_CEIL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalDraw {
    pub value: f64,
    pub mean: f64,
    pub var: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDraw {
    pub value: f64,
    pub shape: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvGammaDraw {
    pub value: f64,
    pub shape: f64,
    pub scale: f64,
}

fn inv_gamma(shape: f64, scale: f64, rng: &mut RngStream) -> Result<InvGammaDraw> {
    let value = sample_inverse_gamma(shape, scale, rng)?;
    Ok(InvGammaDraw { value, shape, scale })
}

/// Per-observation conditional variances `wᵢ`, held as precisions.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWeights {
    precision: Vec<f64>,
}

impl ObservationWeights {
    pub fn from_variances(w: &[f64]) -> Result<Self> {
        let precision = w
            .iter()
            .map(|&wi| {
                if wi > 0.0 && wi.is_finite() {
                    Ok(1.0 / wi)
                } else {
                    Err(Error::Numeric(format!("observation variance must be positive, got {wi}")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(ObservationWeights { precision })
    }

    /// `wᵢ = ξ² ṽᵢ / τ`.
    pub fn robust(tau: f64, v_tilde: &[f64], xi2: f64) -> Result<Self> {
        let w: Vec<f64> = v_tilde.iter().map(|v| xi2 * v / tau).collect();
        Self::from_variances(&w)
    }

    /// `wᵢ = σ²` for every observation.
    pub fn gaussian(sigma2: f64, n: usize) -> Result<Self> {
        Self::from_variances(&vec![sigma2; n])
    }

    pub fn len(&self) -> usize {
        self.precision.len()
    }

    pub fn is_empty(&self) -> bool {
        self.precision.is_empty()
    }

    pub fn precisions(&self) -> &[f64] {
        &self.precision
    }

    pub fn variance(&self, i: usize) -> f64 {
        1.0 / self.precision[i]
    }
}

/// Draws β₀ given `yᵢ - xᵢᵀβ` for every observation.
pub fn update_beta0(
    resid_excl_intercept: &[f64],
    w: &ObservationWeights,
    sigma2_beta0: f64,
    rng: &mut RngStream,
) -> Result<NormalDraw> {
    check_len(w.len(), resid_excl_intercept.len())?;
    let (mut num, mut prec) = (0.0, 1.0 / sigma2_beta0);
    for (r, q) in resid_excl_intercept.iter().zip(w.precisions()) {
        num += r * q;
        prec += q;
    }
    normal_from_canonical(num, prec, rng)
}

/// Draws β_j given the partial residual `yᵢ - β₀ - Σ_{k≠j} x_{ik} β_k`.
pub fn update_beta_j(
    partial_resid: &[f64],
    x_col: &[f64],
    w: &ObservationWeights,
    prior_precision: f64,
    rng: &mut RngStream,
) -> Result<NormalDraw> {
    check_len(w.len(), partial_resid.len())?;
    check_len(w.len(), x_col.len())?;
    if !(prior_precision > 0.0 && prior_precision.is_finite()) {
        return Err(Error::Numeric(format!("prior precision must be positive and finite, got {prior_precision}")));
    }
    let (mut xr, mut xx) = (0.0, 0.0);
    for ((r, x), q) in partial_resid.iter().zip(x_col).zip(w.precisions()) {
        let xq = x * q;
        xr += xq * r;
        xx += xq * x;
    }
    normal_from_canonical(xr, xx + prior_precision, rng)
}

/// Normal draw from the canonical form `exp(num·β - prec·β²/2)`.
fn normal_from_canonical(num: f64, prec: f64, rng: &mut RngStream) -> Result<NormalDraw> {
    let var = 1.0 / prec;
    let mean = var * num;
    if !(var > 0.0 && var.is_finite() && mean.is_finite()) {
        return Err(Error::Numeric(format!("degenerate normal conditional (mean {mean}, var {var})")));
    }
    let value = sample_normal(mean, var.sqrt(), rng)?;
    Ok(NormalDraw { value, mean, var })
}

/// Conditional prior precision `q_j` of β_j for each method.
pub fn prior_precision(
    likelihood: Likelihood,
    prior: Prior,
    lambda2: f64,
    s2_j: f64,
    sigma2: Option<f64>,
    b2: Option<f64>,
) -> Result<f64> {
    let local = match likelihood {
        Likelihood::RobustLaplace => lambda2 * s2_j,
        Likelihood::Gaussian => sigma2.ok_or_else(missing_sigma2)? * lambda2 * s2_j,
    };
    let mut q = 1.0 / local;
    if prior == Prior::RegularizedHorseshoe {
        q += 1.0 / b2.ok_or_else(|| Error::Config("regularized horseshoe requires b²".into()))?;
    }
    Ok(q)
}

fn missing_sigma2() -> Error {
    Error::Config("Gaussian likelihood requires σ²".into())
}

/// One ṽᵢ draw: the reciprocal of an
/// Inverse-Gaussian(√(2ξ²/rᵢ²), 2τ) variate.
pub fn draw_v_tilde_i(resid: f64, tau: f64, xi2: f64, rng: &mut RngStream) -> Result<f64> {
    let (mean, shape) = v_tilde_conditional(resid, tau, xi2);
    let w = sample_inverse_gaussian(mean, shape, rng)?;
    Ok(clamp_scale(1.0 / w))
}

/// `(mean, shape)` of the Inverse-Gaussian law of `1/ṽᵢ`.
pub fn v_tilde_conditional(resid: f64, tau: f64, xi2: f64) -> (f64, f64) {
    let r2 = (resid * resid).max(RESIDUAL_SQ_FLOOR);
    ((2.0 * xi2 / r2).sqrt(), 2.0 * tau)
}

pub fn update_v_tilde(resid: &[f64], tau: f64, xi2: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::param("tau", tau));
    }
    resid.iter().map(|&r| draw_v_tilde_i(r, tau, xi2, rng)).collect()
}

/// τ | rest ~ Gamma(e + 3n/2, f + Σṽᵢ + Σ rᵢ²/(2ξ²ṽᵢ)).
pub fn update_tau(resid: &[f64], v_tilde: &[f64], xi2: f64, e: f64, f: f64, rng: &mut RngStream) -> Result<GammaDraw> {
    check_len(resid.len(), v_tilde.len())?;
    let mut rate = f;
    for (r, &v) in resid.iter().zip(v_tilde) {
        if !(v > 0.0) {
            return Err(Error::Numeric(format!("ṽ must be positive, got {v}")));
        }
        rate += v + r * r / (2.0 * xi2 * v);
    }
    let shape = e + 1.5 * resid.len() as f64;
    let value = sample_gamma(shape, rate, rng)?;
    Ok(GammaDraw { value, shape, rate })
}

/// σ² | rest ~ Inverse-Gamma(e + (n+p)/2, f + ½Σrᵢ² + ½Σβ_j²/(λ²s_j²)).
pub fn update_sigma2(
    resid: &[f64],
    beta: &[f64],
    lambda2: f64,
    s2: &[f64],
    e: f64,
    f: f64,
    rng: &mut RngStream,
) -> Result<InvGammaDraw> {
    check_len(beta.len(), s2.len())?;
    let ssr: f64 = resid.iter().map(|r| r * r).sum();
    let penalty: f64 = beta.iter().zip(s2).map(|(b, s)| b * b / (lambda2 * s)).sum();
    let shape = e + 0.5 * (resid.len() + beta.len()) as f64;
    inv_gamma(shape, f + 0.5 * ssr + 0.5 * penalty, rng)
}

/// s_j² | rest ~ Inverse-Gamma(1, β_j²/(2λ²) + 1/ν_j), with λ² replaced by
/// σ²λ² under the Gaussian likelihood.
pub fn update_s2_j(
    beta_j: f64,
    lambda2: f64,
    nu_j: f64,
    likelihood: Likelihood,
    sigma2: Option<f64>,
    rng: &mut RngStream,
) -> Result<InvGammaDraw> {
    let global = match likelihood {
        Likelihood::RobustLaplace => lambda2,
        Likelihood::Gaussian => sigma2.ok_or_else(missing_sigma2)? * lambda2,
    };
    let mut d = inv_gamma(1.0, beta_j * beta_j / (2.0 * global) + 1.0 / nu_j, rng)?;
    d.value = clamp_scale(d.value);
    Ok(d)
}

/// ν_j | rest ~ Inverse-Gamma(1, 1/s_j² + r), with `r = 1` for the
/// horseshoe and `r = 1/φ_j²` for the horseshoe+.
pub fn update_nu_j(s2_j: f64, prior_scale_recip: f64, rng: &mut RngStream) -> Result<InvGammaDraw> {
    if !(s2_j > 0.0) {
        return Err(Error::param("s2_j", s2_j));
    }
    if !(prior_scale_recip > 0.0) {
        return Err(Error::param("prior_scale_recip", prior_scale_recip));
    }
    inv_gamma(1.0, 1.0 / s2_j + prior_scale_recip, rng)
}

/// φ_j² | rest ~ Inverse-Gamma(1, 1/ν_j + 1/ζ_j).
pub fn update_phi2_j(nu_j: f64, zeta_j: f64, rng: &mut RngStream) -> Result<InvGammaDraw> {
    inv_gamma(1.0, 1.0 / nu_j + 1.0 / zeta_j, rng)
}

/// ζ_j | rest ~ Inverse-Gamma(1, 1/φ_j² + 1).
pub fn update_zeta_j(phi2_j: f64, rng: &mut RngStream) -> Result<InvGammaDraw> {
    inv_gamma(1.0, 1.0 / phi2_j + 1.0, rng)
}

/// λ² | rest ~ Inverse-Gamma((p+1)/2, 1/ξ₁ + ½Σβ_j²/s_j²), with the sum
/// divided by σ² under the Gaussian likelihood.
pub fn update_lambda2(
    beta: &[f64],
    s2: &[f64],
    xi1: f64,
    likelihood: Likelihood,
    sigma2: Option<f64>,
    rng: &mut RngStream,
) -> Result<InvGammaDraw> {
    check_len(beta.len(), s2.len())?;
    let noise = match likelihood {
        Likelihood::RobustLaplace => 1.0,
        Likelihood::Gaussian => sigma2.ok_or_else(missing_sigma2)?,
    };
    let ss: f64 = beta.iter().zip(s2).map(|(b, s)| b * b / s).sum();
    let shape = 0.5 * (beta.len() as f64 + 1.0);
    let mut d = inv_gamma(shape, 1.0 / xi1 + 0.5 * ss / noise, rng)?;
    d.value = clamp_scale(d.value);
    Ok(d)
}

/// ξ₁ | rest ~ Inverse-Gamma(1, 1 + 1/λ²).
pub fn update_xi1(lambda2: f64, rng: &mut RngStream) -> Result<InvGammaDraw> {
    inv_gamma(1.0, 1.0 + 1.0 / lambda2, rng)
}

/// b² | rest ~ Inverse-Gamma((c+p)/2, (d + Σβ_j²)/2).
pub fn update_b2(beta: &[f64], c: f64, d: f64, rng: &mut RngStream) -> Result<InvGammaDraw> {
    let ss: f64 = beta.iter().map(|b| b * b).sum();
    let mut draw = inv_gamma(0.5 * (c + beta.len() as f64), 0.5 * (d + ss), rng)?;
    draw.value = clamp_scale(draw.value);
    Ok(draw)
}

/// Systematic-scan Gibbs sampler for one dataset.
///
/// Each sweep updates, in order: β₀; β₁..β_p with the residual maintained
/// incrementally; (ṽ, τ) or σ²; s²; ν; (φ², ζ); λ²; ξ₁; (b²). The
/// residual is rebuilt from scratch at the start of every sweep.
#[derive(Debug)]
pub struct Sampler<'a> {
    spec: SamplerSpec,
    data: &'a Dataset,
    resid: Vec<f64>,
    precision: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(spec: &SamplerSpec, data: &'a Dataset) -> Result<Self> {
        spec.validate()?;
        Ok(Sampler { spec: spec.clone(), data, resid: vec![0.0; data.n()], precision: vec![0.0; data.n()] })
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    /// The incrementally maintained residual `y - β₀ - Xβ` as of the last
    /// sweep.
    pub fn residual(&self) -> &[f64] {
        &self.resid
    }

    /// `y - β₀ - Xβ` computed from scratch.
    pub fn fresh_residual(&self, state: &ChainState) -> Vec<f64> {
        let mut r: Vec<f64> = self.data.y().iter().map(|y| y - state.beta0).collect();
        for (j, &b) in state.beta.iter().enumerate() {
            for (ri, x) in r.iter_mut().zip(self.data.column(j)) {
                *ri -= x * b;
            }
        }
        r
    }

    fn check_state(&self, state: &ChainState) -> Result<()> {
        let (n, p) = (self.data.n(), self.data.p());
        check_len(p, state.beta.len())?;
        check_len(p, state.s2.len())?;
        check_len(p, state.nu.len())?;
        let robust = self.spec.likelihood == Likelihood::RobustLaplace;
        let plus = self.spec.prior == Prior::HorseshoePlus;
        let regularized = self.spec.prior == Prior::RegularizedHorseshoe;
        let gated = [
            ("v_tilde", state.v_tilde.is_some(), robust),
            ("tau", state.tau.is_some(), robust),
            ("sigma2", state.sigma2.is_some(), !robust),
            ("phi2", state.phi2.is_some(), plus),
            ("zeta", state.zeta.is_some(), plus),
            ("b2", state.b2.is_some(), regularized),
        ];
        for (name, present, expected) in gated {
            if present != expected {
                return Err(Error::Config(format!(
                    "state field `{name}` {} for method {}",
                    if present { "present" } else { "missing" },
                    self.spec.method()
                )));
            }
        }
        if let Some(v) = &state.v_tilde {
            check_len(n, v.len())?;
        }
        for v in [&state.phi2, &state.zeta].into_iter().flatten() {
            check_len(p, v.len())?;
        }
        Ok(())
    }

    /// Refreshes the observation precisions `1/wᵢ` from the state.
    fn refresh_precision(&mut self, state: &ChainState) -> Result<()> {
        match self.spec.likelihood {
            Likelihood::RobustLaplace => {
                let tau = state.tau.expect("checked");
                let v = state.v_tilde.as_deref().expect("checked");
                for (q, &vi) in self.precision.iter_mut().zip(v) {
                    *q = tau / (XI_SQUARED * vi);
                }
            }
            Likelihood::Gaussian => {
                let sigma2 = state.sigma2.expect("checked");
                self.precision.fill(1.0 / sigma2);
            }
        }
        if let Some(q) = self.precision.iter().find(|q| !(**q > 0.0 && q.is_finite())) {
            return Err(Error::Numeric(format!("observation precision {q} is not positive and finite")));
        }
        Ok(())
    }

    /// Runs one full sweep, updating `state` in place.
    pub fn sweep(&mut self, state: &mut ChainState, rng: &mut RngStream, sweep: usize) -> Result<()> {
        self.check_state(state)?;
        self.resid = self.fresh_residual(state);
        self.refresh_precision(state)?;
        self.update_coefficients(state, rng, sweep)?;
        match self.spec.likelihood {
            Likelihood::RobustLaplace => self.update_laplace_block(state, rng).map_err(|e| e.in_sweep(sweep, "ṽ/τ"))?,
            Likelihood::Gaussian => self.update_sigma2(state, rng).map_err(|e| e.in_sweep(sweep, "σ²"))?,
        }
        self.update_local_scales(state, rng).map_err(|e| e.in_sweep(sweep, "local scales"))?;
        if self.spec.prior == Prior::HorseshoePlus {
            self.update_plus_block(state, rng).map_err(|e| e.in_sweep(sweep, "φ²/ζ"))?;
        }
        self.update_global_scale(state, rng).map_err(|e| e.in_sweep(sweep, "λ²/ξ₁"))?;
        if self.spec.prior == Prior::RegularizedHorseshoe {
            self.update_b2(state, rng).map_err(|e| e.in_sweep(sweep, "b²"))?;
        }
        if !state.is_positive() {
            return Err(Error::Numeric(format!("sweep {sweep}: a scale parameter left the positive reals")));
        }
        Ok(())
    }

    fn update_coefficients(&mut self, state: &mut ChainState, rng: &mut RngStream, sweep: usize) -> Result<()> {
        // Intercept.
        let (mut num, mut prec) = (0.0, 1.0 / self.spec.hyper.sigma2_beta0);
        for (r, q) in self.resid.iter().zip(&self.precision) {
            num += (r + state.beta0) * q;
            prec += q;
        }
        let draw = normal_from_canonical(num, prec, rng).map_err(|e| e.in_sweep(sweep, "β₀"))?;
        let delta = draw.value - state.beta0;
        self.resid.iter_mut().for_each(|r| *r -= delta);
        state.beta0 = draw.value;

        for j in 0..state.beta.len() {
            let q = prior_precision(
                self.spec.likelihood,
                self.spec.prior,
                state.lambda2,
                state.s2[j],
                state.sigma2,
                state.b2,
            )?;
            let col = self.data.column(j);
            let (mut xr, mut xx) = (0.0, 0.0);
            for ((x, r), w) in col.iter().zip(&self.resid).zip(&self.precision) {
                let xw = x * w;
                xr += xw * r;
                xx += xw * x;
            }
            let old = state.beta[j];
            let draw =
                normal_from_canonical(xr + old * xx, xx + q, rng).map_err(|e| e.in_sweep(sweep, &format!("β[{j}]")))?;
            let delta = draw.value - old;
            if delta != 0.0 {
                for (r, x) in self.resid.iter_mut().zip(col) {
                    *r -= x * delta;
                }
            }
            state.beta[j] = draw.value;
        }
        Ok(())
    }

    fn update_laplace_block(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        let tau = state.tau.ok_or_else(|| Error::Config("ṽ/τ update requires the Laplace likelihood".into()))?;
        let v = update_v_tilde(&self.resid, tau, XI_SQUARED, rng)?;
        let hyper = self.spec.hyper;
        let t = update_tau(&self.resid, &v, XI_SQUARED, hyper.e, hyper.f, rng)?;
        state.v_tilde = Some(v);
        state.tau = Some(t.value);
        Ok(())
    }

    /// σ² block; a configuration error under the Laplace likelihood.
    pub fn update_sigma2(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        if self.spec.likelihood != Likelihood::Gaussian || state.sigma2.is_none() {
            return Err(Error::Config("σ² is only updated under the Gaussian likelihood".into()));
        }
        let hyper = self.spec.hyper;
        let d = update_sigma2(&self.resid, &state.beta, state.lambda2, &state.s2, hyper.e, hyper.f, rng)?;
        state.sigma2 = Some(d.value);
        Ok(())
    }

    fn update_local_scales(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        let likelihood = self.spec.likelihood;
        for j in 0..state.beta.len() {
            state.s2[j] = update_s2_j(state.beta[j], state.lambda2, state.nu[j], likelihood, state.sigma2, rng)?.value;
        }
        for j in 0..state.beta.len() {
            let recip = match &state.phi2 {
                Some(phi2) => 1.0 / phi2[j],
                None => 1.0,
            };
            state.nu[j] = update_nu_j(state.s2[j], recip, rng)?.value;
        }
        Ok(())
    }

    /// φ², ζ block; a configuration error unless the prior is horseshoe+.
    pub fn update_plus_block(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        let (Some(phi2), Some(zeta)) = (state.phi2.as_mut(), state.zeta.as_mut()) else {
            return Err(Error::Config("φ²/ζ are only updated under the horseshoe+ prior".into()));
        };
        if self.spec.prior != Prior::HorseshoePlus {
            return Err(Error::Config("φ²/ζ are only updated under the horseshoe+ prior".into()));
        }
        for j in 0..phi2.len() {
            phi2[j] = update_phi2_j(state.nu[j], zeta[j], rng)?.value;
        }
        for j in 0..zeta.len() {
            zeta[j] = update_zeta_j(phi2[j], rng)?.value;
        }
        Ok(())
    }

    fn update_global_scale(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        state.lambda2 =
            update_lambda2(&state.beta, &state.s2, state.xi1, self.spec.likelihood, state.sigma2, rng)?.value;
        state.xi1 = update_xi1(state.lambda2, rng)?.value;
        Ok(())
    }

    /// b² block; a configuration error unless the prior is regularized.
    pub fn update_b2(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        if self.spec.prior != Prior::RegularizedHorseshoe || state.b2.is_none() {
            return Err(Error::Config("b² is only updated under the regularized horseshoe prior".into()));
        }
        let hyper = self.spec.hyper;
        state.b2 = Some(update_b2(&state.beta, hyper.c, hyper.d, rng)?.value);
        Ok(())
    }

    /// Runs `n_iter` sweeps from `state`, keeping every `thin`-th
    /// post-burn-in state.
    pub fn run(&mut self, state: &mut ChainState, rng: &mut RngStream) -> Result<PosteriorDraws> {
        let spec = &self.spec;
        let (burn_in, thin, n_iter) = (spec.burn_in, spec.thin, spec.n_iter);
        let mut draws = PosteriorDraws::with_capacity(self.data.p(), spec.retained());
        for it in 0..n_iter {
            self.sweep(state, rng, it)?;
            if it >= burn_in && (it - burn_in + 1) % thin == 0 {
                draws.push(state);
            }
        }
        Ok(draws)
    }
}

/// Runs one chain on stream 0 of `spec.seed` from the neutral state.
pub fn run_chain(spec: &SamplerSpec, data: &Dataset) -> Result<PosteriorDraws> {
    run_chain_on_stream(spec, data, RngStream::new(spec.seed, 0))
}

pub fn run_chain_on_stream(spec: &SamplerSpec, data: &Dataset, mut rng: RngStream) -> Result<PosteriorDraws> {
    let mut state = crate::model::init_state(spec, data)?;
    Sampler::new(spec, data)?.run(&mut state, &mut rng)
}
