//! Shrinkage-factor analytics for the robust horseshoe family.
//!
//! Conditional on the scale parameters, the posterior mean of β_j is
//! `(1 - κ_j) β̂_j`, where `κ_j = 1 / (1 + λ² s_j² a_j)` and `a_j` is the
//! data precision of coordinate j. Under the horseshoe and horseshoe+
//! priors κ_j has a closed-form density given `k_j = λ √a_j`.

use std::f64::consts::PI;

use crate::error::{check_len, Error, Result};

/// `a_j = Σᵢ x_{ij}² τ / (ξ² ṽᵢ)`.
pub fn compute_a_j(x_col: &[f64], tau: f64, v_tilde: &[f64], xi2: f64) -> Result<f64> {
    check_len(x_col.len(), v_tilde.len())?;
    if !(tau > 0.0) {
        return Err(Error::param("tau", tau));
    }
    Ok(x_col.iter().zip(v_tilde).map(|(x, v)| x * x * tau / (xi2 * v)).sum())
}

/// `κ = 1 / (1 + λ² s² a)`.
pub fn kappa(lambda2: f64, s2_j: f64, a_j: f64) -> f64 {
    1.0 / (1.0 + lambda2 * s2_j * a_j)
}

/// Per-coordinate shrinkage quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageContext {
    pub a_j: f64,
    pub lambda2: f64,
    pub s2_j: f64,
}

impl ShrinkageContext {
    pub fn new(a_j: f64, lambda2: f64, s2_j: f64) -> Result<Self> {
        if !(a_j >= 0.0) {
            return Err(Error::param("a_j", a_j));
        }
        if !(lambda2 > 0.0) {
            return Err(Error::param("lambda2", lambda2));
        }
        if !(s2_j > 0.0) {
            return Err(Error::param("s2_j", s2_j));
        }
        Ok(ShrinkageContext { a_j, lambda2, s2_j })
    }

    pub fn kappa(&self) -> f64 {
        kappa(self.lambda2, self.s2_j, self.a_j)
    }

    /// `k_j = λ √a_j`.
    pub fn k(&self) -> f64 {
        (self.lambda2 * self.a_j).sqrt()
    }

    /// Weighted least-squares estimate `β̂_j = Σ x r w / a_j` from a
    /// partial residual and observation precisions.
    pub fn beta_hat(&self, x_col: &[f64], partial_resid: &[f64], precision: &[f64]) -> Result<f64> {
        check_len(x_col.len(), partial_resid.len())?;
        check_len(x_col.len(), precision.len())?;
        if self.a_j == 0.0 {
            return Err(Error::Domain("β̂ is undefined when a_j = 0".into()));
        }
        let xr: f64 = x_col.iter().zip(partial_resid).zip(precision).map(|((x, r), q)| x * r * q).sum();
        Ok(xr / self.a_j)
    }

    /// Conditional posterior mean `(1 - κ) β̂`.
    pub fn posterior_mean(&self, beta_hat: f64) -> f64 {
        (1.0 - self.kappa()) * beta_hat
    }
}

fn check_open_unit(kappa: f64, k: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain(format!("κ must lie in (0, 1), got {kappa}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::param("k_j", k));
    }
    Ok(())
}

/// Density of κ_j under the horseshoe prior.
pub fn kappa_density_hs(kappa: f64, k: f64) -> Result<f64> {
    check_open_unit(kappa, k)?;
    Ok(k / (PI * ((k * k - 1.0) * kappa + 1.0) * (kappa * (1.0 - kappa)).sqrt()))
}

/// Density of κ_j under the horseshoe+ prior.
///
/// The closed form `(2/π²) ln√((1-κ)/(κk²)) / (1 - κ(1+k²)) · k/√(κ(1-κ))`
/// has a removable 0/0 at `κ = 1/(1+k²)`. Writing `t = (1-κ(1+k²))/(κk²)`
/// gives `ln√(1+t) / (1-κ(1+k²)) = [ln(1+t)/t] / (2κk²)`, and `ln_1p(t)/t`
/// is evaluated stably through the singular point.
pub fn kappa_density_hsplus(kappa: f64, k: f64) -> Result<f64> {
    check_open_unit(kappa, k)?;
    let k2 = k * k;
    let t = (1.0 - kappa * (1.0 + k2)) / (kappa * k2);
    let ratio = if t.abs() < 1e-8 {
        1.0 - t / 2.0 + t * t / 3.0
    } else if t.abs() < 0.5 {
        t.ln_1p() / t
    } else {
        // 1 + t cancels as κ → 1; take the logarithm of the factors instead.
        ((1.0 - kappa).ln() - (kappa * k2).ln()) / t
    };
    Ok(2.0 / (PI * PI) * ratio / (2.0 * kappa * k2) * k / (kappa * (1.0 - kappa)).sqrt())
}

/// Which side of the cutoff counts as selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionDirection {
    /// Select when the weight `1 - κ_j` exceeds the cutoff.
    #[default]
    Weight,
    /// Select when `κ_j` itself exceeds the cutoff.
    Literal,
}

/// Strict-inequality selection from shrinkage factors.
pub fn select_by_shrinkage_weight(kappas: &[f64], cutoff: f64, direction: SelectionDirection) -> Result<Vec<bool>> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::param("cutoff", cutoff));
    }
    Ok(kappas
        .iter()
        .map(|&k| match direction {
            SelectionDirection::Weight => 1.0 - k > cutoff,
            SelectionDirection::Literal => k > cutoff,
        })
        .collect())
}

/// Effective local scale of the regularized horseshoe,
/// `s̃² = b² s² / (b² + λ² s²)`.
pub fn regularized_local_scale(lambda2: f64, s2_j: f64, b2: f64) -> f64 {
    b2 * s2_j / (b2 + lambda2 * s2_j)
}
