//! The Geweke harness must have power: a sampler run with hyperparameters
//! that disagree with the prior draws has to be flagged.

mod support;

use robust_horseshoe::{Hyper, Method};
use support::geweke;

fn flagged(method: Method, hyper: Hyper) -> f64 {
    geweke::run_with(method, 20_000, 7, hyper).worst().z.abs()
}

#[test]
fn correct_hyperparameters_pass() {
    for m in [Method::Rbhs, Method::BhsPlus] {
        let z = geweke::run(m, 20_000, 9).worst().z.abs();
        assert!(z < 4.0, "{m}: |z| = {z}");
    }
}

#[test]
fn mismatched_noise_prior_is_detected() {
    let h = geweke::hyper();
    assert!(flagged(Method::Rbrhs, Hyper { e: h.e + 2.0, ..h }) > 6.0);
    assert!(flagged(Method::Bhs, Hyper { f: h.f + 2.0, ..h }) > 6.0);
}

#[test]
fn mismatched_intercept_and_slab_priors_are_detected() {
    let h = geweke::hyper();
    assert!(flagged(Method::Rbhs, Hyper { sigma2_beta0: 3.0, ..h }) > 6.0);
    assert!(flagged(Method::Brhs, Hyper { c: h.c + 4.0, ..h }) > 6.0);
}
