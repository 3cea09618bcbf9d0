//! Gibbs samplers for high-dimensional linear regression under the horseshoe
//! family of shrinkage priors, with either a Laplace (median-regression)
//! working likelihood or a Gaussian likelihood.
//!
//! The six supported methods are the cross product of
//! [`Likelihood`](model::Likelihood) and [`Prior`](model::Prior):
//!
//! | method | likelihood | prior                 |
//! |--------|------------|-----------------------|
//! | RBHS   | Laplace    | horseshoe             |
//! | RBHS+  | Laplace    | horseshoe+            |
//! | RBRHS  | Laplace    | regularized horseshoe |
//! | BHS    | Gaussian   | horseshoe             |
//! | BHS+   | Gaussian   | horseshoe+            |
//! | BRHS   | Gaussian   | regularized horseshoe |
//!
//! The Laplace likelihood is handled through its exponential-normal scale
//! mixture, so every full conditional is a standard distribution.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod gibbs;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod shrinkage;
pub mod simulate;

pub use error::{Error, Result};
pub use gibbs::{run_chain, run_chain_on_stream, Sampler};
pub use model::{ChainState, Dataset, Hyper, Likelihood, Method, PosteriorDraws, Prior, SamplerSpec};
