//! Simulation library for Boltzmann–Gibbs measures built from log-correlated
//! Gaussian fields on `[-1,1]^d` (`d` = 1 or 2) with short-distance cutoff
//! `eps`, and for the multifractal scaling exponents of their moment ratios.
//!
//! The covariance kernel is
//!
//! ```text
//! K_eps(x, y) = -log(|x - y| + eps) + g_const
//! ```
//!
//! sampled exactly on a grid through a dense Cholesky factorization. On top of
//! the sampler the crate provides:
//!
//! * closed-form quenched/annealed/participation exponents with the
//!   three-regime classification (high-temperature, intermediate, frozen)
//!   — [`theory`];
//! * Gibbs/GMC functionals of a field sample, all in natural-log scale —
//!   [`measure`];
//! * Monte Carlo estimators over a ladder of cutoffs, including an
//!   exponential-tilting importance sampler whose weights are exact discrete
//!   Cameron–Martin identities, plus lemma-level diagnostics — [`estimators`]
//!   and [`probes`];
//! * a property-test harness for the Kahane convexity and Slepian comparison
//!   inequalities with a tensor Gauss–Hermite oracle — [`toolbox`] and
//!   [`quadrature`];
//! * config parsing, CSV/JSON emission and run manifests for the CLI —
//!   [`config`] and [`report`].
//!
//! Everything downstream of a master seed is bit-deterministic: each replica
//! draws from its own counter-derived ChaCha stream and reductions run in
//! fixed replica order, so results do not depend on scheduling.

pub mod config;
pub mod error;
pub mod estimators;
pub mod field;
pub mod fit;
pub mod measure;
pub mod probes;
pub mod quadrature;
pub mod report;
pub mod seeds;
pub mod stats;
pub mod theory;
pub mod toolbox;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
