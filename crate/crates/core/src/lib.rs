//! Asymptotic mean and variance of the false discovery proportion (FDP) for
//! two-sided z-tests whose statistics are weakly dependent Gaussians.
//!
//! The crate is `no_std` with `alloc`. Enable `parallel` to spread the
//! O(p²) pair sums and Monte Carlo replicates over a rayon pool; results are
//! bit-identical to the serial path because every reduction runs in a fixed
//! tree order.
//!
//! Layout:
//!
//! * [`gauss`]: univariate and bivariate normal numerics.
//! * [`matrix`]: correlation matrices, Cholesky, symmetric eigensolvers and the
//!   principal factor reduction.
//! * [`theory`]: rejection probabilities, the asymptotic limit, the V1 + V2
//!   variance decomposition, test covariances and the sign predicates.
//! * [`pi0`]: null-proportion estimators.
//! * [`estimate`]: plug-in variance estimation from observed statistics.
//! * [`simulate`]: simulation models and the Monte Carlo harness.
#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// Coefficient tables carry full reference precision, `!(x > y)` deliberately
// rejects NaN, and index loops mirror the matrix algebra.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
pub mod estimate;
pub mod gauss;
pub mod matrix;
pub mod num;
pub mod pi0;
pub mod rng;
pub mod simulate;
pub mod theory;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use gauss::BvnParams;
pub use matrix::{CholeskyFactor, CorrelationMatrix, EigenSystem, Matrix, PfaPolicy};
pub use pi0::{PValueVector, Pi0Estimate, Pi0Method};
pub use simulate::{Model, ModelSpec};
pub use theory::{TestProblem, VarianceDecomposition};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
