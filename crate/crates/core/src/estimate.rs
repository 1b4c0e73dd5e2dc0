//! Plug-in estimation of the FDP variance from observed statistics and a
//! known correlation matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::CorrelationMatrix;
use crate::pi0::{estimate_pi0, pvalues, Pi0Estimate, Pi0Method};
use crate::theory::{fdp_variance, fdp_variance_cached, NullCovCache, TestProblem, VarianceDecomposition};

/// Everything produced along the way to the plug-in variance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PluginResult {
    pub pi0: Pi0Estimate,
    pub p1_hat: usize,
    /// Estimated alternatives, ascending.
    pub h1_indices: Vec<usize>,
    pub mu_hat: Vec<f64>,
    pub decomposition: VarianceDecomposition,
}

/// p̂1 = p(1 - π̂0) rounded half away from zero, within [0, p].
pub fn p1_from_pi0(p: usize, pi0: f64) -> usize {
    let v = libm::round(p as f64 * (1.0 - pi0));
    if v <= 0.0 {
        0
    } else {
        (v as usize).min(p)
    }
}

/// Marks the p̂1 largest |Z_j| as alternatives (ties go to the smaller
/// index) and sets μ̂_j = Z_j there, 0 elsewhere.
pub fn estimate_mu(z: &[f64], pi0: f64) -> (Vec<f64>, Vec<usize>) {
    let p = z.len();
    let k = p1_from_pi0(p, pi0);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| libm::fabs(z[b]).total_cmp(&libm::fabs(z[a])).then(a.cmp(&b)));
    let mut h1: Vec<usize> = order[..k].to_vec();
    h1.sort_unstable();
    let mut mu = vec![0.0; p];
    for &j in &h1 {
        mu[j] = z[j];
    }
    (mu, h1)
}

/// p-values → π̂0 → (μ̂, Ĥ1) → V1 + V2 at the estimated parameters.
pub fn plugin_variance(
    z: &[f64],
    sigma: &CorrelationMatrix,
    t: f64,
    method: &Pi0Method,
    seed: u64,
    skip_eps: f64,
) -> Result<PluginResult> {
    plugin_with(z, sigma, t, method, seed, |problem| fdp_variance(problem, sigma, skip_eps))
}

/// [`plugin_variance`] reusing null/null covariances built once for (Σ, t).
/// Repeated calls on the same Σ then cost O(p·p̂1) bivariate evaluations.
pub fn plugin_variance_cached(
    z: &[f64],
    sigma: &CorrelationMatrix,
    t: f64,
    method: &Pi0Method,
    seed: u64,
    cache: &NullCovCache,
) -> Result<PluginResult> {
    plugin_with(z, sigma, t, method, seed, |problem| fdp_variance_cached(problem, sigma, cache))
}

fn plugin_with(
    z: &[f64],
    sigma: &CorrelationMatrix,
    t: f64,
    method: &Pi0Method,
    seed: u64,
    variance: impl FnOnce(&TestProblem) -> Result<VarianceDecomposition>,
) -> Result<PluginResult> {
    if z.len() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: z.len() });
    }
    let pv = pvalues(z)?;
    let pi0 = estimate_pi0(&pv, method, seed)?;
    let (mu_hat, h1_indices) = estimate_mu(z, pi0.value);
    let mut null_mask = vec![true; z.len()];
    for &j in &h1_indices {
        null_mask[j] = false;
    }
    // A selected statistic of exactly zero still counts as an alternative.
    let problem = TestProblem::new(mu_hat.clone(), null_mask, t)?;
    let decomposition = variance(&problem)?;
    Ok(PluginResult { pi0, p1_hat: h1_indices.len(), h1_indices, mu_hat, decomposition })
}
