//! Asymptotic FDP theory for two-sided z-tests at a common threshold.
//!
//! Test `j` rejects when |Z_j| > c with c = |z_{t/2}|. Everything here is
//! expressed through the rejection indicators t_j = 1(|Z_j| > c): their
//! means ξ_j, their pairwise covariances, and the linear expansion
//! m(V̄, R̄) of the FDP whose variance splits into an independence part V1 and
//! a dependence part V2.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gauss::{bvn_rect_prob, norm_cdf, norm_pdf, norm_quantile, BvnParams};
use crate::matrix::{weak_dep_metric, CorrelationMatrix, Matrix};
use crate::num::{map_indexed, pairwise_sum, pairwise_sum_lanes};

/// Pairs with |σ_ij| at or below this contribute nothing to V2 by default.
pub const DEFAULT_SKIP_EPS: f64 = 1e-12;

/// Largest threshold for which a null/alternative covariance is guaranteed
/// negative: 2(1 - Φ(√(log(3)/2))).
pub const NEGATIVE_COV_T_MAX: f64 = 0.458_601_341_828_025_2;

/// √(log(3)/2), the smallest admissible |z_{t/2}| for variance inflation.
pub fn inflation_z_floor() -> f64 {
    libm::sqrt(libm::log(3.0) / 2.0)
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("threshold t must lie in (0, 1)"))
    }
}

/// Signed lower quantile z_{t/2} (negative for t < 1).
pub fn z_half(t: f64) -> Result<f64> {
    check_t(t)?;
    norm_quantile(t / 2.0)
}

/// Means, null set and threshold of a multiple testing problem.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TestProblem {
    mu: Vec<f64>,
    null_mask: Vec<bool>,
    t: f64,
    #[cfg_attr(feature = "serde", serde(skip))]
    z: f64,
}

impl TestProblem {
    /// `null_mask[j]` is true for true nulls, whose mean must be exactly zero.
    pub fn new(mu: Vec<f64>, null_mask: Vec<bool>, t: f64) -> Result<Self> {
        if mu.len() != null_mask.len() {
            return Err(Error::DimensionMismatch { expected: mu.len(), found: null_mask.len() });
        }
        if mu.is_empty() {
            return Err(Error::Domain("problem needs at least one test"));
        }
        let z = z_half(t)?;
        for (m, &null) in mu.iter().zip(&null_mask) {
            if !m.is_finite() {
                return Err(Error::Domain("means must be finite"));
            }
            if null && *m != 0.0 {
                return Err(Error::Domain("null hypotheses must have zero mean"));
            }
        }
        Ok(Self { mu, null_mask, t, z })
    }

    /// Nulls are exactly the indices with zero mean.
    pub fn from_means(mu: Vec<f64>, t: f64) -> Result<Self> {
        let mask = mu.iter().map(|&m| m == 0.0).collect();
        Self::new(mu, mask, t)
    }

    /// `p` tests with a common mean `mu_alt` on `alternatives`.
    pub fn with_signals(p: usize, alternatives: &[usize], mu_alt: f64, t: f64) -> Result<Self> {
        let mut mu = alloc::vec![0.0; p];
        let mut mask = alloc::vec![true; p];
        for &j in alternatives {
            if j >= p {
                return Err(Error::DimensionMismatch { expected: p, found: j + 1 });
            }
            mu[j] = mu_alt;
            mask[j] = false;
        }
        Self::new(mu, mask, t)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn null_mask(&self) -> &[bool] {
        &self.null_mask
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Signed quantile z_{t/2}.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Rejection cutoff c = |z_{t/2}|.
    pub fn c(&self) -> f64 {
        -self.z
    }

    pub fn p(&self) -> usize {
        self.mu.len()
    }

    pub fn p0(&self) -> usize {
        self.null_mask.iter().filter(|&&n| n).count()
    }

    pub fn p1(&self) -> usize {
        self.p() - self.p0()
    }

    /// Mean rejection probability over the alternatives; 0 when there are none.
    pub fn xi_bar(&self) -> f64 {
        let xs: Vec<f64> = self.alt_iter().map(|m| xi_at(m, self.c())).collect();
        if xs.is_empty() {
            0.0
        } else {
            pairwise_sum(&xs) / xs.len() as f64
        }
    }

    fn alt_iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.mu.iter().zip(&self.null_mask).filter(|(_, &n)| !n).map(|(&m, _)| m)
    }

    /// Expected number of rejections p0·t + p1·ξ̄.
    pub fn expected_rejections(&self) -> f64 {
        self.p0() as f64 * self.t + self.p1() as f64 * self.xi_bar()
    }
}

#[inline]
fn xi_at(mu: f64, c: f64) -> f64 {
    norm_cdf(-c + mu) + norm_cdf(-c - mu)
}

/// P(|Z| ≤ c) for Z ~ N(mu, 1), i.e. 1 - ξ without cancellation.
#[inline]
fn accept_prob(mu: f64, c: f64) -> f64 {
    let lo = -c - mu;
    let hi = c - mu;
    if lo > 0.0 {
        norm_cdf(-lo) - norm_cdf(-hi)
    } else {
        norm_cdf(hi) - norm_cdf(lo)
    }
}

/// Rejection probability P(|Z| > |z_{t/2}|) for Z ~ N(mu, 1). Returns NaN
/// when t is outside (0, 1).
pub fn xi(mu: f64, t: f64) -> f64 {
    match z_half(t) {
        Ok(z) => xi_at(mu, -z),
        Err(_) => f64::NAN,
    }
}

/// Limit of the FDP: p0·t / (p0·t + p1·ξ̄).
pub fn fdp_limit(problem: &TestProblem) -> f64 {
    let ev = problem.p0() as f64 * problem.t;
    ev / problem.expected_rejections()
}

/// Returns (E(V̄)/E(R̄), m) where
/// m = V̄/E(R̄) - E(V̄)/E(R̄)² · R̄ and bars denote division by p.
pub fn expansion_terms(v_bar: f64, r_bar: f64, problem: &TestProblem) -> (f64, f64) {
    let p = problem.p() as f64;
    let ev = problem.p0() as f64 * problem.t / p;
    let er = problem.expected_rejections() / p;
    (ev / er, v_bar / er - ev / (er * er) * r_bar)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_nan() || libm::fabs(sigma) > 1.0 {
        Err(Error::Domain("correlation must lie in [-1, 1]"))
    } else {
        Ok(())
    }
}

#[inline]
fn cov_exact_c(mu_i: f64, mu_j: f64, sigma: f64, c: f64, acc_i: f64, acc_j: f64) -> Result<f64> {
    // Cov(t_i, t_j) = Cov(1 - t_i, 1 - t_j) = P(both accept) - P(accept_i)P(accept_j).
    // Uncorrelated Gaussians are independent, so the covariance is exactly zero.
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let both = bvn_rect_prob(-c, c, -c, c, &BvnParams { mu1: mu_i, mu2: mu_j, rho: sigma })?;
    Ok(both - acc_i * acc_j)
}

/// Covariance of the rejection indicators of two tests with means mu_i,
/// mu_j and correlation sigma.
pub fn cov_tests_exact(mu_i: f64, mu_j: f64, sigma: f64, t: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let c = -z_half(t)?;
    cov_exact_c(mu_i, mu_j, sigma, c, accept_prob(mu_i, c), accept_prob(mu_j, c))
}

/// ∂Cov(t_i, t_j)/∂σ in closed form (four bivariate density corners).
pub fn cov_tests_deriv(mu_i: f64, mu_j: f64, sigma: f64, t: f64) -> Result<f64> {
    if sigma.is_nan() || libm::fabs(sigma) >= 1.0 {
        return Err(Error::Domain("derivative needs |correlation| < 1"));
    }
    let z = z_half(t)?;
    let one_m = 1.0 - sigma * sigma;
    let e = |a: f64, b: f64| libm::exp(-(a * a + b * b - 2.0 * sigma * a * b) / (2.0 * one_m));
    let (im, ip) = (mu_i + z, mu_i - z);
    let (jm, jp) = (mu_j + z, mu_j - z);
    let bracket = e(im, jm) + e(ip, jp) - e(im, jp) - e(ip, jm);
    Ok(bracket / (2.0 * PI * libm::sqrt(one_m)))
}

/// Probabilists' Hermite polynomial g_i(x) for i in 0..=8.
pub fn hermite_g(i: usize, x: f64) -> Result<f64> {
    let x2 = x * x;
    let v = match i {
        0 => 1.0,
        1 => x,
        2 => x2 - 1.0,
        3 => x * (x2 - 3.0),
        4 => (x2 - 6.0) * x2 + 3.0,
        5 => x * ((x2 - 10.0) * x2 + 15.0),
        6 => ((x2 - 15.0) * x2 + 45.0) * x2 - 15.0,
        7 => x * (((x2 - 21.0) * x2 + 105.0) * x2 - 105.0),
        8 => (((x2 - 28.0) * x2 + 210.0) * x2 - 420.0) * x2 + 105.0,
        _ => return Err(Error::Domain("Hermite index must lie in 0..=8")),
    };
    Ok(v)
}

/// Which rejection tail a coefficient refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// Quantile z_{t/2}.
    Lower,
    /// Quantile z_{1-t/2} = |z_{t/2}|.
    Upper,
}

/// Hermite coefficient of the one-sided tail indicator: Φ(q - μ) for i = 0,
/// otherwise -φ(q - μ)·g_{i-1}(q - μ), with q the tail quantile.
pub fn coeff_c(mu_a: f64, t: f64, i: usize, tail: Tail) -> Result<f64> {
    if i > 8 {
        return Err(Error::Domain("coefficient index must lie in 0..=8"));
    }
    let z = z_half(t)?;
    let q = match tail {
        Tail::Lower => z,
        Tail::Upper => -z,
    };
    Ok(coeff_at(mu_a, q, i))
}

fn coeff_at(mu_a: f64, q: f64, i: usize) -> f64 {
    let x = q - mu_a;
    if i == 0 {
        norm_cdf(x)
    } else {
        -norm_pdf(x) * hermite_g(i - 1, x).expect("index checked by caller")
    }
}

/// Third-order small-σ expansion of Cov(t_i, t_j):
/// Σ_{k=1..3} σ^k/k! · D_i(k)·D_j(k) with D_a(k) = C^a_{t/2}(k) - C^a_{1-t/2}(k).
///
/// For a zero mean the odd coefficients vanish, so a pair with a null
/// member is of order σ² and a null pair reduces to 2φ²(z)z²σ². The
/// neglected remainder is O(σ⁴).
pub fn cov_tests_approx(mu_i: f64, mu_j: f64, sigma: f64, t: f64) -> Result<f64> {
    if sigma.is_nan() || libm::fabs(sigma) >= 1.0 {
        return Err(Error::Domain("expansion needs |correlation| < 1"));
    }
    let z = z_half(t)?;
    let d = |mu: f64, k: usize| {
        if mu == 0.0 && k % 2 == 1 {
            0.0
        } else {
            coeff_at(mu, z, k) - coeff_at(mu, -z, k)
        }
    };
    let mut out = 0.0;
    let mut pow = 1.0;
    let mut fact = 1.0;
    for k in 1..=3 {
        pow *= sigma;
        fact *= k as f64;
        out += pow / fact * d(mu_i, k) * d(mu_j, k);
    }
    Ok(out)
}

/// Independence part of the FDP variance:
/// [p1²ξ̄²·p0·t(1-t) + p0²t²·p1·ξ̄(1-ξ̄)] / (p0·t + p1·ξ̄)⁴.
pub fn v1(problem: &TestProblem) -> f64 {
    let (p0, p1, t) = (problem.p0() as f64, problem.p1() as f64, problem.t);
    let xb = problem.xi_bar();
    let d = p0 * t + p1 * xb;
    let num = p1 * p1 * xb * xb * p0 * t * (1.0 - t) + p0 * p0 * t * t * p1 * xb * (1.0 - xb);
    num / (d * d * d * d)
}

/// Covariance sums over unordered pairs, split by hypothesis membership.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairSums {
    /// Σ_{i<j, i,j ∈ H0} Cov(t_i, t_j).
    pub null_null: f64,
    /// Σ_{i ∈ H0, j ∈ H1} Cov(t_i, t_j).
    pub null_alt: f64,
    /// Σ_{i<j, i,j ∈ H1} Cov(t_i, t_j).
    pub alt_alt: f64,
}

/// Output of [`v2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V2Result {
    pub v2: f64,
    pub pair_sums: PairSums,
    pub pairs_evaluated: u64,
    pub pairs_skipped: u64,
}

fn check_dims(problem: &TestProblem, sigma: &CorrelationMatrix) -> Result<()> {
    if sigma.dim() != problem.p() {
        return Err(Error::DimensionMismatch { expected: problem.p(), found: sigma.dim() });
    }
    Ok(())
}

/// Evaluates the exact pairwise covariance sums. Rows are processed in
/// parallel and reduced by pairwise summation in row order.
pub fn pair_sums(problem: &TestProblem, sigma: &CorrelationMatrix, skip_eps: f64) -> Result<(PairSums, u64, u64)> {
    check_dims(problem, sigma)?;
    if !(skip_eps >= 0.0) {
        return Err(Error::Domain("skip_eps must be non-negative"));
    }
    let p = problem.p();
    let c = problem.c();
    let mu = problem.mu();
    let null = problem.null_mask();
    let acc: Vec<f64> = mu.iter().map(|&m| accept_prob(m, c)).collect();
    let rows: Vec<Result<([f64; 3], u64)>> = map_indexed(p, |i| {
        let row = sigma.row(i);
        let mut terms: Vec<[f64; 3]> = Vec::with_capacity(p - i);
        let mut evaluated = 0u64;
        for j in (i + 1)..p {
            let s = row[j];
            if libm::fabs(s) <= skip_eps {
                continue;
            }
            evaluated += 1;
            let cov = cov_exact_c(mu[i], mu[j], s, c, acc[i], acc[j])?;
            let lane = match (null[i], null[j]) {
                (true, true) => 0,
                (false, false) => 2,
                _ => 1,
            };
            let mut term = [0.0; 3];
            term[lane] = cov;
            terms.push(term);
        }
        Ok((pairwise_sum_lanes(&terms), evaluated))
    });
    let mut partial = Vec::with_capacity(p);
    let mut evaluated = 0u64;
    for r in rows {
        let (s, n) = r?;
        partial.push(s);
        evaluated += n;
    }
    let [nn, na, aa] = pairwise_sum_lanes(&partial);
    let total = (p as u64) * (p as u64 - 1) / 2;
    Ok((PairSums { null_null: nn, null_alt: na, alt_alt: aa }, evaluated, total - evaluated))
}

fn v2_from_sums(problem: &TestProblem, s: &PairSums) -> f64 {
    let (p0, p1, t) = (problem.p0() as f64, problem.p1() as f64, problem.t);
    let xb = problem.xi_bar();
    let d = p0 * t + p1 * xb;
    let d4 = d * d * d * d;
    (2.0 * p1 * p1 * xb * xb * s.null_null - 2.0 * p0 * p1 * t * xb * s.null_alt + 2.0 * p0 * p0 * t * t * s.alt_alt)
        / d4
}

/// Dependence part of the FDP variance.
pub fn v2(problem: &TestProblem, sigma: &CorrelationMatrix, skip_eps: f64) -> Result<V2Result> {
    let (sums, pairs_evaluated, pairs_skipped) = pair_sums(problem, sigma, skip_eps)?;
    Ok(V2Result { v2: v2_from_sums(problem, &sums), pair_sums: sums, pairs_evaluated, pairs_skipped })
}

/// Exact variance of the linear expansion m(V̄, R̄) at finite p.
///
/// Equals V1 + V2 when |μ| is constant on the alternatives; in general the
/// alternative variances enter as Σ ξ_j(1 - ξ_j) rather than p1·ξ̄(1 - ξ̄).
pub fn var_m_exact(problem: &TestProblem, sums: &PairSums) -> f64 {
    let (p0, p1, t) = (problem.p0() as f64, problem.p1() as f64, problem.t);
    let xb = problem.xi_bar();
    let (ev, es) = (p0 * t, p1 * xb);
    let d = ev + es;
    let alt_var: Vec<f64> = problem.alt_iter().map(|m| xi_at(m, problem.c()) * accept_prob(m, problem.c())).collect();
    let var_v = p0 * t * (1.0 - t) + 2.0 * sums.null_null;
    let var_s = pairwise_sum(&alt_var) + 2.0 * sums.alt_alt;
    (es * es * var_v - 2.0 * ev * es * sums.null_alt + ev * ev * var_s) / (d * d * d * d)
}

/// Asymptotic FDP variance split into its independence and dependence parts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarianceDecomposition {
    pub v1: f64,
    pub v2: f64,
    /// v1 + v2.
    pub total: f64,
    /// FDP limit p0·t / (p0·t + p1·ξ̄).
    pub asym_mean: f64,
    pub pair_sums: PairSums,
    pub xi_bar: f64,
    pub pairs_evaluated: u64,
    pub pairs_skipped: u64,
    /// Finite-p variance of the linear expansion built from the same sums.
    pub var_m: f64,
}

impl VarianceDecomposition {
    pub fn sd(&self) -> f64 {
        libm::sqrt(self.total)
    }
}

pub fn fdp_variance(problem: &TestProblem, sigma: &CorrelationMatrix, skip_eps: f64) -> Result<VarianceDecomposition> {
    let r = v2(problem, sigma, skip_eps)?;
    let v1 = v1(problem);
    Ok(VarianceDecomposition {
        v1,
        v2: r.v2,
        total: v1 + r.v2,
        asym_mean: fdp_limit(problem),
        pair_sums: r.pair_sums,
        xi_bar: problem.xi_bar(),
        pairs_evaluated: r.pairs_evaluated,
        pairs_skipped: r.pairs_skipped,
        var_m: var_m_exact(problem, &r.pair_sums),
    })
}

/// V1 alone, for independent tests; no covariance matrix needed.
pub fn fdp_variance_independent(problem: &TestProblem) -> VarianceDecomposition {
    let v1 = v1(problem);
    let sums = PairSums::default();
    let p = problem.p() as u64;
    VarianceDecomposition {
        v1,
        v2: 0.0,
        total: v1,
        asym_mean: fdp_limit(problem),
        pair_sums: sums,
        xi_bar: problem.xi_bar(),
        pairs_evaluated: 0,
        pairs_skipped: p * (p - 1) / 2,
        var_m: var_m_exact(problem, &sums),
    }
}

/// Null/null covariances Cov(t_i, t_j) at μ_i = μ_j = 0 for every pair of
/// a fixed Σ and t. With these cached, a problem with p1 alternatives needs
/// only the p1·p pairs that touch an alternative.
#[derive(Debug, Clone)]
pub struct NullCovCache {
    t: f64,
    skip_eps: f64,
    cov: Matrix,
    row_sums: Vec<f64>,
    total: f64,
    evaluated: u64,
}

impl NullCovCache {
    pub fn new(sigma: &CorrelationMatrix, t: f64, skip_eps: f64) -> Result<Self> {
        if !(skip_eps >= 0.0) {
            return Err(Error::Domain("skip_eps must be non-negative"));
        }
        let c = -z_half(t)?;
        let p = sigma.dim();
        let acc0 = accept_prob(0.0, c);
        let rows: Vec<Result<(Vec<f64>, u64)>> = map_indexed(p, |i| {
            let row = sigma.row(i);
            let mut out = alloc::vec![0.0; p - i - 1];
            let mut n = 0u64;
            for (o, &s) in out.iter_mut().zip(&row[i + 1..]) {
                if libm::fabs(s) > skip_eps {
                    *o = cov_exact_c(0.0, 0.0, s, c, acc0, acc0)?;
                    n += 1;
                }
            }
            Ok((out, n))
        });
        let mut cov = Matrix::zeros(p, p);
        let mut evaluated = 0;
        for (i, r) in rows.into_iter().enumerate() {
            let (vals, n) = r?;
            evaluated += n;
            for (off, v) in vals.into_iter().enumerate() {
                let j = i + 1 + off;
                cov.set(i, j, v);
                cov.set(j, i, v);
            }
        }
        let row_sums: Vec<f64> = (0..p).map(|i| pairwise_sum(cov.row(i))).collect();
        // Each unordered pair appears in two rows.
        let total = 0.5 * pairwise_sum(&row_sums);
        Ok(Self { t, skip_eps, cov, row_sums, total, evaluated })
    }

    pub fn dim(&self) -> usize {
        self.row_sums.len()
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Same result as [`fdp_variance`] (to rounding) using a [`NullCovCache`]
/// built from the same Σ, t and skip_eps.
pub fn fdp_variance_cached(
    problem: &TestProblem,
    sigma: &CorrelationMatrix,
    cache: &NullCovCache,
) -> Result<VarianceDecomposition> {
    check_dims(problem, sigma)?;
    if cache.dim() != problem.p() || cache.t != problem.t {
        return Err(Error::Domain("cache was built for a different dimension or threshold"));
    }
    let p = problem.p();
    let c = problem.c();
    let mu = problem.mu();
    let null = problem.null_mask();
    let alts: Vec<usize> = (0..p).filter(|&j| !null[j]).collect();
    let rows: Vec<Result<[f64; 4]>> = map_indexed(alts.len(), |a| {
        let i = alts[a];
        let row = sigma.row(i);
        let acc_i = accept_prob(mu[i], c);
        let mut na = Vec::new();
        let mut aa = Vec::new();
        let mut cached_aa = Vec::new();
        for j in 0..p {
            if j == i || (!null[j] && j < i) {
                continue;
            }
            let s = row[j];
            if libm::fabs(s) <= cache.skip_eps {
                continue;
            }
            let cov = cov_exact_c(mu[i], mu[j], s, c, acc_i, accept_prob(mu[j], c))?;
            if null[j] {
                na.push(cov);
            } else {
                aa.push(cov);
                cached_aa.push(cache.cov.get(i, j));
            }
        }
        Ok([pairwise_sum(&na), pairwise_sum(&aa), cache.row_sums[i], pairwise_sum(&cached_aa)])
    });
    let mut partial = Vec::with_capacity(rows.len());
    for r in rows {
        partial.push(r?);
    }
    let [na, aa, touched_rows, touched_both] = pairwise_sum_lanes(&partial);
    // Null pairs are all cached pairs minus those touching an alternative.
    let nn = cache.total - (touched_rows - touched_both);
    let sums = PairSums { null_null: nn, null_alt: na, alt_alt: aa };
    let v1 = v1(problem);
    let v2 = v2_from_sums(problem, &sums);
    let total_pairs = (p as u64) * (p as u64 - 1) / 2;
    Ok(VarianceDecomposition {
        v1,
        v2,
        total: v1 + v2,
        asym_mean: fdp_limit(problem),
        pair_sums: sums,
        xi_bar: problem.xi_bar(),
        pairs_evaluated: cache.evaluated,
        pairs_skipped: total_pairs - cache.evaluated,
        var_m: var_m_exact(problem, &sums),
    })
}

/// Root and supremum of H(μ) = φ(c+μ)(c+μ) + φ(c-μ)(c-μ).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdConstants {
    pub t: f64,
    pub z_abs: f64,
    /// Unique root of H on (c, c + 1).
    pub mu_t: f64,
    /// sup of H over (-μ_t, μ_t).
    pub c_t_max: f64,
}

/// H(μ) at cutoff c.
pub fn h_fn(mu: f64, c: f64) -> f64 {
    let (a, b) = (c + mu, c - mu);
    norm_pdf(a) * a + norm_pdf(b) * b
}

const THRESHOLD_GRID: usize = 4097;
const THRESHOLD_TOL: f64 = 1e-10;

pub fn threshold_constants(t: f64) -> Result<ThresholdConstants> {
    let c = -z_half(t)?;
    let (mut lo, mut hi) = (c, c + 1.0);
    let (flo, fhi) = (h_fn(lo, c), h_fn(hi, c));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::RootNotBracketed);
    }
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if h_fn(mid, c) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu_t = 0.5 * (lo + hi);

    // H is even, so searching [0, μ_t] covers (-μ_t, μ_t).
    let step = mu_t / (THRESHOLD_GRID - 1) as f64;
    let mut best = 0;
    let mut best_val = h_fn(0.0, c);
    for k in 1..THRESHOLD_GRID {
        let v = h_fn(k as f64 * step, c);
        if v > best_val {
            best = k;
            best_val = v;
        }
    }
    let mut a = best.saturating_sub(1) as f64 * step;
    let mut b = ((best + 1).min(THRESHOLD_GRID - 1)) as f64 * step;
    let g = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (h_fn(x1, c), h_fn(x2, c));
    while b - a > THRESHOLD_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = h_fn(x2, c);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = h_fn(x1, c);
        }
    }
    let c_t_max = best_val.max(h_fn(0.5 * (a + b), c));
    Ok(ThresholdConstants { t, z_abs: c, mu_t, c_t_max })
}

/// Finite-p diagnostics for the three dependence conditions under which
/// the FDP variance expansion holds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    /// Σ_{i≠j ∈ H0} σ_ij².
    pub cond1_lhs: f64,
    /// C_t^max/(φ(z)|z|) · Σ_{i∈H1, |μ_i|≤μ_t, j∈H0} σ_ij².
    pub cond1_rhs: f64,
    pub cond1_holds: bool,
    /// Σ_{i≠j ∈ H1} σ_ij² / (Σ_{i≠j ∈ H0} σ_ij² + p). Compare with a
    /// user-chosen constant.
    pub cond2_ratio: f64,
    /// Σ_{i≠j} σ_ij⁴ / (Σ_{i≠j ∈ H0} σ_ij² + p0).
    pub cond3_ratio: f64,
    pub weak_dep: f64,
    pub constants: ThresholdConstants,
}

pub fn check_conditions(problem: &TestProblem, sigma: &CorrelationMatrix) -> Result<ConditionReport> {
    check_dims(problem, sigma)?;
    let k = threshold_constants(problem.t)?;
    let p = problem.p();
    let mu = problem.mu();
    let null = problem.null_mask();
    let rows: Vec<[f64; 4]> = map_indexed(p, |i| {
        let row = sigma.row(i);
        let mut nn = Vec::new();
        let mut cross = Vec::new();
        let mut aa = Vec::new();
        let mut fourth = Vec::with_capacity(p);
        let low_signal = !null[i] && libm::fabs(mu[i]) <= k.mu_t;
        for j in 0..p {
            if j == i {
                continue;
            }
            let s2 = row[j] * row[j];
            fourth.push(s2 * s2);
            match (null[i], null[j]) {
                (true, true) => nn.push(s2),
                (false, false) => aa.push(s2),
                (false, true) if low_signal => cross.push(s2),
                _ => {}
            }
        }
        [pairwise_sum(&nn), pairwise_sum(&cross), pairwise_sum(&aa), pairwise_sum(&fourth)]
    });
    let [nn, cross, aa, fourth] = pairwise_sum_lanes(&rows);
    let factor = k.c_t_max / (norm_pdf(k.z_abs) * k.z_abs);
    let rhs = factor * cross;
    Ok(ConditionReport {
        cond1_lhs: nn,
        cond1_rhs: rhs,
        cond1_holds: nn >= rhs,
        cond2_ratio: aa / (nn + p as f64),
        cond3_ratio: fourth / (nn + problem.p0() as f64),
        weak_dep: weak_dep_metric(sigma),
        constants: k,
    })
}

/// Predicted sign of Cov(t_i, t_j).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SignPrediction {
    Positive,
    Negative,
    Indeterminate,
}

/// Hypothesis membership of a pair, read off the means (zero ⇔ null).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PairCase {
    BothNull,
    Mixed,
    BothAlternative,
}

impl PairCase {
    pub fn of(mu_i: f64, mu_j: f64) -> Self {
        match (mu_i == 0.0, mu_j == 0.0) {
            (true, true) => PairCase::BothNull,
            (false, false) => PairCase::BothAlternative,
            _ => PairCase::Mixed,
        }
    }
}

/// How the quantile enters the alternative/alternative correlation bound
/// |σ| ≤ |μ|_min / (|μ|_max + z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundInterpretation {
    /// z = z_{t/2} < 0. A non-positive denominator leaves σ unrestricted.
    #[default]
    SignedZ,
    /// z = |z_{t/2}|, the more conservative reading.
    AbsoluteZ,
}

/// Correlation bound for a pair of alternatives; infinite when unrestricted.
pub fn alt_pair_sigma_bound(mu_i: f64, mu_j: f64, z: f64, interp: BoundInterpretation) -> f64 {
    let (a, b) = (libm::fabs(mu_i), libm::fabs(mu_j));
    let (lo, hi) = (a.min(b), a.max(b));
    let zz = match interp {
        BoundInterpretation::SignedZ => z,
        BoundInterpretation::AbsoluteZ => libm::fabs(z),
    };
    let den = hi + zz;
    if den <= 0.0 {
        f64::INFINITY
    } else {
        lo / den
    }
}

/// Sign of Cov(t_i, t_j) guaranteed by the sufficient conditions for null
/// pairs, mixed pairs with a strong signal, and concordant alternative
/// pairs with bounded correlation.
pub fn thm2_sign(mu_i: f64, mu_j: f64, sigma: f64, t: f64) -> SignPrediction {
    thm2_sign_with(mu_i, mu_j, sigma, t, BoundInterpretation::SignedZ)
}

pub fn thm2_sign_with(mu_i: f64, mu_j: f64, sigma: f64, t: f64, interp: BoundInterpretation) -> SignPrediction {
    let z = match z_half(t) {
        Ok(z) => z,
        Err(_) => return SignPrediction::Indeterminate,
    };
    if sigma == 0.0 || sigma.is_nan() {
        return SignPrediction::Indeterminate;
    }
    match PairCase::of(mu_i, mu_j) {
        PairCase::BothNull => SignPrediction::Positive,
        PairCase::Mixed => {
            let alt = if mu_i == 0.0 { mu_j } else { mu_i };
            if libm::fabs(alt) > 2.0 * libm::fabs(z) && t < NEGATIVE_COV_T_MAX {
                SignPrediction::Negative
            } else {
                SignPrediction::Indeterminate
            }
        }
        PairCase::BothAlternative => {
            let concordant = (sigma > 0.0) == (mu_i * mu_j > 0.0);
            if concordant && libm::fabs(sigma) <= alt_pair_sigma_bound(mu_i, mu_j, z, interp) {
                SignPrediction::Positive
            } else {
                SignPrediction::Indeterminate
            }
        }
    }
}

/// Whether every pair of alternatives meets the sufficient conditions for
/// V2 > 0: |μ_i| ≥ 2|z_{t/2}| > 2√(log(3)/2), the correlation bound and sign
/// concordance. Uncorrelated pairs impose nothing. With all σ_ij = 0 the
/// check passes while V2 = 0.
pub fn thm3_check(problem: &TestProblem, sigma: &CorrelationMatrix) -> Result<bool> {
    check_dims(problem, sigma)?;
    let z = problem.z();
    let c = problem.c();
    if !(c > inflation_z_floor()) {
        return Ok(false);
    }
    let alts: Vec<usize> = (0..problem.p()).filter(|&j| !problem.null_mask()[j]).collect();
    let mu = problem.mu();
    if alts.iter().any(|&j| libm::fabs(mu[j]) < 2.0 * c) {
        return Ok(false);
    }
    for (a, &i) in alts.iter().enumerate() {
        for &j in &alts[a + 1..] {
            let s = sigma.get(i, j);
            if s == 0.0 {
                continue;
            }
            let concordant = (s > 0.0) == (mu[i] * mu[j] > 0.0);
            if !concordant || libm::fabs(s) > alt_pair_sigma_bound(mu[i], mu[j], z, BoundInterpretation::SignedZ) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{bvn_box_2d, integrate};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol
    }

    fn m1_problem(p1: usize, t: f64) -> TestProblem {
        let c = -z_half(t).unwrap();
        let alts: Vec<usize> = (0..p1).collect();
        TestProblem::with_signals(2000, &alts, 2.0 * c, t).unwrap()
    }

    #[test]
    fn problem_validation() {
        assert!(TestProblem::new(alloc::vec![1.0], alloc::vec![true], 0.05).is_err());
        assert!(TestProblem::new(alloc::vec![0.0], alloc::vec![true], 1.0).is_err());
        assert!(TestProblem::new(alloc::vec![0.0, 1.0], alloc::vec![true], 0.05).is_err());
        let p = TestProblem::from_means(alloc::vec![0.0, 2.0, -3.0], 0.05).unwrap();
        assert_eq!((p.p0(), p.p1()), (1, 2));
        assert!(p.z() < 0.0);
    }

    #[test]
    fn xi_values() {
        assert!(close(xi(0.0, 0.05), 0.05, 1e-15));
        assert!(close(xi(40.0, 0.05), 1.0, 1e-15));
        assert_eq!(xi(1.3, 0.1), xi(-1.3, 0.1));
        let c = 2.8070337683438041172;
        assert!(close(xi(2.0 * c, 0.005), 0.99750000000000001865, 1e-14));
        assert!(xi(1.0, 0.0).is_nan());
    }

    #[test]
    fn fdp_limit_values() {
        let all_null = TestProblem::from_means(alloc::vec![0.0; 10], 0.05).unwrap();
        assert_eq!(fdp_limit(&all_null), 1.0);
        assert!(close(fdp_limit(&m1_problem(50, 0.005)), 0.16352201257861634964, 1e-13));
        let far = TestProblem::with_signals(100, &[0, 1, 2, 3], 60.0, 0.1).unwrap();
        assert!(close(fdp_limit(&far), 9.6 / (9.6 + 4.0), 1e-14));
    }

    #[test]
    fn expansion_terms_linearity() {
        let pr = m1_problem(50, 0.005);
        let p = 2000.0;
        let ev = pr.p0() as f64 * pr.t() / p;
        let er = pr.expected_rejections() / p;
        let (mean, m) = expansion_terms(ev, er, &pr);
        assert!(close(m, 0.0, 1e-15));
        assert!(close(mean, fdp_limit(&pr), 1e-15));
        let (_, m0) = expansion_terms(0.0, er, &pr);
        assert!(close(m0, -mean, 1e-15));
    }

    #[test]
    fn cov_exact_closed_forms_and_oracle() {
        assert!(close(cov_tests_exact(0.7, -1.2, 0.0, 0.05).unwrap(), 0.0, 1e-13));
        let t = 0.05;
        assert!(close(cov_tests_exact(0.0, 0.0, 1.0, t).unwrap(), t * (1.0 - t), 1e-14));
        let v = cov_tests_exact(0.0, 0.0, 0.5, t).unwrap();
        assert!(close(v, 0.0067537857957995025663, 1e-14));
        // Independent oracle: integrate the density over the four rejection quadrants.
        let c = 1.959963984540054;
        let inf = 12.0;
        let mut both = 0.0;
        for (x0, x1) in [(-inf, -c), (c, inf)] {
            for (y0, y1) in [(-inf, -c), (c, inf)] {
                both += bvn_box_2d(x0, x1, y0, y1, 0.0, 0.0, 0.5, 1e-13);
            }
        }
        assert!(close(v, both - t * t, 1e-9));
        assert!(cov_tests_exact(0.0, 0.0, 1.1, t).is_err());
    }

    #[test]
    fn cov_exact_bounded() {
        for &mi in &[0.0, 1.0, -2.5, 4.0] {
            for &mj in &[0.0, 0.5, 3.0] {
                for k in -10..=10 {
                    let s = k as f64 / 10.0;
                    let v = cov_tests_exact(mi, mj, s, 0.2).unwrap();
                    assert!(v.abs() <= 0.25 + 1e-15);
                }
            }
        }
    }

    #[test]
    fn deriv_closed_form_and_finite_difference() {
        assert!(close(cov_tests_deriv(0.0, 0.0, 0.0, 0.05).unwrap(), 0.0, 1e-17));
        let c: f64 = 1.959963984540054;
        let direct = (1.0 / (PI * libm::sqrt(0.91))) * (libm::exp(-c * c / 1.3) - libm::exp(-c * c / 0.7));
        let d = cov_tests_deriv(0.0, 0.0, 0.3, 0.05).unwrap();
        assert!(close(d, direct, 1e-15));
        assert!(close(d, 0.015997715521856453689, 1e-15));
        let h = 1e-5;
        for &(mi, mj, s, t) in
            &[(0.0, 0.0, 0.3, 0.05), (1.5, -2.0, -0.6, 0.02), (3.0, 3.0, 0.8, 0.2), (0.0, 5.0, -0.2, 0.005)]
        {
            let fd =
                (cov_tests_exact(mi, mj, s + h, t).unwrap() - cov_tests_exact(mi, mj, s - h, t).unwrap()) / (2.0 * h);
            assert!(close(cov_tests_deriv(mi, mj, s, t).unwrap(), fd, 1e-6));
        }
        assert!(cov_tests_deriv(0.0, 0.0, 1.0, 0.05).is_err());
    }

    #[test]
    fn hermite_values_and_orthogonality() {
        assert_eq!(hermite_g(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite_g(3, 2.0).unwrap(), 2.0);
        assert!(hermite_g(9, 1.0).is_err());
        let w = |f: &dyn Fn(f64) -> f64| integrate(&|x: f64| f(x) * norm_pdf(x), -12.0, 12.0, 1e-14);
        let g23 = w(&|x| hermite_g(2, x).unwrap() * hermite_g(3, x).unwrap());
        assert!(g23.abs() < 1e-12);
        for (i, fact) in [(1usize, 1.0), (2, 2.0), (3, 6.0), (4, 24.0)] {
            assert!(close(w(&|x| hermite_g(i, x).unwrap()), 0.0, 1e-12));
            assert!(close(w(&|x| hermite_g(i, x).unwrap().powi(2)), fact, 1e-10));
        }
    }

    #[test]
    fn coeff_symmetries() {
        let t = 0.05;
        assert!(close(coeff_c(0.0, t, 0, Tail::Lower).unwrap(), 0.025, 1e-15));
        let c2 = coeff_c(0.0, t, 2, Tail::Lower).unwrap();
        assert!(close(c2, 0.1145502318917987169, 1e-15));
        for i in 1..=8 {
            let lo = coeff_c(0.0, t, i, Tail::Lower).unwrap();
            let up = coeff_c(0.0, t, i, Tail::Upper).unwrap();
            if i % 2 == 1 {
                assert!(close(lo, up, 1e-15));
            } else {
                assert!(close(up, -lo, 1e-15));
            }
        }
        assert!(coeff_c(0.0, t, 9, Tail::Upper).is_err());
    }

    #[test]
    fn approx_null_pair() {
        assert_eq!(cov_tests_approx(0.0, 0.0, 0.0, 0.05).unwrap(), 0.0);
        let a = cov_tests_approx(0.0, 0.0, 0.1, 0.05).unwrap();
        let c: f64 = 1.959963984540054;
        let phi = norm_pdf(c);
        assert!(close(a, 2.0 * phi * phi * c * c * 0.01, 1e-17));
        assert!(close(a, 2.6243511252929719695e-4, 1e-17));
        let e = cov_tests_exact(0.0, 0.0, 0.1, 0.05).unwrap();
        assert!((a - e).abs() < 0.05 * e.abs());
        for &t in &[0.02, 0.05] {
            for &s in &[0.05, 0.1, 0.2] {
                let err = |s: f64| {
                    (cov_tests_approx(0.0, 0.0, s, t).unwrap() - cov_tests_exact(0.0, 0.0, s, t).unwrap()).abs()
                };
                let ratio = err(s) / err(s / 2.0);
                assert!((12.0..=20.0).contains(&ratio), "t={t} s={s} ratio={ratio}");
            }
        }
    }

    #[test]
    fn approx_alternative_pairs_fourth_order() {
        for &(mi, mj) in &[(2.5, 3.0), (0.0, 3.0), (-2.0, 4.0)] {
            let err =
                |s: f64| (cov_tests_approx(mi, mj, s, 0.05).unwrap() - cov_tests_exact(mi, mj, s, 0.05).unwrap()).abs();
            let ratio = err(0.04) / err(0.02);
            assert!(ratio > 10.0 && ratio < 24.0, "({mi},{mj}) ratio={ratio}");
        }
    }

    #[test]
    fn v1_reproduces_independent_table() {
        let expected = [
            (0.005, [(50, 4.3707), (100, 2.5698), (200, 1.3734)]),
            (0.02, [(50, 3.9229), (100, 3.2251), (200, 2.1498)]),
            (0.05, [(50, 2.2505), (100, 2.5314), (200, 2.2333)]),
        ];
        for (t, row) in expected {
            for (p1, sd) in row {
                let v = v1(&m1_problem(p1, t));
                assert!(close(100.0 * libm::sqrt(v), sd, 1e-4), "t={t} p1={p1}");
            }
        }
        let all_null = TestProblem::from_means(alloc::vec![0.0; 20], 0.05).unwrap();
        assert_eq!(v1(&all_null), 0.0);
    }

    #[test]
    fn v2_identity_and_decomposition() {
        let pr = TestProblem::with_signals(30, &[1, 5, 9], 3.0, 0.05).unwrap();
        let id = CorrelationMatrix::identity(30);
        let r = fdp_variance(&pr, &id, DEFAULT_SKIP_EPS).unwrap();
        assert_eq!(r.v2, 0.0);
        assert_eq!(r.pairs_evaluated, 0);
        assert_eq!(r.pairs_skipped, 435);
        assert_eq!(r.total, r.v1 + r.v2);
        assert!(close(r.var_m, r.v1, 1e-15));
        let eq = CorrelationMatrix::equicorrelation(30, 0.3).unwrap();
        let r = fdp_variance(&pr, &eq, 0.0).unwrap();
        assert_eq!(r.total, r.v1 + r.v2);
        assert_eq!(r.pairs_evaluated, 435);
        // Constant |μ| on the alternatives: the expansion variance is exactly V1 + V2.
        assert!(close(r.var_m, r.total, 1e-15));
        assert!(fdp_variance(&pr, &CorrelationMatrix::identity(29), 0.0).is_err());
    }

    #[test]
    fn v2_brute_force_two_tests() {
        // One null and one alternative, σ = 0.6: enumerate the four outcomes.
        let (mu, s, t) = (2.5, 0.6, 0.1);
        let pr = TestProblem::new(alloc::vec![0.0, mu], alloc::vec![true, false], t).unwrap();
        let sigma = CorrelationMatrix::equicorrelation(2, s).unwrap();
        let r = fdp_variance(&pr, &sigma, 0.0).unwrap();
        let cov = cov_tests_exact(0.0, mu, s, t).unwrap();
        let x = xi(mu, t);
        let p = 2.0;
        let (ev, er) = (t / p, (t + x) / p);
        let m = |v: f64, r: f64| v / er - ev / (er * er) * r;
        let p11 = t * x + cov;
        let p10 = t - p11;
        let p01 = x - p11;
        let p00 = 1.0 - p11 - p10 - p01;
        let cells = [(p11, m(0.5, 1.0)), (p10, m(0.5, 0.5)), (p01, m(0.0, 0.5)), (p00, m(0.0, 0.0))];
        let mean: f64 = cells.iter().map(|(w, v)| w * v).sum();
        let var: f64 = cells.iter().map(|(w, v)| w * (v - mean) * (v - mean)).sum();
        assert!(close(mean, 0.0, 1e-15));
        assert!(close(r.total, var, 1e-14));
    }

    #[test]
    fn v2_positive_for_correlated_nulls() {
        let pr = TestProblem::from_means(alloc::vec![0.0; 50], 0.05).unwrap();
        let mut mu = alloc::vec![0.0; 50];
        mu[0] = 3.0;
        let pr2 = TestProblem::from_means(mu, 0.05).unwrap();
        let eq = CorrelationMatrix::equicorrelation(50, 0.2).unwrap();
        assert_eq!(v2(&pr, &eq, 0.0).unwrap().v2, 0.0);
        let r = v2(&pr2, &eq, 0.0).unwrap();
        assert!(r.pair_sums.null_null > 0.0);
        assert!(r.v2 > 0.0);
    }

    #[test]
    fn cached_variance_matches_direct() {
        let p = 60;
        let mut s = crate::rng::Stream::new(4, crate::rng::label::TEST, 0);
        let data: Vec<f64> = (0..3 * p * p).map(|_| s.normal()).collect();
        let x = Matrix::from_vec(3 * p, p, data.into_iter().take(3 * p * p).collect()).unwrap();
        let sigma = crate::matrix::sample_correlation(&x).unwrap();
        let t = 0.02;
        let cache = NullCovCache::new(&sigma, t, 0.0).unwrap();
        for alts in [alloc::vec![], alloc::vec![3usize], alloc::vec![0, 7, 8, 30, 59]] {
            let mut mu = alloc::vec![0.0; p];
            for (k, &j) in alts.iter().enumerate() {
                mu[j] = if k % 2 == 0 { 3.1 } else { -4.2 };
            }
            let pr = TestProblem::from_means(mu, t).unwrap();
            let a = fdp_variance(&pr, &sigma, 0.0).unwrap();
            let b = fdp_variance_cached(&pr, &sigma, &cache).unwrap();
            assert!(close(a.pair_sums.null_null, b.pair_sums.null_null, 1e-13));
            assert!(close(a.pair_sums.null_alt, b.pair_sums.null_alt, 1e-14));
            assert!(close(a.pair_sums.alt_alt, b.pair_sums.alt_alt, 1e-14));
            assert!(close(a.total, b.total, 1e-12 * a.total.abs().max(1e-300)));
            assert_eq!(a.pairs_evaluated, b.pairs_evaluated);
        }
        let other = TestProblem::from_means(alloc::vec![0.0; p], 0.05).unwrap();
        assert!(fdp_variance_cached(&other, &sigma, &cache).is_err());
    }

    #[test]
    fn threshold_constants_properties() {
        for &t in &[0.005, 0.02, 0.05, 0.2] {
            let k = threshold_constants(t).unwrap();
            assert!(k.mu_t > k.z_abs && k.mu_t < k.z_abs + 1.0);
            assert!(h_fn(k.mu_t, k.z_abs).abs() < 1e-10);
            let h0 = 2.0 * norm_pdf(k.z_abs) * k.z_abs;
            assert!(close(h_fn(0.0, k.z_abs), h0, 1e-16));
            assert!(k.c_t_max >= h0);
            for i in 0..50 {
                let m = i as f64 * 0.1;
                assert!(close(h_fn(m, k.z_abs), h_fn(-m, k.z_abs), 1e-16));
                if m < k.mu_t {
                    assert!(h_fn(m, k.z_abs) <= k.c_t_max + 1e-15);
                }
            }
        }
        assert!(threshold_constants(0.0).is_err());
    }

    #[test]
    fn condition_report() {
        let pr = TestProblem::with_signals(200, &(0..20).collect::<Vec<_>>(), 3.0, 0.05).unwrap();
        let id = check_conditions(&pr, &CorrelationMatrix::identity(200)).unwrap();
        assert_eq!((id.cond1_lhs, id.cond1_rhs, id.cond2_ratio, id.cond3_ratio), (0.0, 0.0, 0.0, 0.0));
        assert!(id.cond1_holds);
        let eq = check_conditions(&pr, &CorrelationMatrix::equicorrelation(200, 0.05).unwrap()).unwrap();
        assert!(close(eq.cond1_lhs, 180.0 * 179.0 * 0.0025, 1e-9));
        assert!(eq.cond1_holds);
        assert!(close(eq.cond2_ratio, 20.0 * 19.0 * 0.0025 / (eq.cond1_lhs + 200.0), 1e-12));
        assert!(close(eq.cond3_ratio, 200.0 * 199.0 * 0.05f64.powi(4) / (eq.cond1_lhs + 180.0), 1e-12));
    }

    #[test]
    fn sign_predictions() {
        let t = 0.05;
        let c = 1.959963984540054;
        assert_eq!(thm2_sign(0.0, 0.0, 0.3, t), SignPrediction::Positive);
        assert!(cov_tests_exact(0.0, 0.0, 0.3, t).unwrap() > 0.0);
        assert_eq!(thm2_sign(0.0, 3.0 * c, -0.4, t), SignPrediction::Negative);
        assert!(cov_tests_exact(0.0, 3.0 * c, -0.4, t).unwrap() < 0.0);
        // Signed bound at (2c, 4c) is 2c/(4c - c) = 2/3; at (2c, 2c) it exceeds one.
        assert_eq!(thm2_sign(2.0 * c, 4.0 * c, 0.7, t), SignPrediction::Indeterminate);
        assert_eq!(thm2_sign(2.0 * c, 4.0 * c, 0.6, t), SignPrediction::Positive);
        assert_eq!(thm2_sign(2.0 * c, 2.0 * c, 0.99, t), SignPrediction::Positive);
        assert_eq!(
            thm2_sign_with(2.0 * c, 2.0 * c, 0.99, t, BoundInterpretation::AbsoluteZ),
            SignPrediction::Indeterminate
        );
        assert_eq!(thm2_sign(2.0 * c, 2.0 * c, -0.3, t), SignPrediction::Indeterminate);
        assert_eq!(thm2_sign(2.0 * c, 2.0 * c, 0.5, t), SignPrediction::Positive);
        assert_eq!(thm2_sign(0.0, 0.0, 0.0, t), SignPrediction::Indeterminate);
        assert_eq!(thm2_sign(0.0, 3.0 * c, -0.4, 0.5), SignPrediction::Indeterminate);
        assert!(
            alt_pair_sigma_bound(4.0, 5.0, -c, BoundInterpretation::AbsoluteZ)
                < alt_pair_sigma_bound(4.0, 5.0, -c, BoundInterpretation::SignedZ)
        );
        assert!(close(NEGATIVE_COV_T_MAX, 2.0 * (1.0 - norm_cdf(inflation_z_floor())), 1e-15));
    }

    #[test]
    fn inflation_check() {
        let t = 0.05;
        let c = 1.959963984540054;
        let p = 40;
        let alts: Vec<usize> = (0..8).collect();
        let pr = TestProblem::with_signals(p, &alts, 2.2 * c, t).unwrap();
        let mut m = Matrix::identity(p);
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    let v = if i < 8 && j < 8 {
                        0.3
                    } else if i >= 8 && j >= 8 {
                        0.1
                    } else {
                        0.0
                    };
                    m.set(i, j, v);
                }
            }
        }
        let sigma = CorrelationMatrix::new(m.clone()).unwrap();
        assert!(thm3_check(&pr, &sigma).unwrap());
        assert!(v2(&pr, &sigma, 0.0).unwrap().v2 > 0.0);
        assert!(thm3_check(&pr, &CorrelationMatrix::identity(p)).unwrap());
        m.set(0, 1, -0.3);
        m.set(1, 0, -0.3);
        assert!(!thm3_check(&pr, &CorrelationMatrix::new(m).unwrap()).unwrap());
        let weak = TestProblem::with_signals(p, &alts, 1.5 * c, t).unwrap();
        assert!(!thm3_check(&weak, &sigma).unwrap());
    }
}
