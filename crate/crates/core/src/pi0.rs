//! Estimators of the null proportion π0 from two-sided p-values.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gauss::norm_cdf;
use crate::matrix::{jacobi_eigen, Matrix};
use crate::num::map_indexed;
use crate::rng::{label, Stream};

/// Effective degrees of freedom of the smoothing spline.
pub const SMOOTHING_DF: f64 = 3.0;
pub const MIN_GRID_LEN: usize = 4;
pub const MIN_BOOTSTRAP_REPLICATES: usize = 100;
pub const DEFAULT_STOREY_LAMBDA: f64 = 0.5;
pub const DEFAULT_GRENANDER_LAMBDA: f64 = 0.5;
pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 200;

/// λ = 0.05, 0.10, …, 0.95.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

/// Validated p-values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PValueVector {
    values: Vec<f64>,
}

impl PValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("p-value vector is empty"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Domain("p-values must lie in [0, 1]"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Two-sided p-values 2Φ(-|Z_i|), so that P_i < t exactly when the test
/// rejects at threshold t.
pub fn pvalues(z: &[f64]) -> Result<PValueVector> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("statistics must be finite"));
    }
    PValueVector::new(z.iter().map(|&v| (2.0 * norm_cdf(-libm::fabs(v))).min(1.0)).collect())
}

/// Which estimator produced a [`Pi0Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Pi0Kind {
    StoreyFixed,
    StoreySmoothed,
    StoreyBootstrap,
    Grenander,
    Supplied,
}

/// Estimator choice with its tuning parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "method", rename_all = "snake_case"))]
pub enum Pi0Method {
    StoreyFixed {
        lambda: f64,
    },
    StoreySmoothed {
        grid: Vec<f64>,
        /// Where the fitted spline is read off; the largest grid point when absent.
        eval_lambda: Option<f64>,
    },
    StoreyBootstrap {
        grid: Vec<f64>,
        replicates: usize,
    },
    Grenander {
        lambda: f64,
    },
    Supplied {
        value: f64,
    },
}

impl Pi0Method {
    pub fn storey() -> Self {
        Pi0Method::StoreyFixed { lambda: DEFAULT_STOREY_LAMBDA }
    }

    pub fn smoothed() -> Self {
        Pi0Method::StoreySmoothed { grid: default_lambda_grid(), eval_lambda: None }
    }

    pub fn bootstrap() -> Self {
        Pi0Method::StoreyBootstrap { grid: default_lambda_grid(), replicates: DEFAULT_BOOTSTRAP_REPLICATES }
    }

    pub fn grenander() -> Self {
        Pi0Method::Grenander { lambda: DEFAULT_GRENANDER_LAMBDA }
    }

    pub fn kind(&self) -> Pi0Kind {
        match self {
            Pi0Method::StoreyFixed { .. } => Pi0Kind::StoreyFixed,
            Pi0Method::StoreySmoothed { .. } => Pi0Kind::StoreySmoothed,
            Pi0Method::StoreyBootstrap { .. } => Pi0Kind::StoreyBootstrap,
            Pi0Method::Grenander { .. } => Pi0Kind::Grenander,
            Pi0Method::Supplied { .. } => Pi0Kind::Supplied,
        }
    }
}

/// Estimated null proportion with supporting diagnostics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pi0Estimate {
    /// In [1/p, 1].
    pub value: f64,
    pub method: Pi0Kind,
    pub lambda_used: Option<f64>,
    /// (λ, π̂0(λ)) over the tuning grid, where one is used.
    pub diagnostics: Vec<(f64, f64)>,
    /// Knots of the least concave majorant (Grenander only).
    pub knots: Vec<(f64, f64)>,
}

fn clamp_pi0(v: f64, p: usize) -> f64 {
    let lo = 1.0 / p as f64;
    if v.is_nan() {
        return 1.0;
    }
    v.clamp(lo, 1.0)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("lambda must lie in (0, 1)"))
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < MIN_GRID_LEN {
        return Err(Error::GridTooSmall { len: grid.len(), min: MIN_GRID_LEN });
    }
    for &l in grid {
        check_lambda(l)?;
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("lambda grid must be strictly increasing"));
    }
    Ok(())
}

/// Unclamped #{P_i > λ} / (p(1 - λ)).
fn storey_raw(values: &[f64], lambda: f64) -> f64 {
    let above = values.iter().filter(|&&v| v > lambda).count();
    above as f64 / (values.len() as f64 * (1.0 - lambda))
}

fn storey_grid(values: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter().map(|&l| (l, storey_raw(values, l))).collect()
}

/// π̂0(λ) = #{P_i > λ} / (p(1 - λ)), clamped to [1/p, 1].
pub fn pi0_storey(p: &PValueVector, lambda: f64) -> Result<Pi0Estimate> {
    check_lambda(lambda)?;
    Ok(Pi0Estimate {
        value: clamp_pi0(storey_raw(&p.values, lambda), p.len()),
        method: Pi0Kind::StoreyFixed,
        lambda_used: Some(lambda),
        diagnostics: Vec::new(),
        knots: Vec::new(),
    })
}

/// Natural cubic smoothing spline through (x_i, y_i) with the roughness
/// penalty chosen to give `df` effective degrees of freedom.
#[derive(Debug, Clone)]
struct SmoothingSpline {
    x: Vec<f64>,
    fitted: Vec<f64>,
    /// Second derivatives at the knots (zero at both ends).
    gamma: Vec<f64>,
}

impl SmoothingSpline {
    fn fit(x: &[f64], y: &[f64], df: f64) -> Result<Self> {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m = n - 2;
        // Q is n×(n-2), R is (n-2)×(n-2) tridiagonal; the penalty matrix is K = Q R⁻¹ Qᵀ.
        let mut q = Matrix::zeros(n, m);
        let mut r = Matrix::zeros(m, m);
        for j in 0..m {
            q.set(j, j, 1.0 / h[j]);
            q.set(j + 1, j, -1.0 / h[j] - 1.0 / h[j + 1]);
            q.set(j + 2, j, 1.0 / h[j + 1]);
            r.set(j, j, (h[j] + h[j + 1]) / 3.0);
            if j + 1 < m {
                r.set(j, j + 1, h[j + 1] / 6.0);
                r.set(j + 1, j, h[j + 1] / 6.0);
            }
        }
        let r_inv_qt = solve_spd(&r, &q.transpose())?;
        let k = q.matmul(&r_inv_qt)?;
        let eig = jacobi_eigen(&k)?;
        let d: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
        let trace = |log_l: f64| {
            let l = libm::exp(log_l);
            d.iter().map(|&dk| 1.0 / (1.0 + l * dk)).sum::<f64>()
        };
        // df falls from n (no smoothing) to 2 (straight line) as λ grows.
        let (mut lo, mut hi) = (-60.0, 60.0);
        if !(trace(lo) > df && trace(hi) < df) {
            return Err(Error::RootNotBracketed);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if trace(mid) > df {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let l = libm::exp(0.5 * (lo + hi));
        let mut fitted = vec![0.0; n];
        for kk in 0..n {
            let u = eig.vector(kk);
            let coef: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / (1.0 + l * d[kk]);
            for (f, uv) in fitted.iter_mut().zip(&u) {
                *f += coef * uv;
            }
        }
        let qt_g: Vec<f64> = (0..m).map(|j| (0..n).map(|i| q.get(i, j) * fitted[i]).sum()).collect();
        let inner = solve_spd(&r, &Matrix::from_vec(m, 1, qt_g)?)?;
        let mut gamma = vec![0.0; n];
        for j in 0..m {
            gamma[j + 1] = inner.get(j, 0);
        }
        Ok(Self { x: x.to_vec(), fitted, gamma })
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.iter().position(|&v| v >= t) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => n - 2,
        };
        let (xl, xr) = (self.x[i], self.x[i + 1]);
        let h = xr - xl;
        let (a, b) = (t - xl, xr - t);
        (a * self.fitted[i + 1] + b * self.fitted[i]) / h
            - a * b / 6.0 * ((1.0 + a / h) * self.gamma[i + 1] + (1.0 + b / h) * self.gamma[i])
    }
}

/// Solves A X = B for symmetric positive definite A by Cholesky.
fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = a.get(i, j) - (0..j).map(|k| l.get(i, k) * l.get(j, k)).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                }
                l.set(i, i, libm::sqrt(s));
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let s = x.get(i, c) - (0..i).map(|k| l.get(i, k) * x.get(k, c)).sum::<f64>();
            x.set(i, c, s / l.get(i, i));
        }
        for i in (0..n).rev() {
            let s = x.get(i, c) - ((i + 1)..n).map(|k| l.get(k, i) * x.get(k, c)).sum::<f64>();
            x.set(i, c, s / l.get(i, i));
        }
    }
    Ok(x)
}

/// Smoothing-spline estimator: fit a df = 3 natural cubic smoothing spline
/// to π̂0(λ) over the grid and read it off at `eval_lambda` (default: the
/// largest grid point).
pub fn pi0_smoothed(p: &PValueVector, grid: &[f64], eval_lambda: Option<f64>) -> Result<Pi0Estimate> {
    check_grid(grid)?;
    let at = eval_lambda.unwrap_or(grid[grid.len() - 1]);
    if !(at >= grid[0] && at <= grid[grid.len() - 1]) {
        return Err(Error::Domain("evaluation point must lie within the lambda grid"));
    }
    let diag = storey_grid(&p.values, grid);
    let y: Vec<f64> = diag.iter().map(|d| d.1).collect();
    let spline = SmoothingSpline::fit(grid, &y, SMOOTHING_DF)?;
    Ok(Pi0Estimate {
        value: clamp_pi0(spline.eval(at), p.len()),
        method: Pi0Kind::StoreySmoothed,
        lambda_used: Some(at),
        diagnostics: diag,
        knots: Vec::new(),
    })
}

/// Bootstrap estimator: choose the λ minimizing the bootstrap mean squared
/// error against min_λ' π̂0(λ'), ties to the smaller λ. Replicate `b` draws
/// from its own stream, so the result depends only on `seed`.
pub fn pi0_bootstrap(p: &PValueVector, grid: &[f64], replicates: usize, seed: u64) -> Result<Pi0Estimate> {
    check_grid(grid)?;
    if replicates < MIN_BOOTSTRAP_REPLICATES {
        return Err(Error::Domain("bootstrap needs at least 100 replicates"));
    }
    let n = p.len();
    let g = grid.len();
    let diag = storey_grid(&p.values, grid);
    let target = diag.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    // bins[i] = number of grid points strictly below P_i, so P_i > λ_k ⇔ k < bins[i].
    let bins: Vec<usize> = p.values.iter().map(|&v| grid.partition_point(|&l| l < v)).collect();
    let sq_err: Vec<Vec<f64>> = map_indexed(replicates, |b| {
        let mut s = Stream::new(seed, label::BOOTSTRAP, b as u64);
        let mut hist = vec![0usize; g + 1];
        for _ in 0..n {
            hist[bins[s.below(n as u64) as usize]] += 1;
        }
        let mut above = 0usize;
        let mut counts = vec![0usize; g];
        for k in (0..g).rev() {
            above += hist[k + 1];
            counts[k] = above;
        }
        (0..g)
            .map(|k| {
                let est = counts[k] as f64 / (n as f64 * (1.0 - grid[k]));
                (est - target) * (est - target)
            })
            .collect()
    });
    let mse: Vec<f64> = (0..g)
        .map(|k| {
            let col: Vec<f64> = sq_err.iter().map(|r| r[k]).collect();
            crate::num::pairwise_sum(&col) / replicates as f64
        })
        .collect();
    let mut best = 0;
    for k in 1..g {
        if mse[k] < mse[best] {
            best = k;
        }
    }
    Ok(Pi0Estimate {
        value: clamp_pi0(diag[best].1, n),
        method: Pi0Kind::StoreyBootstrap,
        lambda_used: Some(grid[best]),
        diagnostics: diag,
        knots: Vec::new(),
    })
}

/// Least concave majorant of the empirical CDF through (0, 0) and (1, 1).
/// Returns its knots; consecutive slopes are nonincreasing.
pub fn ecdf_concave_majorant(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(sorted.len() + 2);
    pts.push((0.0, 0.0));
    for (i, &v) in sorted.iter().enumerate() {
        let y = (i + 1) as f64 / n;
        match pts.last_mut() {
            Some(last) if last.0 == v => last.1 = y,
            _ => pts.push((v, y)),
        }
    }
    if pts.last().map_or(true, |l| l.0 < 1.0) {
        pts.push((1.0, 1.0));
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for pt in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or below the chord from a to pt.
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x <= x1 {
            return if x1 == x0 { y1 } else { y0 + (y1 - y0) * (x - x0) / (x1 - x0) };
        }
    }
    knots[knots.len() - 1].1
}

/// Grenander-type estimator: the average slope of the concave majorant of
/// the p-value ECDF over [λ, 1], i.e. (1 - F̂(λ)) / (1 - λ) with F̂ the
/// majorant. The majorant's last segment always runs flat from the largest
/// p-value to (1, 1), so its terminal slope alone carries no information.
pub fn pi0_grenander(p: &PValueVector, lambda: f64) -> Result<Pi0Estimate> {
    check_lambda(lambda)?;
    let knots = ecdf_concave_majorant(&p.values);
    let value = (1.0 - interpolate(&knots, lambda)) / (1.0 - lambda);
    Ok(Pi0Estimate {
        value: clamp_pi0(value, p.len()),
        method: Pi0Kind::Grenander,
        lambda_used: Some(lambda),
        diagnostics: Vec::new(),
        knots,
    })
}

/// Dispatches to the chosen estimator. `seed` is used by the bootstrap only.
pub fn estimate_pi0(p: &PValueVector, method: &Pi0Method, seed: u64) -> Result<Pi0Estimate> {
    match method {
        Pi0Method::StoreyFixed { lambda } => pi0_storey(p, *lambda),
        Pi0Method::StoreySmoothed { grid, eval_lambda } => pi0_smoothed(p, grid, *eval_lambda),
        Pi0Method::StoreyBootstrap { grid, replicates } => pi0_bootstrap(p, grid, *replicates, seed),
        Pi0Method::Grenander { lambda } => pi0_grenander(p, *lambda),
        Pi0Method::Supplied { value } => {
            if !(*value >= 0.0 && *value <= 1.0) {
                return Err(Error::Domain("supplied pi0 must lie in [0, 1]"));
            }
            Ok(Pi0Estimate {
                value: clamp_pi0(*value, p.len()),
                method: Pi0Kind::Supplied,
                lambda_used: None,
                diagnostics: Vec::new(),
                knots: Vec::new(),
            })
        }
    }
}
