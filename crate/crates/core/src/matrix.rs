//! Dense symmetric matrix algebra: correlation matrices, Cholesky, symmetric
//! eigendecomposition, sample correlation and principal factor reduction.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::{map_indexed, pairwise_sum};

/// Tolerance for symmetry of externally supplied matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Diagonal jitters tried, in order, by [`cholesky`].
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-10, 1e-8, 1e-6];
/// Largest dimension handled by cyclic Jacobi in [`sym_eigen`].
pub const JACOBI_MAX_DIM: usize = 128;
const JACOBI_MAX_SWEEPS: usize = 100;
const QL_MAX_ITER_PER_VALUE: usize = 60;
const PFA_DIAGONAL_FLOOR: f64 = 1e-10;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Matrix) -> f64 {
        let sq: Vec<f64> = self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).collect();
        libm::sqrt(pairwise_sum(&sq))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|a| a * a).collect();
        libm::sqrt(pairwise_sum(&sq))
    }

    fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

/// Symmetric matrix with unit diagonal and entries in [-1, 1].
///
/// Construction checks structure only; positive semidefiniteness is checked
/// separately by [`CorrelationMatrix::check_psd`] because it costs a
/// factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    inner: Matrix,
}

impl CorrelationMatrix {
    /// Validates and symmetrizes `m`. Off-diagonal entries may exceed ±1 by
    /// at most 1e-12 (clamped); asymmetry up to [`SYMMETRY_TOLERANCE`] is
    /// averaged out.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidCorrelation("matrix is not square"));
        }
        if m.rows == 0 {
            return Err(Error::InvalidCorrelation("matrix is empty"));
        }
        let p = m.rows;
        let mut m = m;
        for i in 0..p {
            if m.get(i, i) != 1.0 {
                return Err(Error::InvalidCorrelation("diagonal entries must equal 1"));
            }
            for j in (i + 1)..p {
                let (a, b) = (m.get(i, j), m.get(j, i));
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidCorrelation("entries must be finite"));
                }
                if libm::fabs(a - b) > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidCorrelation("matrix is not symmetric"));
                }
                let v = 0.5 * (a + b);
                if libm::fabs(v) > 1.0 + 1e-12 {
                    return Err(Error::InvalidCorrelation("entries must lie in [-1, 1]"));
                }
                let v = v.clamp(-1.0, 1.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        Ok(Self { inner: m })
    }

    pub fn identity(p: usize) -> Self {
        Self { inner: Matrix::identity(p) }
    }

    /// Equicorrelation matrix with off-diagonal `rho`.
    pub fn equicorrelation(p: usize, rho: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::Domain("equicorrelation must lie in [-1, 1]"));
        }
        let mut m = Matrix::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                m.set(i, j, if i == j { 1.0 } else { rho });
            }
        }
        Ok(Self { inner: m })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.inner.row(i)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix {
        self.inner
    }

    /// True when every off-diagonal entry is zero.
    pub fn is_identity(&self) -> bool {
        let p = self.dim();
        (0..p).all(|i| self.row(i).iter().enumerate().all(|(j, &v)| j == i || v == 0.0))
    }

    /// Checks positive semidefiniteness to the tolerance λ_min ≥ -1e-8·p by
    /// factorizing Σ + 1e-8·p·I.
    pub fn check_psd(&self) -> Result<()> {
        let shift = 1e-8 * self.dim() as f64;
        cholesky_jittered(&self.inner, shift).map(|_| ())
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> CorrelationMatrix {
        let k = idx.len();
        let mut m = Matrix::zeros(k, k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        Self { inner: m }
    }
}

/// Lower-triangular Cholesky factor L with L·Lᵀ = Σ + jitter·I.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    pub lower: Matrix,
    /// Diagonal jitter that was needed; 0 for a positive definite input.
    pub jitter: f64,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows
    }

    /// out = mean + L·eps.
    pub fn transform_into(&self, mean: &[f64], eps: &[f64], out: &mut [f64]) {
        let p = self.dim();
        for i in 0..p {
            let row = &self.lower.row(i)[..=i];
            let mut acc = 0.0;
            for (l, e) in row.iter().zip(&eps[..=i]) {
                acc += l * e;
            }
            out[i] = mean[i] + acc;
        }
    }

    /// L·Lᵀ.
    pub fn reconstruct(&self) -> Matrix {
        let p = self.dim();
        let mut m = Matrix::zeros(p, p);
        for i in 0..p {
            for j in 0..=i {
                let n = j + 1;
                let v: f64 = self.lower.row(i)[..n].iter().zip(&self.lower.row(j)[..n]).map(|(a, b)| a * b).sum();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }
}

fn cholesky_jittered(a: &Matrix, jitter: f64) -> Result<CholeskyFactor> {
    let p = a.rows;
    let floor = if jitter > 0.0 { 0.5 * jitter } else { 1e-12 };
    let mut l = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let dot: f64 = {
                let (ri, rj) = (&l.data[i * p..i * p + j], &l.data[j * p..j * p + j]);
                ri.iter().zip(rj).map(|(x, y)| x * y).sum()
            };
            let s = a.get(i, j) + if i == j { jitter } else { 0.0 } - dot;
            if i == j {
                if !(s > floor) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                }
                l.data[i * p + i] = libm::sqrt(s);
            } else {
                l.data[i * p + j] = s / l.data[j * p + j];
            }
        }
    }
    Ok(CholeskyFactor { lower: l, jitter })
}

/// Cholesky factorization, adding the smallest jitter from
/// [`JITTER_LADDER`] that keeps every pivot positive.
pub fn cholesky(sigma: &CorrelationMatrix) -> Result<CholeskyFactor> {
    let mut last = Error::NotPositiveDefinite { pivot: 0, value: f64::NAN };
    for &jitter in &JITTER_LADDER {
        match cholesky_jittered(&sigma.inner, jitter) {
            Ok(f) => return Ok(f),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Eigenvalues in descending order with orthonormal column eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Γ: column `j` is the eigenvector for `values[j]`.
    pub vectors: Matrix,
}

impl EigenSystem {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }

    /// Γ diag(λ) Γᵀ.
    pub fn reconstruct(&self) -> Matrix {
        let p = self.values.len();
        let mut scaled = self.vectors.clone();
        for i in 0..p {
            for j in 0..p {
                scaled.data[i * p + j] *= self.values[j];
            }
        }
        scaled.matmul(&self.vectors.transpose()).expect("square")
    }

    fn sorted_from(values: Vec<f64>, vectors_by_row: Vec<Vec<f64>>) -> Self {
        // vectors_by_row[j] is eigenvector j.
        let p = values.len();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        let mut vecs = Matrix::zeros(p, p);
        let mut vals = Vec::with_capacity(p);
        for (col, &src) in order.iter().enumerate() {
            vals.push(values[src]);
            for i in 0..p {
                vecs.data[i * p + col] = vectors_by_row[src][i];
            }
        }
        Self { values: vals, vectors: vecs }
    }
}

/// Symmetric eigendecomposition. Cyclic Jacobi up to [`JACOBI_MAX_DIM`],
/// Householder tridiagonalization with implicit QL above.
pub fn sym_eigen(a: &Matrix) -> Result<EigenSystem> {
    if !a.is_square() {
        return Err(Error::Domain("eigendecomposition needs a square matrix"));
    }
    if a.rows <= JACOBI_MAX_DIM {
        jacobi_eigen(a)
    } else {
        tridiagonal_ql_eigen(a)
    }
}

/// Cyclic Jacobi rotations; converges when the off-diagonal Frobenius norm
/// drops below 1e-13·‖A‖_F, capped at 100 sweeps.
pub fn jacobi_eigen(a: &Matrix) -> Result<EigenSystem> {
    let p = a.rows;
    let mut m = a.clone();
    let mut v = Matrix::identity(p);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok(EigenSystem { values: vec![0.0; p], vectors: Matrix::identity(p) });
    }
    let tol = 1e-13 * scale;
    let off = |m: &Matrix| {
        let mut s = 0.0;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    s += m.data[i * p + j] * m.data[i * p + j];
                }
            }
        }
        libm::sqrt(s)
    };
    let mut sweeps = 0;
    while off(&m) >= tol {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: sweeps });
        }
        sweeps += 1;
        for i in 0..p {
            for j in (i + 1)..p {
                let aij = m.data[i * p + j];
                if aij == 0.0 {
                    continue;
                }
                let (aii, ajj) = (m.data[i * p + i], m.data[j * p + j]);
                let theta = (ajj - aii) / (2.0 * aij);
                let t = {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..p {
                    let (mki, mkj) = (m.data[k * p + i], m.data[k * p + j]);
                    m.data[k * p + i] = c * mki - s * mkj;
                    m.data[k * p + j] = s * mki + c * mkj;
                }
                for k in 0..p {
                    let (mik, mjk) = (m.data[i * p + k], m.data[j * p + k]);
                    m.data[i * p + k] = c * mik - s * mjk;
                    m.data[j * p + k] = s * mik + c * mjk;
                }
                for k in 0..p {
                    let (vki, vkj) = (v.data[k * p + i], v.data[k * p + j]);
                    v.data[k * p + i] = c * vki - s * vkj;
                    v.data[k * p + j] = s * vki + c * vkj;
                }
            }
        }
    }
    let values: Vec<f64> = (0..p).map(|i| m.data[i * p + i]).collect();
    let by_row: Vec<Vec<f64>> = (0..p).map(|j| v.column(j)).collect();
    Ok(EigenSystem::sorted_from(values, by_row))
}

/// Householder reduction to tridiagonal form followed by the implicit QL
/// algorithm (EISPACK tred2/tql2). Works on the transposed accumulator so
/// that the inner loops stream contiguous memory.
pub fn tridiagonal_ql_eigen(a: &Matrix) -> Result<EigenSystem> {
    let n = a.rows;
    if n == 0 {
        return Ok(EigenSystem { values: Vec::new(), vectors: Matrix::zeros(0, 0) });
    }
    // w[j * n + k] holds V[k][j].
    let mut w = a.transpose().data;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    macro_rules! v {
        ($k:expr, $j:expr) => {
            w[($j) * n + ($k)]
        };
    }

    for j in 0..n {
        d[j] = v!(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += libm::fabs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
                v!(j, i) = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v!(j, i) = f;
                g = e[j] + v!(j, j) * f;
                let col = &w[j * n..j * n + i];
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = &mut w[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..(n - 1) {
        v!(n - 1, i) = v!(i, i);
        v!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v!(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v!(k, i + 1) * v!(k, j);
                }
                let col = &mut w[j * n..j * n + i + 1];
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
        v!(n - 1, j) = 0.0;
    }
    v!(n - 1, n - 1) = 1.0;
    e[0] = 0.0;

    // Implicit QL.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_ITER_PER_VALUE {
                    return Err(Error::NoConvergence { iterations: iter });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..];
                    let col_i1 = &mut hi[..n];
                    for k in 0..n {
                        let h = col_i1[k];
                        col_i1[k] = s * col_i[k] + c * h;
                        col_i[k] = c * col_i[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if libm::fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    let by_row: Vec<Vec<f64>> = (0..n).map(|j| w[j * n..(j + 1) * n].to_vec()).collect();
    Ok(EigenSystem::sorted_from(d, by_row))
}

/// Sample correlation of the columns of an n×p data matrix.
pub fn sample_correlation(data: &Matrix) -> Result<CorrelationMatrix> {
    let (n, p) = (data.rows, data.cols);
    if n < 2 {
        return Err(Error::Domain("sample correlation needs at least two rows"));
    }
    // Standardized columns, each of unit Euclidean norm.
    let mut cols = data.transpose().data;
    for j in 0..p {
        let col = &mut cols[j * n..(j + 1) * n];
        let mean = pairwise_sum(col) / n as f64;
        for x in col.iter_mut() {
            *x -= mean;
        }
        let sq: Vec<f64> = col.iter().map(|x| x * x).collect();
        let norm = libm::sqrt(pairwise_sum(&sq));
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateColumn(j));
        }
        for x in col.iter_mut() {
            *x /= norm;
        }
    }
    let rows: Vec<Vec<f64>> = map_indexed(p, |i| {
        let ci = &cols[i * n..(i + 1) * n];
        ((i + 1)..p)
            .map(|j| {
                let cj = &cols[j * n..(j + 1) * n];
                ci.iter().zip(cj).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0)
            })
            .collect()
    });
    let mut m = Matrix::identity(p);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(CorrelationMatrix { inner: m })
}

/// p⁻² Σ_{i,j} |σ_ij|, diagonal included.
pub fn weak_dep_metric(sigma: &CorrelationMatrix) -> f64 {
    let p = sigma.dim();
    let rows: Vec<f64> = map_indexed(p, |i| {
        let abs: Vec<f64> = sigma.row(i).iter().map(|v| libm::fabs(*v)).collect();
        pairwise_sum(&abs)
    });
    pairwise_sum(&rows) / (p as f64 * p as f64)
}

/// How many principal factors [`pfa_reduce`] removes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PfaPolicy {
    /// Remove exactly this many factors.
    FixedK(usize),
    /// Remove the fewest factors that bring [`weak_dep_metric`] below the
    /// threshold.
    Criterion(f64),
}

/// Result of [`pfa_reduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct PfaResult {
    pub sigma: CorrelationMatrix,
    pub k_used: usize,
    pub metric: f64,
}

fn standardize(a: &Matrix, k: usize) -> Result<CorrelationMatrix> {
    let p = a.rows;
    let mut scale = Vec::with_capacity(p);
    for i in 0..p {
        let d = a.get(i, i);
        if !(d > PFA_DIAGONAL_FLOOR) {
            return Err(Error::DiagonalCollapse { k, index: i });
        }
        scale.push(1.0 / libm::sqrt(d));
    }
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let v = if i == j { 1.0 } else { (a.get(i, j) * scale[i] * scale[j]).clamp(-1.0, 1.0) };
            m.set(i, j, v);
        }
    }
    Ok(CorrelationMatrix { inner: m })
}

/// Principal factor approximation: subtract the top-k eigencomponents of Σ
/// and re-standardize the residual to unit diagonal.
pub fn pfa_reduce(sigma: &CorrelationMatrix, policy: PfaPolicy) -> Result<PfaResult> {
    let p = sigma.dim();
    match policy {
        PfaPolicy::FixedK(0) => Ok(PfaResult { metric: weak_dep_metric(sigma), sigma: sigma.clone(), k_used: 0 }),
        PfaPolicy::FixedK(k) => {
            if k >= p {
                return Err(Error::Domain("number of removed factors must be below p"));
            }
            let eig = sym_eigen(sigma.as_matrix())?;
            let mut a = sigma.as_matrix().clone();
            for f in 0..k {
                subtract_component(&mut a, eig.values[f], &eig.vector(f));
            }
            let out = standardize(&a, k)?;
            Ok(PfaResult { metric: weak_dep_metric(&out), sigma: out, k_used: k })
        }
        PfaPolicy::Criterion(threshold) => {
            if !(threshold > 0.0 && threshold <= 1.0) {
                return Err(Error::Domain("PFA threshold must lie in (0, 1]"));
            }
            let metric = weak_dep_metric(sigma);
            if metric < threshold {
                return Ok(PfaResult { metric, sigma: sigma.clone(), k_used: 0 });
            }
            let eig = sym_eigen(sigma.as_matrix())?;
            let mut a = sigma.as_matrix().clone();
            for k in 1..p {
                subtract_component(&mut a, eig.values[k - 1], &eig.vector(k - 1));
                let out = standardize(&a, k)?;
                let metric = weak_dep_metric(&out);
                if metric < threshold {
                    return Ok(PfaResult { metric, sigma: out, k_used: k });
                }
            }
            Err(Error::CriterionUnreachable { threshold })
        }
    }
}

fn subtract_component(a: &mut Matrix, lambda: f64, gamma: &[f64]) {
    let p = a.rows;
    for i in 0..p {
        let gi = lambda * gamma[i];
        let row = &mut a.data[i * p..(i + 1) * p];
        for (x, gj) in row.iter_mut().zip(gamma) {
            *x -= gi * gj;
        }
    }
}
