//! Small dense symmetric linear algebra and cluster sufficient statistics.
//!
//! Everything here targets the low dimensions typical of clustering
//! (a handful up to a few dozen coordinates). Matrices are stored densely
//! with both triangles kept in sync, so symmetry holds exactly.

use crate::data::DataMatrix;
use crate::error::{CecError, Result};

/// Relative off-diagonal threshold for the Jacobi sweep.
const JACOBI_TOLERANCE: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Pivots below this fraction of the largest entry are treated as zero.
const SINGULAR_TOLERANCE: f64 = 1e-12;

/// Dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = scale;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = d;
        }
        m
    }

    /// Builds a matrix from rows. The upper triangle is mirrored into the
    /// lower one after checking that the input is symmetric to `1e-9`
    /// relative to its largest entry.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(CecError::InvalidParameter("empty matrix".into()));
        }
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(CecError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(CecError::InvalidParameter("matrix has non-finite entries".into()));
            }
            m.data[i * dim..(i + 1) * dim].copy_from_slice(row);
        }
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (m.get(i, j) - m.get(j, i)).abs() > 1e-9 * scale {
                    return Err(CecError::InvalidParameter("matrix is not symmetric".into()));
                }
                let v = m.get(i, j);
                m.data[j * dim + i] = v;
            }
        }
        Ok(m)
    }

    /// Reconstructs `V diag(values) V^T` from eigenvectors (as columns of
    /// `vectors`, given here as a list of vectors).
    pub fn from_eigen(values: &[f64], vectors: &[Vec<f64>]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (lambda, v) in values.iter().zip(vectors) {
            m.add_outer(*lambda, v);
        }
        m.symmetrize();
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets entries `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks_exact(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += c * u u^T`
    #[inline]
    pub fn add_outer(&mut self, c: f64, u: &[f64]) {
        let n = self.dim;
        for i in 0..n {
            let cu = c * u[i];
            let row = &mut self.data[i * n..(i + 1) * n];
            for (r, uj) in row.iter_mut().zip(u) {
                *r += cu * uj;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    /// Mirrors the upper triangle onto the lower one.
    fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Quadratic form `x^T M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.data
            .chunks_exact(self.dim)
            .zip(x)
            .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    /// Full (not necessarily symmetric) product, row-major.
    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &SymMatrix) -> f64 {
        // both symmetric, so tr(AB) = sum_ij A_ij B_ij
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Determinant. Closed forms up to 3x3, LU with partial pivoting above.
    pub fn det(&self) -> f64 {
        let a = &self.data;
        match self.dim {
            1 => a[0],
            2 => a[0] * a[3] - a[1] * a[2],
            3 => {
                a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                    + a[2] * (a[3] * a[7] - a[4] * a[6])
            }
            n => {
                let mut lu = a.clone();
                let mut det = 1.0;
                for col in 0..n {
                    let pivot = (col..n)
                        .max_by(|&x, &y| lu[x * n + col].abs().total_cmp(&lu[y * n + col].abs()))
                        .unwrap();
                    if lu[pivot * n + col] == 0.0 {
                        return 0.0;
                    }
                    if pivot != col {
                        for j in 0..n {
                            lu.swap(col * n + j, pivot * n + j);
                        }
                        det = -det;
                    }
                    let p = lu[col * n + col];
                    det *= p;
                    for r in (col + 1)..n {
                        let f = lu[r * n + col] / p;
                        if f != 0.0 {
                            for j in col..n {
                                lu[r * n + j] -= f * lu[col * n + j];
                            }
                        }
                    }
                }
                det
            }
        }
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<SymMatrix> {
        let n = self.dim;
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(CecError::SingularMatrix);
        }
        let mut a = self.data.clone();
        let mut inv = SymMatrix::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
                .unwrap();
            if a[pivot * n + col].abs() <= SINGULAR_TOLERANCE * scale {
                return Err(CecError::SingularMatrix);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    inv.swap(col * n + j, pivot * n + j);
                }
            }
            let p = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= p;
                inv[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f != 0.0 {
                    for j in 0..n {
                        a[r * n + j] -= f * a[col * n + j];
                        inv[r * n + j] -= f * inv[col * n + j];
                    }
                }
            }
        }
        let mut out = SymMatrix { dim: n, data: inv };
        out.symmetrize();
        Ok(out)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.dim {
            1 => vec![self.data[0]],
            2 => {
                // closed form, stable for nearly equal roots
                let (a, b, d) = (self.data[0], self.data[1], self.data[3]);
                let half_tr = 0.5 * (a + d);
                let r = (0.5 * (a - d)).hypot(b);
                vec![half_tr - r, half_tr + r]
            }
            _ => self.eigen().values,
        }
    }

    /// Full eigendecomposition by cyclic Jacobi rotations.
    pub fn eigen(&self) -> SymEigen {
        jacobi_eigen(self)
    }
}

/// Eigenpairs of a symmetric matrix, ascending by eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

fn jacobi_eigen(m: &SymMatrix) -> SymEigen {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = SymMatrix::identity(n).data;
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= JACOBI_TOLERANCE * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    SymEigen {
        values: order.iter().map(|&i| a[i * n + i]).collect(),
        vectors: order
            .iter()
            .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
            .collect(),
    }
}

/// Cardinality, mean and divide-by-n covariance of a point set.
///
/// An empty set carries an all-zero mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: Vec<f64>,
    pub cov: SymMatrix,
}

impl Moments {
    pub fn empty(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            cov: SymMatrix::zeros(dim),
        }
    }

    pub fn of_point(x: &[f64]) -> Self {
        Self {
            count: 1,
            mean: x.to_vec(),
            cov: SymMatrix::zeros(x.len()),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    fn reset(&mut self) {
        self.count = 0;
        self.mean.iter_mut().for_each(|v| *v = 0.0);
        self.cov.data.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Two-pass estimate over the selected rows.
    pub fn of_rows(data: &DataMatrix, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(CecError::EmptySample);
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= data.rows()) {
            return Err(CecError::RowOutOfRange {
                index: bad,
                rows: data.rows(),
            });
        }
        Ok(Self::of_points(rows.iter().map(|&r| data.row(r)), data.dim()))
    }

    /// Two-pass estimate over an arbitrary point iterator. Returns the empty
    /// sentinel when the iterator yields nothing.
    pub fn of_points<'a, I>(points: I, dim: usize) -> Self
    where
        I: Iterator<Item = &'a [f64]> + Clone,
    {
        let mut out = Self::empty(dim);
        for x in points.clone() {
            out.count += 1;
            out.mean.iter_mut().zip(x).for_each(|(m, v)| *m += v);
        }
        if out.count == 0 {
            return out;
        }
        let inv = 1.0 / out.count as f64;
        out.mean.iter_mut().for_each(|m| *m *= inv);
        let mut d = vec![0.0; dim];
        for x in points {
            d.iter_mut()
                .zip(x.iter().zip(&out.mean))
                .for_each(|(di, (xi, mi))| *di = xi - mi);
            out.cov.add_outer(inv, &d);
        }
        out.cov.symmetrize();
        out
    }

    /// Moments of the disjoint union.
    pub fn merge(&self, other: &Moments) -> Result<Moments> {
        self.check_dim(other)?;
        let total = self.count + other.count;
        if total == 0 {
            return Err(CecError::EmptySample);
        }
        if other.count == 0 {
            return Ok(self.clone());
        }
        if self.count == 0 {
            return Ok(other.clone());
        }
        let p1 = self.count as f64 / total as f64;
        let p2 = other.count as f64 / total as f64;
        let diff: Vec<f64> = self.mean.iter().zip(&other.mean).map(|(a, b)| a - b).collect();
        let mean = self
            .mean
            .iter()
            .zip(&other.mean)
            .map(|(a, b)| p1 * a + p2 * b)
            .collect();
        let mut cov = self.cov.clone();
        cov.scale(p1);
        for (c, o) in cov.data.iter_mut().zip(&other.cov.data) {
            *c += p2 * o;
        }
        cov.add_outer(p1 * p2, &diff);
        Ok(Moments {
            count: total,
            mean,
            cov,
        })
    }

    /// Moments of `self \ subset`, where `subset` describes points contained
    /// in `self`.
    pub fn subtract(&self, subset: &Moments) -> Result<Moments> {
        self.check_dim(subset)?;
        if self.count <= subset.count {
            return Err(CecError::NonPositiveDifference {
                superset: self.count,
                subset: subset.count,
            });
        }
        if subset.count == 0 {
            return Ok(self.clone());
        }
        let rest = (self.count - subset.count) as f64;
        let q1 = self.count as f64 / rest;
        let q2 = subset.count as f64 / rest;
        let diff: Vec<f64> = self.mean.iter().zip(&subset.mean).map(|(a, b)| a - b).collect();
        let mean = self
            .mean
            .iter()
            .zip(&subset.mean)
            .map(|(a, b)| q1 * a - q2 * b)
            .collect();
        let mut cov = self.cov.clone();
        cov.scale(q1);
        for (c, o) in cov.data.iter_mut().zip(&subset.cov.data) {
            *c -= q2 * o;
        }
        cov.add_outer(-q1 * q2, &diff);
        Ok(Moments {
            count: self.count - subset.count,
            mean,
            cov,
        })
    }

    /// Writes the moments of `self + {x}` into `out` without allocating.
    pub fn with_point_into(&self, x: &[f64], out: &mut Moments) {
        if self.count == 0 {
            out.reset();
            out.count = 1;
            out.mean.copy_from_slice(x);
            return;
        }
        let c = self.count as f64;
        let p1 = c / (c + 1.0);
        let p2 = 1.0 / (c + 1.0);
        out.count = self.count + 1;
        out.cov.data.copy_from_slice(&self.cov.data);
        out.cov.scale(p1);
        // reuse out.mean as scratch for the mean difference
        for ((o, m), xi) in out.mean.iter_mut().zip(&self.mean).zip(x) {
            *o = m - xi;
        }
        let coef = p1 * p2;
        let n = self.dim();
        for i in 0..n {
            let di = coef * out.mean[i];
            for j in 0..n {
                out.cov.data[i * n + j] += di * out.mean[j];
            }
        }
        for ((o, m), xi) in out.mean.iter_mut().zip(&self.mean).zip(x) {
            *o = p1 * m + p2 * xi;
        }
    }

    /// Writes the moments of `self \ {x}` into `out`. `x` must be one of
    /// the points summarized by `self`.
    pub fn without_point_into(&self, x: &[f64], out: &mut Moments) {
        debug_assert!(self.count >= 1);
        if self.count <= 1 {
            out.reset();
            return;
        }
        let c = self.count as f64;
        let q1 = c / (c - 1.0);
        let q2 = 1.0 / (c - 1.0);
        out.count = self.count - 1;
        out.cov.data.copy_from_slice(&self.cov.data);
        out.cov.scale(q1);
        for ((o, m), xi) in out.mean.iter_mut().zip(&self.mean).zip(x) {
            *o = m - xi;
        }
        let coef = -q1 * q2;
        let n = self.dim();
        for i in 0..n {
            let di = coef * out.mean[i];
            for j in 0..n {
                out.cov.data[i * n + j] += di * out.mean[j];
            }
        }
        for ((o, m), xi) in out.mean.iter_mut().zip(&self.mean).zip(x) {
            *o = q1 * m - q2 * xi;
        }
    }

    pub fn add_point(&mut self, x: &[f64]) {
        let mut out = Moments::empty(self.dim());
        self.with_point_into(x, &mut out);
        *self = out;
    }

    pub fn remove_point(&mut self, x: &[f64]) {
        let mut out = Moments::empty(self.dim());
        self.without_point_into(x, &mut out);
        *self = out;
    }

    /// Copies `other` into `self` without reallocating.
    pub fn copy_from(&mut self, other: &Moments) {
        self.count = other.count;
        self.mean.copy_from_slice(&other.mean);
        self.cov.data.copy_from_slice(&other.cov.data);
    }

    fn check_dim(&self, other: &Moments) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(CecError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Largest entry-wise deviation between two moment sets, relative to
    /// the scale of `reference`.
    pub fn relative_deviation(&self, reference: &Moments) -> f64 {
        let mean_scale = reference.mean.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let cov_scale = reference.cov.max_abs();
        let mean_dev = self
            .mean
            .iter()
            .zip(&reference.mean)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        let cov_dev = self
            .cov
            .data
            .iter()
            .zip(&reference.cov.data)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        let scale = mean_scale.max(cov_scale).max(f64::MIN_POSITIVE);
        mean_dev.max(cov_dev) / scale
    }
}
