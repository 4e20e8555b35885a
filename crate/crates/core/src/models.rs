//! Gaussian subfamilies and their closed-form cross-entropies.
//!
//! For a cluster `X` with covariance estimate `S = cov(X)` in dimension `N`,
//! the optimal cross-entropy over each family is (in nats):
//!
//! | family              | cost                                              |
//! |---------------------|---------------------------------------------------|
//! | all Gaussians       | `N/2 ln(2 pi e) + 1/2 ln det S`                   |
//! | spherical           | `N/2 ln(2 pi e / N) + N/2 ln tr S`                |
//! | fixed radius `r`    | `N/2 ln(2 pi) + N/2 ln r + tr S / (2r)`           |
//! | diagonal            | `N/2 ln(2 pi e) + 1/2 ln det diag S`              |
//! | fixed covariance    | `N/2 ln(2 pi) + 1/2 tr(Sigma^-1 S) + 1/2 ln det Sigma` |
//! | fixed eigenvalues   | `N/2 ln(2 pi) + 1/2 sum l_i(S)/l_i + 1/2 ln prod l_i`  |
//!
//! Degenerate clusters (for instance a zero determinant under the
//! unconstrained family) evaluate to `+inf`.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CecError, Result};
use crate::linalg::{Moments, SymMatrix};

/// Name of a Gaussian subfamily.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    All,
    Spherical,
    #[serde(rename = "fixedr")]
    FixedRadius,
    Diagonal,
    #[serde(rename = "covariance")]
    FixedCovariance,
    #[serde(rename = "eigenvalues")]
    FixedEigenvalues,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::All,
        FamilyKind::Spherical,
        FamilyKind::FixedRadius,
        FamilyKind::Diagonal,
        FamilyKind::FixedCovariance,
        FamilyKind::FixedEigenvalues,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::All => "all",
            FamilyKind::Spherical => "spherical",
            FamilyKind::FixedRadius => "fixedr",
            FamilyKind::Diagonal => "diagonal",
            FamilyKind::FixedCovariance => "covariance",
            FamilyKind::FixedEigenvalues => "eigenvalues",
        }
    }

    /// Whether the family needs a parameter (`r`, a matrix, or eigenvalues).
    pub fn takes_parameter(self) -> bool {
        matches!(
            self,
            FamilyKind::FixedRadius | FamilyKind::FixedCovariance | FamilyKind::FixedEigenvalues
        )
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = CecError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "all" => Ok(FamilyKind::All),
            "spherical" => Ok(FamilyKind::Spherical),
            "fixedr" => Ok(FamilyKind::FixedRadius),
            "diagonal" => Ok(FamilyKind::Diagonal),
            "covariance" | "covariances" => Ok(FamilyKind::FixedCovariance),
            "eigenvalues" | "eigen" => Ok(FamilyKind::FixedEigenvalues),
            other => Err(CecError::InvalidParameter(format!("unknown type '{other}'"))),
        }
    }
}

/// A Gaussian subfamily together with its fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    All,
    Spherical,
    FixedRadius {
        r: f64,
    },
    Diagonal,
    FixedCovariance {
        sigma: SymMatrix,
        inverse: SymMatrix,
        log_det: f64,
    },
    /// Eigenvalues kept sorted ascending.
    FixedEigenvalues {
        lambdas: Vec<f64>,
    },
}

impl FamilySpec {
    pub fn fixed_radius(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(CecError::InvalidParameter(format!(
                "fixedr radius must be positive, got {r}"
            )));
        }
        Ok(FamilySpec::FixedRadius { r })
    }

    pub fn fixed_covariance(sigma: SymMatrix) -> Result<Self> {
        let eig = sigma.eigenvalues();
        let floor = 1e-12 * sigma.trace().abs();
        if eig.iter().any(|&l| l <= floor) || !sigma.is_finite() {
            return Err(CecError::InvalidParameter(
                "covariance parameter must be positive definite".into(),
            ));
        }
        let inverse = sigma.inverse()?;
        let log_det = eig.iter().map(|l| l.ln()).sum();
        Ok(FamilySpec::FixedCovariance {
            sigma,
            inverse,
            log_det,
        })
    }

    /// Eigenvalues may be given in any order; they are stored ascending.
    pub fn fixed_eigenvalues(mut lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(CecError::InvalidParameter(
                "eigenvalues must be positive and finite".into(),
            ));
        }
        lambdas.sort_by(f64::total_cmp);
        Ok(FamilySpec::FixedEigenvalues { lambdas })
    }

    /// Parameterless family by kind.
    pub fn simple(kind: FamilyKind) -> Result<Self> {
        match kind {
            FamilyKind::All => Ok(FamilySpec::All),
            FamilyKind::Spherical => Ok(FamilySpec::Spherical),
            FamilyKind::Diagonal => Ok(FamilySpec::Diagonal),
            other => Err(CecError::InvalidParameter(format!(
                "type '{other}' requires a parameter"
            ))),
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            FamilySpec::All => FamilyKind::All,
            FamilySpec::Spherical => FamilyKind::Spherical,
            FamilySpec::FixedRadius { .. } => FamilyKind::FixedRadius,
            FamilySpec::Diagonal => FamilyKind::Diagonal,
            FamilySpec::FixedCovariance { .. } => FamilyKind::FixedCovariance,
            FamilySpec::FixedEigenvalues { .. } => FamilyKind::FixedEigenvalues,
        }
    }

    /// Dimension pinned by the parameter, if any.
    pub fn param_dim(&self) -> Option<usize> {
        match self {
            FamilySpec::FixedCovariance { sigma, .. } => Some(sigma.dim()),
            FamilySpec::FixedEigenvalues { lambdas } => Some(lambdas.len()),
            _ => None,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.param_dim() {
            Some(d) if d != dim => Err(CecError::DimensionMismatch {
                expected: dim,
                got: d,
            }),
            _ => Ok(()),
        }
    }

    /// Cross-entropy of the cluster summarized by `m` with respect to this
    /// family, or `+inf` when the cluster is degenerate for the family.
    pub fn cross_entropy(&self, m: &Moments) -> f64 {
        self.log_constant(m.cov.dim()) + self.shape_cost(&m.cov)
    }

    /// Part of the cross-entropy that does not depend on the data.
    pub fn log_constant(&self, dim: usize) -> f64 {
        let n = dim as f64;
        let half_n = 0.5 * n;
        match self {
            FamilySpec::All | FamilySpec::Diagonal => half_n * (2.0 * PI * E).ln(),
            FamilySpec::Spherical => half_n * (2.0 * PI * E / n).ln(),
            FamilySpec::FixedRadius { r } => half_n * (2.0 * PI).ln() + half_n * r.ln(),
            FamilySpec::FixedCovariance { log_det, .. } => half_n * (2.0 * PI).ln() + 0.5 * log_det,
            FamilySpec::FixedEigenvalues { lambdas } => {
                half_n * (2.0 * PI).ln() + 0.5 * lambdas.iter().map(|l| l.ln()).sum::<f64>()
            }
        }
    }

    /// `shape_cost` of the cluster `m` with `x` added, avoiding a full
    /// covariance update where the family allows. `scratch` must have the
    /// dimension of `m`.
    pub fn added_shape_cost(&self, m: &Moments, x: &[f64], scratch: &mut Moments) -> f64 {
        if m.count > 0 {
            let c = m.count as f64;
            let p1 = c / (c + 1.0);
            if let Some(v) = self.rank_one_shape_cost(m, x, p1, p1 / (c + 1.0)) {
                return v;
            }
        }
        m.with_point_into(x, scratch);
        self.shape_cost(&scratch.cov)
    }

    /// `shape_cost` of the cluster `m` with its member `x` taken out.
    pub fn removed_shape_cost(&self, m: &Moments, x: &[f64], scratch: &mut Moments) -> f64 {
        if m.count > 1 {
            let c = m.count as f64;
            let q1 = c / (c - 1.0);
            if let Some(v) = self.rank_one_shape_cost(m, x, q1, -q1 / (c - 1.0)) {
                return v;
            }
        }
        m.without_point_into(x, scratch);
        self.shape_cost(&scratch.cov)
    }

    /// Shape cost of `p1 * cov + w * (mean - x)(mean - x)^T`, when it has a
    /// cheap closed form.
    #[inline]
    fn rank_one_shape_cost(&self, m: &Moments, x: &[f64], p1: f64, w: f64) -> Option<f64> {
        let dim = m.cov.dim();
        let s = m.cov.as_slice();
        let d = |i: usize| m.mean[i] - x[i];
        let half_n = 0.5 * dim as f64;
        match self {
            FamilySpec::Spherical | FamilySpec::FixedRadius { .. } => {
                let mut tr = 0.0;
                let mut dd = 0.0;
                for i in 0..dim {
                    tr += s[i * dim + i];
                    dd += d(i) * d(i);
                }
                let tr = p1 * tr + w * dd;
                Some(match self {
                    FamilySpec::FixedRadius { r } => tr / (2.0 * r),
                    _ if tr > 0.0 => half_n * tr.ln(),
                    _ => f64::INFINITY,
                })
            }
            FamilySpec::Diagonal => {
                let mut prod = 1.0;
                for i in 0..dim {
                    let v = p1 * s[i * dim + i] + w * d(i) * d(i);
                    if v <= 0.0 {
                        return Some(f64::INFINITY);
                    }
                    prod *= v;
                }
                (prod > 0.0 && prod.is_finite()).then(|| 0.5 * prod.ln())
            }
            FamilySpec::FixedCovariance { inverse, .. } => {
                let quad: f64 = (0..dim)
                    .map(|i| d(i) * (0..dim).map(|j| inverse.get(i, j) * d(j)).sum::<f64>())
                    .sum();
                Some(0.5 * (p1 * inverse.trace_of_product(&m.cov) + w * quad))
            }
            FamilySpec::All if dim <= 2 => {
                let det = if dim == 1 {
                    p1 * s[0] + w * d(0) * d(0)
                } else {
                    let (d0, d1) = (d(0), d(1));
                    let a = p1 * s[0] + w * d0 * d0;
                    let b = p1 * s[1] + w * d0 * d1;
                    let e = p1 * s[3] + w * d1 * d1;
                    a * e - b * b
                };
                Some(if det > 0.0 { 0.5 * det.ln() } else { f64::INFINITY })
            }
            FamilySpec::FixedEigenvalues { lambdas } if dim == 2 => {
                let (d0, d1) = (d(0), d(1));
                let a = p1 * s[0] + w * d0 * d0;
                let b = p1 * s[1] + w * d0 * d1;
                let e = p1 * s[3] + w * d1 * d1;
                let half_tr = 0.5 * (a + e);
                let r = (0.5 * (a - e)).hypot(b);
                Some(0.5 * ((half_tr - r) / lambdas[0] + (half_tr + r) / lambdas[1]))
            }
            _ => None,
        }
    }

    /// Precomputed data for `ShapeBound::lower` on the cluster `m`.
    pub fn shape_bound(&self, m: &Moments) -> ShapeBound {
        let cov = &m.cov;
        if m.count == 0 {
            return ShapeBound::none();
        }
        let n = cov.dim() as f64;
        let c = m.count as f64;
        let log_p1 = (c / (c + 1.0)).ln();
        let scale = 1.0 / (c + 1.0);
        match self {
            FamilySpec::Spherical => {
                let tr = cov.trace();
                if tr > 0.0 {
                    ShapeBound {
                        base: 0.5 * n * (log_p1 + tr.ln()),
                        half: 0.5 * n,
                        kernel: Kernel::Spherical(scale / tr),
                    }
                } else {
                    ShapeBound::none()
                }
            }
            FamilySpec::Diagonal => {
                let diag = cov.diagonal();
                if diag.iter().all(|&d| d > 0.0) {
                    let log_sum: f64 = diag.iter().map(|d| d.ln()).sum();
                    ShapeBound {
                        base: 0.5 * (n * log_p1 + log_sum),
                        half: 0.5,
                        kernel: Kernel::Diagonal(diag.iter().map(|d| scale / d).collect()),
                    }
                } else {
                    ShapeBound::none()
                }
            }
            FamilySpec::All => {
                let det = cov.det();
                match cov.inverse() {
                    Ok(inverse) if det > 0.0 => ShapeBound {
                        base: 0.5 * (n * log_p1 + det.ln()),
                        half: 0.5,
                        kernel: Kernel::All({
                            let mut w = inverse;
                            w.scale(scale);
                            w
                        }),
                    },
                    _ => ShapeBound::none(),
                }
            }
            _ => ShapeBound::none(),
        }
    }

    /// Data-dependent part of the cross-entropy for a sample covariance.
    pub fn shape_cost(&self, cov: &SymMatrix) -> f64 {
        let half_n = 0.5 * cov.dim() as f64;
        match self {
            FamilySpec::All => {
                let det = cov.det();
                if det > 0.0 {
                    0.5 * det.ln()
                } else {
                    f64::INFINITY
                }
            }
            FamilySpec::Spherical => {
                let tr = cov.trace();
                if tr > 0.0 {
                    half_n * tr.ln()
                } else {
                    f64::INFINITY
                }
            }
            FamilySpec::FixedRadius { r } => cov.trace() / (2.0 * r),
            FamilySpec::Diagonal => {
                let mut prod = 1.0;
                for i in 0..cov.dim() {
                    let d = cov.get(i, i);
                    if d <= 0.0 {
                        return f64::INFINITY;
                    }
                    prod *= d;
                }
                if prod > 0.0 && prod.is_finite() {
                    0.5 * prod.ln()
                } else {
                    // product under- or overflowed
                    0.5 * (0..cov.dim()).map(|i| cov.get(i, i).ln()).sum::<f64>()
                }
            }
            FamilySpec::FixedCovariance { inverse, .. } => 0.5 * inverse.trace_of_product(cov),
            FamilySpec::FixedEigenvalues { lambdas } => {
                let empirical = cov.eigenvalues();
                0.5 * empirical.iter().zip(lambdas).map(|(x, l)| x / l).sum::<f64>()
            }
        }
    }

    /// The covariance of the best-fitting member of the family.
    pub fn fitted_covariance(&self, m: &Moments) -> SymMatrix {
        let cov = &m.cov;
        let dim = cov.dim();
        match self {
            FamilySpec::All => cov.clone(),
            FamilySpec::Spherical => SymMatrix::scaled_identity(dim, cov.trace() / dim as f64),
            FamilySpec::FixedRadius { r } => SymMatrix::scaled_identity(dim, *r),
            FamilySpec::Diagonal => SymMatrix::from_diagonal(&cov.diagonal()),
            FamilySpec::FixedCovariance { sigma, .. } => sigma.clone(),
            FamilySpec::FixedEigenvalues { lambdas } => {
                // rotate into the empirical eigenbasis, ascending paired with ascending
                let eig = cov.eigen();
                SymMatrix::from_eigen(lambdas, &eig.vectors)
            }
        }
    }

    /// Parameter as plain numbers: `[]`, `[r]`, row-major matrix, or eigenvalues.
    pub fn parameter_values(&self) -> Vec<f64> {
        match self {
            FamilySpec::FixedRadius { r } => vec![*r],
            FamilySpec::FixedCovariance { sigma, .. } => sigma.as_slice().to_vec(),
            FamilySpec::FixedEigenvalues { lambdas } => lambdas.clone(),
            _ => Vec::new(),
        }
    }
}

/// A Gaussian density with cached inverse covariance and normalizer.
#[derive(Debug, Clone)]
pub struct Gaussian {
    mean: Vec<f64>,
    precision: SymMatrix,
    log_norm: f64,
}

impl Gaussian {
    pub fn new(mean: &[f64], cov: &SymMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(CecError::DimensionMismatch {
                expected: mean.len(),
                got: cov.dim(),
            });
        }
        let det = cov.det();
        if !(det > 0.0 && det.is_finite()) {
            return Err(CecError::SingularMatrix);
        }
        let precision = cov.inverse()?;
        let n = mean.len() as f64;
        Ok(Self {
            mean: mean.to_vec(),
            precision,
            log_norm: -0.5 * n * (2.0 * PI).ln() - 0.5 * det.ln(),
        })
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        self.log_norm - 0.5 * self.precision.quad_form(&d)
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.log_pdf(x).exp()
    }
}

/// Gaussian pdf at `x`.
pub fn gaussian_density(mean: &[f64], cov: &SymMatrix, x: &[f64]) -> Result<f64> {
    Ok(Gaussian::new(mean, cov)?.pdf(x))
}


/// Cheap lower bound on `added_shape_cost`, from `ln(1 + u) >= u / (1 + u)`.
///
/// The bound has the form `base + half * h(x)` with `h` in `[0, N)`.
#[derive(Debug, Clone)]
pub struct ShapeBound {
    pub base: f64,
    pub half: f64,
    kernel: Kernel,
}

#[derive(Debug, Clone)]
enum Kernel {
    None,
    Spherical(f64),
    Diagonal(Vec<f64>),
    All(SymMatrix),
}

impl ShapeBound {
    pub fn none() -> Self {
        Self { base: f64::NEG_INFINITY, half: 0.0, kernel: Kernel::None }
    }

    pub fn is_none(&self) -> bool {
        matches!(self.kernel, Kernel::None)
    }

    /// The weight `w` when `h(x) = u / (1 + u)` with `u = w |x - mean|^2`.
    pub fn spherical_weight(&self) -> Option<f64> {
        match self.kernel {
            Kernel::Spherical(w) => Some(w),
            _ => None,
        }
    }

    /// The `h` part of the bound for adding `x` to a cluster with mean `mean`.
    #[inline]
    pub fn kernel(&self, mean: &[f64], x: &[f64]) -> f64 {
        match &self.kernel {
            Kernel::None => 0.0,
            Kernel::Spherical(w) => {
                let dd: f64 = mean.iter().zip(x).map(|(m, x)| (m - x) * (m - x)).sum();
                let u = w * dd;
                u / (1.0 + u)
            }
            Kernel::Diagonal(w) => {
                let mut acc = 0.0;
                for ((m, x), w) in mean.iter().zip(x).zip(w) {
                    let u = (m - x) * (m - x) * w;
                    acc += u / (1.0 + u);
                }
                acc
            }
            Kernel::All(w) => {
                let dim = mean.len();
                let mut v = 0.0;
                for i in 0..dim {
                    let di = mean[i] - x[i];
                    for j in 0..dim {
                        v += di * w.get(i, j) * (mean[j] - x[j]);
                    }
                }
                let v = v.max(0.0);
                v / (1.0 + v)
            }
        }
    }

    /// Lower bound on the shape cost after adding `x` to `m`.
    pub fn lower(&self, m: &Moments, x: &[f64]) -> f64 {
        if self.is_none() {
            return f64::NEG_INFINITY;
        }
        self.base + self.half * self.kernel(&m.mean, x)
    }
}
