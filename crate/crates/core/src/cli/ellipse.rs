use serde::{Deserialize, Serialize};

use crate::engine::CecResult;
use crate::error::{CecError, Result};

/// Principal axes of a 2-D cluster's fitted covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: Vec<f64>,
    /// Unit axes, major first.
    pub axes: Vec<Vec<f64>>,
    /// Semi-axis lengths at one standard deviation, major first.
    pub radii: Vec<f64>,
    pub radii_2sigma: Vec<f64>,
}

pub fn emit_ellipses(result: &CecResult) -> Result<Vec<Ellipse>> {
    result
        .means
        .iter()
        .zip(&result.model_covariances)
        .map(|(mean, cov)| {
            if cov.dim() != 2 {
                return Err(CecError::EllipseDimension(cov.dim()));
            }
            let eig = cov.eigen();
            let radii: Vec<f64> = eig.values.iter().rev().map(|l| l.max(0.0).sqrt()).collect();
            Ok(Ellipse {
                center: mean.clone(),
                axes: eig.vectors.iter().rev().cloned().collect(),
                radii_2sigma: radii.iter().map(|r| 2.0 * r).collect(),
                radii,
            })
        })
        .collect()
}
