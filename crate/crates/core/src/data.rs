//! Row-major observation matrix.

use crate::error::{CecError, Result};

/// An `n x dim` matrix of observations, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values. Every entry must be finite.
    pub fn new(rows: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(CecError::InvalidParameter("dimension must be at least 1".into()));
        }
        if values.len() != rows * dim {
            return Err(CecError::DimensionMismatch {
                expected: rows * dim,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CecError::InvalidParameter("data contains non-finite values".into()));
        }
        Ok(Self { rows, dim, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(CecError::EmptySample)?;
        let dim = first.as_ref().len();
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(CecError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), dim, values)
    }

    /// Single-column matrix.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copy of the data with `shift` added to every row.
    pub fn translated(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim);
        let values = self
            .values
            .chunks_exact(self.dim)
            .flat_map(|row| row.iter().zip(shift).map(|(a, b)| a + b))
            .collect();
        Self {
            rows: self.rows,
            dim: self.dim,
            values,
        }
    }

    /// Extracts a subset of columns.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.dim) {
            return Err(CecError::InvalidParameter(format!("column {bad} out of range")));
        }
        let values = self
            .iter_rows()
            .flat_map(|row| columns.iter().map(move |&c| row[c]))
            .collect();
        Self::new(self.rows, columns.len(), values)
    }
}
