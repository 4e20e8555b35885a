//! Versioned JSON result document.
//!
//! Field order is fixed by the struct definitions and every float is written
//! with 17 significant digits, so parsing a document and writing it again
//! reproduces it byte for byte.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use super::ellipse::Ellipse;
use crate::engine::CecResult;
use crate::error::{CecError, Result};
use crate::models::FamilyKind;

pub const SCHEMA_VERSION: u32 = 1;

/// Echo of the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<String>,
    pub rows: usize,
    pub dim: usize,
    pub centers: usize,
    pub types: Vec<FamilyKind>,
    pub params: Vec<Vec<f64>>,
    pub nstart: usize,
    pub iter_max: usize,
    pub card_min: String,
    pub card_min_points: usize,
    pub init: String,
    pub method: String,
    pub seed: u64,
}

/// The clustering outcome. Cluster labels are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBody {
    pub cluster: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<Vec<f64>>>,
    pub covariances_model: Vec<Vec<Vec<f64>>>,
    pub types: Vec<FamilyKind>,
    pub params: Vec<Vec<f64>>,
    pub cost_function: Vec<f64>,
    pub nclusters: Vec<usize>,
    pub final_cost_function: f64,
    pub final_nclusters: usize,
    pub iterations: usize,
    pub start_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

impl ResultBody {
    pub fn from_result(result: &CecResult, with_time: bool) -> Self {
        Self {
            cluster: result.membership.clone(),
            probabilities: result.probabilities.clone(),
            centers: result.means.clone(),
            covariances: result.covariances.iter().map(|c| c.to_rows()).collect(),
            covariances_model: result.model_covariances.iter().map(|c| c.to_rows()).collect(),
            types: result.families.iter().map(|f| f.kind()).collect(),
            params: result.families.iter().map(|f| f.parameter_values()).collect(),
            cost_function: result.energy_trace.clone(),
            nclusters: result.nclusters_trace.clone(),
            final_cost_function: result.final_energy,
            final_nclusters: result.nclusters(),
            iterations: result.iterations,
            start_seed: result.seed,
            time: with_time.then_some(result.elapsed_seconds),
        }
    }
}

/// Exhaustive minimum reported alongside the engine result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub energy: f64,
    pub cluster: Vec<usize>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: u32,
    pub run: RunEcho,
    pub result: ResultBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipses: Option<Vec<Ellipse>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
}

/// Compact JSON with floats in `{:.16e}` form.
struct FixedDigits(CompactFormatter);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

impl ResultDocument {
    pub fn to_string(&self) -> Result<String> {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(CompactFormatter));
        self.serialize(&mut ser)
            .map_err(|e| CecError::Io(format!("serializing result: {e}")))?;
        out.push(b'\n');
        String::from_utf8(out).map_err(|e| CecError::Io(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CecError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}
