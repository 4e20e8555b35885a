//! CSV input: comma separated, UTF-8, optional single header row.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::data::DataMatrix;
use crate::error::{CecError, Result};

pub fn ingest_csv(path: &Path) -> Result<DataMatrix> {
    let file = File::open(path).map_err(|e| CecError::Io(format!("{}: {e}", path.display())))?;
    read_csv(file)
}

/// Parses numeric rows. A first row that is not entirely numeric is taken
/// as a header and skipped.
pub fn read_csv<R: Read>(reader: R) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut values = Vec::new();
    let mut dim: Option<usize> = None;
    let mut rows = 0;
    for (index, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CecError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(index + 1, |p| p.line() as usize);
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if index == 0 => continue,
            Err(_) => {
                let cell = record.iter().find(|c| c.parse::<f64>().is_err()).unwrap_or("");
                return Err(CecError::Parse {
                    line,
                    message: format!("non-numeric cell '{cell}'"),
                });
            }
        };
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(CecError::Parse {
                line,
                message: format!("non-finite value {bad}"),
            });
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(CecError::Parse {
                    line,
                    message: format!("expected {d} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    let dim = dim.ok_or(CecError::Parse {
        line: 1,
        message: "no data rows".into(),
    })?;
    if rows < 2 {
        return Err(CecError::Parse {
            line: 1,
            message: format!("need at least 2 data rows, found {rows}"),
        });
    }
    DataMatrix::new(rows, dim, values)
}
