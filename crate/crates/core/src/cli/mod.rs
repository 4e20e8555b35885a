//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

pub mod document;
pub mod ellipse;
pub mod generate;
pub mod ingest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::data::DataMatrix;
use crate::engine::{run, CardMin, CecConfig, Method};
use crate::error::CecError;
use crate::init::InitMethod;
use crate::linalg::SymMatrix;
use crate::models::{FamilyKind, FamilySpec};
use crate::oracle::brute_force_min;

pub use document::{OracleRecord, ResultBody, ResultDocument, RunEcho};
pub use ellipse::{emit_ellipses, Ellipse};
pub use generate::{generate, generate_labeled, DatasetName, LabeledData};
pub use ingest::{ingest_csv, read_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Cross-entropy clustering of CSV or generated data.
#[derive(Debug, Clone, Parser)]
#[command(name = "cec", version, about)]
pub struct RunSpec {
    /// Input CSV (comma separated, optional header row)
    #[arg(long, value_name = "PATH", required_unless_present = "generate", conflicts_with = "generate")]
    pub input: Option<PathBuf>,

    /// Use a generated dataset instead of a file
    #[arg(long, value_enum, value_name = "NAME")]
    pub generate: Option<DatasetName>,

    /// Initial number of clusters
    #[arg(long, value_name = "K")]
    pub centers: usize,

    /// Comma-separated family list, one entry or one per cluster:
    /// all, spherical, fixedr, diagonal, covariance, eigenvalues
    #[arg(long = "type", value_name = "LIST", default_value = "all")]
    pub types: String,

    /// Comma-separated parameters aligned with --type; `-` for none,
    /// space-separated numbers for vectors, `;` between matrix rows
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub param: Option<String>,

    #[arg(long, default_value_t = 1)]
    pub nstart: usize,

    #[arg(long, default_value_t = 100)]
    pub iter_max: usize,

    /// Minimal cluster size: percentage ("5%") or point count
    #[arg(long, default_value = "5%")]
    pub card_min: String,

    /// random or kmeans++
    #[arg(long, default_value = "kmeans++")]
    pub init: String,

    /// hartigan or lloyd
    #[arg(long, default_value = "hartigan")]
    pub method: String,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Write the result document here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Also write one 1-based label per input row
    #[arg(long, value_name = "PATH")]
    pub membership_csv: Option<PathBuf>,

    /// Include per-cluster ellipse parameters (2-D data only)
    #[arg(long)]
    pub ellipses: bool,

    #[arg(long, hide = true)]
    pub oracle: bool,

    /// Number of generated points
    #[arg(long, default_value_t = 1000)]
    pub points: usize,

    /// Include wall-clock time in the document
    #[arg(long)]
    pub timing: bool,

    /// Run restarts sequentially
    #[arg(long)]
    pub no_parallel: bool,

    /// Stop at the first stall instead of trying cluster merges
    #[arg(long)]
    pub no_merge: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::Numeric(_) => EXIT_NUMERIC,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numeric(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// One parameter entry from `--param`.
fn parse_param_entry(entry: &str) -> Result<Vec<Vec<f64>>, Failure> {
    let entry = entry.trim();
    if entry.is_empty() || entry == "-" {
        return Ok(Vec::new());
    }
    entry
        .split(';')
        .map(|row| {
            row.split_whitespace()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| usage(format!("invalid number '{v}' in --param")))
                })
                .collect()
        })
        .collect()
}

fn build_family(kind: FamilyKind, rows: &[Vec<f64>], dim: usize) -> Result<FamilySpec, Failure> {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    match kind {
        FamilyKind::All | FamilyKind::Spherical | FamilyKind::Diagonal => {
            if !flat.is_empty() {
                return Err(usage(format!("type '{kind}' takes no parameter")));
            }
            FamilySpec::simple(kind).map_err(usage)
        }
        FamilyKind::FixedRadius => match flat[..] {
            [r] => FamilySpec::fixed_radius(r).map_err(usage),
            _ => Err(usage("type 'fixedr' needs exactly one number")),
        },
        FamilyKind::FixedEigenvalues => {
            if flat.len() != dim {
                return Err(usage(format!(
                    "type 'eigenvalues' needs {dim} numbers, got {}",
                    flat.len()
                )));
            }
            FamilySpec::fixed_eigenvalues(flat).map_err(usage)
        }
        FamilyKind::FixedCovariance => {
            if flat.len() != dim * dim {
                return Err(usage(format!(
                    "type 'covariance' needs a {dim}x{dim} matrix, got {} numbers",
                    flat.len()
                )));
            }
            if rows.len() != 1 && (rows.len() != dim || rows.iter().any(|r| r.len() != dim)) {
                return Err(usage("covariance rows do not form a square matrix"));
            }
            let matrix: Vec<&[f64]> = flat.chunks_exact(dim).collect();
            let sigma = SymMatrix::from_rows(&matrix).map_err(usage)?;
            FamilySpec::fixed_covariance(sigma).map_err(usage)
        }
    }
}

/// Expands `--type`/`--param` into one family per cluster.
pub fn parse_families(types: &str, params: Option<&str>, k: usize, dim: usize) -> Result<Vec<FamilySpec>, CecError> {
    resolve_families(types, params, k, dim).map_err(|f| CecError::InvalidParameter(f.message().to_string()))
}

fn resolve_families(types: &str, params: Option<&str>, k: usize, dim: usize) -> Result<Vec<FamilySpec>, Failure> {
    let kinds: Vec<FamilyKind> = types
        .split(',')
        .map(|t| t.parse::<FamilyKind>().map_err(usage))
        .collect::<Result<_, _>>()?;
    let entries: Vec<Vec<Vec<f64>>> = match params {
        Some(p) => p.split(',').map(parse_param_entry).collect::<Result<_, _>>()?,
        None => vec![Vec::new(); kinds.len()],
    };
    if kinds.len() != 1 && kinds.len() != k {
        return Err(usage(format!(
            "--type lists {} entries; expected 1 or {k}",
            kinds.len()
        )));
    }
    if entries.len() != 1 && entries.len() != kinds.len() && entries.len() != k {
        return Err(usage(format!(
            "--param lists {} entries; expected 1 or {}",
            entries.len(),
            kinds.len()
        )));
    }
    (0..k)
        .map(|i| {
            let kind = kinds[if kinds.len() == 1 { 0 } else { i }];
            let entry = &entries[if entries.len() == 1 { 0 } else { i }];
            build_family(kind, entry, dim)
        })
        .collect()
}

fn load_data(spec: &RunSpec) -> Result<DataMatrix, Failure> {
    match (&spec.input, spec.generate) {
        (Some(path), _) => ingest_csv(path).map_err(|e| Failure::Data(e.to_string())),
        (None, Some(name)) => {
            if spec.points < generate::MIN_POINTS {
                return Err(usage(format!("--points must be at least {}", generate::MIN_POINTS)));
            }
            generate(name, spec.seed.unwrap_or(0), spec.points).map_err(|e| Failure::Data(e.to_string()))
        }
        (None, None) => Err(usage("one of --input or --generate is required")),
    }
}

fn execute(spec: &RunSpec) -> Result<(ResultDocument, Vec<usize>), Failure> {
    if spec.centers == 0 {
        return Err(usage("--centers must be at least 1"));
    }
    if spec.nstart == 0 {
        return Err(usage("--nstart must be at least 1"));
    }
    if spec.iter_max == 0 {
        return Err(usage("--iter-max must be at least 1"));
    }
    let card_min: CardMin = spec.card_min.parse().map_err(usage)?;
    let init: InitMethod = spec.init.parse().map_err(usage)?;
    let method: Method = spec.method.parse().map_err(usage)?;

    let data = load_data(spec)?;
    if spec.ellipses && data.dim() != 2 {
        return Err(usage(CecError::EllipseDimension(data.dim())));
    }
    let families = resolve_families(&spec.types, spec.param.as_deref(), spec.centers, data.dim())?;
    let seed = spec.seed.unwrap_or_else(rand::random);
    let cfg = CecConfig {
        families: families.clone(),
        max_iterations: spec.iter_max,
        card_min,
        init,
        nstart: spec.nstart,
        seed: Some(seed),
        method,
        parallel: !spec.no_parallel,
        merge_search: !spec.no_merge,
    };

    let result = run(&data, &cfg).map_err(|e| match e {
        CecError::TooFewPoints { .. } | CecError::TooManyCenters { .. } | CecError::DimensionMismatch { .. } => {
            Failure::Data(e.to_string())
        }
        CecError::InvalidParameter(_) => usage(e),
        _ => Failure::Numeric(e.to_string()),
    })?;

    let ellipses = if spec.ellipses {
        Some(emit_ellipses(&result).map_err(usage)?)
    } else {
        None
    };
    let oracle = if spec.oracle {
        let threshold = card_min.resolve(data.rows(), data.dim());
        let (energy, labels) = brute_force_min(&data, &families, threshold).map_err(usage)?;
        Some(OracleRecord {
            energy,
            cluster: labels.iter().map(|l| l + 1).collect(),
            gap: result.final_energy - energy,
        })
    } else {
        None
    };

    let document = ResultDocument {
        schema: document::SCHEMA_VERSION,
        run: RunEcho {
            input: spec.input.as_ref().map(|p| p.display().to_string()),
            generate: spec.generate.map(|g| g.name().to_string()),
            rows: data.rows(),
            dim: data.dim(),
            centers: spec.centers,
            types: families.iter().map(|f| f.kind()).collect(),
            params: families.iter().map(|f| f.parameter_values()).collect(),
            nstart: spec.nstart,
            iter_max: spec.iter_max,
            card_min: card_min.to_string(),
            card_min_points: card_min.resolve(data.rows(), data.dim()),
            init: init.name().to_string(),
            method: method.name().to_string(),
            seed,
        },
        result: ResultBody::from_result(&result, spec.timing),
        ellipses,
        oracle,
    };
    Ok((document, result.membership))
}

fn write_outputs(spec: &RunSpec, document: &ResultDocument, membership: &[usize], stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = document.to_string().map_err(|e| Failure::Data(e.to_string()))?;
    let io_err = |e: std::io::Error| Failure::Data(e.to_string());
    match &spec.output {
        Some(path) => std::fs::write(path, &text).map_err(io_err)?,
        None => stdout.write_all(text.as_bytes()).map_err(io_err)?,
    }
    if let Some(path) = &spec.membership_csv {
        let mut body = String::with_capacity(membership.len() * 3);
        for l in membership {
            body.push_str(&l.to_string());
            body.push('\n');
        }
        std::fs::write(path, body).map_err(io_err)?;
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs, and writes the result
/// document. Returns the process exit code.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = match RunSpec::try_parse_from(argv) {
        Ok(spec) => spec,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = execute(&spec).and_then(|(doc, membership)| write_outputs(&spec, &doc, &membership, stdout));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_lists_broadcast_and_align() {
        let f = parse_families("all", None, 3, 2).unwrap();
        assert_eq!(f, vec![FamilySpec::All; 3]);
        let f = parse_families("fixedr,eigen", Some("350,9000 8"), 2, 2).unwrap();
        assert_eq!(f[0], FamilySpec::fixed_radius(350.0).unwrap());
        assert_eq!(f[1], FamilySpec::fixed_eigenvalues(vec![8.0, 9000.0]).unwrap());
        let f = parse_families("all,fixedr", Some("-,0.01"), 2, 1).unwrap();
        assert_eq!(f[1], FamilySpec::fixed_radius(0.01).unwrap());
        let f = parse_families("covariance", Some("0.04 0;0 0.01"), 4, 2).unwrap();
        assert_eq!(f.len(), 4);
        let flat = parse_families("covariance", Some("0.04 0 0 0.01"), 1, 2).unwrap();
        assert_eq!(flat[0], f[0]);
    }

    #[test]
    fn family_list_errors() {
        assert!(parse_families("all,all", None, 3, 2).is_err());
        assert!(parse_families("fixedr", None, 1, 2).is_err());
        assert!(parse_families("all", Some("1"), 1, 2).is_err());
        assert!(parse_families("eigenvalues", Some("1 2 3"), 1, 2).is_err());
        assert!(parse_families("covariance", Some("1 0;0"), 1, 2).is_err());
        assert!(parse_families("blob", None, 1, 2).is_err());
        assert!(parse_families("fixedr", Some("x"), 1, 2).is_err());
    }

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_cli(std::iter::once("cec").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["--generate", "mouse", "--centers", "0"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--centers", "2"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--generate", "mouse", "--centers", "2", "--type", "nope"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--generate", "mouse", "--centers", "2", "--init", "grid"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--generate", "mouse", "--centers", "2", "--points", "10"]).0, EXIT_USAGE);
    }

    #[test]
    fn missing_file_is_data_error() {
        let (code, _, err) = run_args(&["--input", "/nonexistent/x.csv", "--centers", "2"]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("error"));
    }

    #[test]
    fn help_and_version_succeed() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("--centers"));
        assert!(!out.contains("--oracle"));
        assert_eq!(run_args(&["--version"]).0, EXIT_OK);
    }
}
