//! Two-component fit of the Old Faithful waiting times.
use std::path::PathBuf;

use cec::cli::ingest_csv;
use cec::{run, CecConfig, FamilySpec};

fn main() -> cec::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/faithful-waiting.csv");
    let data = ingest_csv(&path)?;
    let result = run(&data, &CecConfig::new(2, FamilySpec::All).with_nstart(10).with_seed(1))?;
    for (p, (mean, cov)) in result.probabilities.iter().zip(result.means.iter().zip(&result.covariances)) {
        println!("p = {p:.4}  mean = {:.3}  sd = {:.3}", mean[0], cov.get(0, 0).sqrt());
    }
    println!("energy trace {:?}", result.energy_trace);
    Ok(())
}
