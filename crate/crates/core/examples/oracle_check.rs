//! Compare the engine with the exhaustive minimum on a tiny instance.
use cec::oracle::brute_force_min;
use cec::{run, CardMin, CecConfig, DataMatrix, FamilySpec};

fn main() -> cec::Result<()> {
    let data = DataMatrix::from_rows(&[
        [0.0, 0.1], [0.4, -0.2], [0.1, 0.5], [0.3, 0.2],
        [8.0, 8.3], [8.4, 7.9], [7.7, 8.1],
        [-6.0, 9.0], [-6.2, 9.4], [-5.7, 8.8], [-6.1, 8.7],
    ])?;
    let cfg = CecConfig::new(3, FamilySpec::All).with_nstart(20).with_seed(11);
    let threshold = CardMin::default().resolve(data.rows(), data.dim());
    let (best, labels) = brute_force_min(&data, &cfg.families, threshold)?;
    let result = run(&data, &cfg)?;
    println!("exhaustive {best:.10}  labels {labels:?}");
    println!("engine     {:.10}  labels {:?}", result.final_energy, result.membership);
    Ok(())
}
