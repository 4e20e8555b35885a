//! Starting from ten spherical clusters on the mouse shape, the surplus ones vanish.
use cec::cli::{generate, DatasetName};
use cec::{run, CecConfig, FamilySpec};

fn main() -> cec::Result<()> {
    let data = generate(DatasetName::Mouse, 7, 3000)?;
    let cfg = CecConfig::new(10, FamilySpec::Spherical).with_nstart(10).with_seed(7);
    let result = run(&data, &cfg)?;
    println!("clusters per iteration {:?}", result.nclusters_trace);
    for (p, m) in result.probabilities.iter().zip(&result.means) {
        println!("p = {p:.3} at ({:.3}, {:.3})", m[0], m[1]);
    }

    let stalled = run(&data, &cfg.clone().with_merge_search(false))?;
    println!("without merge search: {} clusters, energy {:.5} vs {:.5}", stalled.nclusters(), stalled.final_energy, result.final_energy);
    Ok(())
}
