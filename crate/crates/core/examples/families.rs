//! The same data under each Gaussian family.
use cec::cli::{generate, DatasetName};
use cec::{run, CecConfig, FamilySpec, SymMatrix};

fn main() -> cec::Result<()> {
    let data = generate(DatasetName::Tset, 5, 1500)?;
    let families = [
        FamilySpec::All,
        FamilySpec::Spherical,
        FamilySpec::Diagonal,
        FamilySpec::fixed_radius(0.01)?,
        FamilySpec::fixed_covariance(SymMatrix::from_rows(&[[0.02, 0.0], [0.0, 0.002]])?)?,
        FamilySpec::fixed_eigenvalues(vec![0.02, 0.001])?,
    ];
    for family in families {
        let kind = family.kind();
        let result = run(&data, &CecConfig::new(5, family).with_nstart(10).with_seed(5))?;
        println!("{kind:?}: {} clusters, energy {:.4}", result.nclusters(), result.final_energy);
    }
    Ok(())
}
