//! Use a fitted result as a mixture density and a classifier.
use cec::cli::{generate, DatasetName};
use cec::{run, CecConfig, FamilySpec, MixtureModel};

fn main() -> cec::Result<()> {
    let data = generate(DatasetName::Fourgauss, 1, 1000)?;
    let result = run(&data, &CecConfig::new(4, FamilySpec::All).with_nstart(10).with_seed(1))?;
    let model = MixtureModel::new(&result);
    for x in [[0.25, 0.25], [0.5, 0.5], [0.74, 0.76], [2.0, 2.0]] {
        println!("{x:?}: cluster {}, density {:.4}", model.classify(&x)?, model.density(&x)?);
    }
    Ok(())
}
