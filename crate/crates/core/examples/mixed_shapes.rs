//! Circles and thin ellipses, each cluster with its own family.
use cec::cli::{generate_labeled, DatasetName};
use cec::{run, CecConfig, FamilyKind, FamilySpec};

fn main() -> cec::Result<()> {
    let labeled = generate_labeled(DatasetName::Mixshapes, 2, 1400)?;
    let mut families = vec![FamilySpec::fixed_radius(350.0)?; 2];
    families.extend(vec![FamilySpec::fixed_eigenvalues(vec![9000.0, 8.0])?; 5]);
    let result = run(&labeled.data, &CecConfig::mixed(families).with_nstart(100).with_seed(2))?;
    for (j, family) in result.families.iter().enumerate() {
        let size = result.membership.iter().filter(|&&l| l == j + 1).count();
        println!("cluster {}: {:?}, {size} points", j + 1, family.kind());
    }
    let circle: Vec<usize> = (0..labeled.labels.len()).filter(|&i| labeled.labels[i] < 2).collect();
    let round = circle
        .iter()
        .filter(|&&i| result.families[result.membership[i] - 1].kind() == FamilyKind::FixedRadius)
        .count();
    println!("{round}/{} circle points sit in fixed-radius clusters", circle.len());
    Ok(())
}
