use std::collections::HashMap;

use cec::cli::{generate_labeled, DatasetName};
use cec::{run, CecConfig, FamilySpec};

fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    let c2 = |x: usize| (x * x.saturating_sub(1)) as f64 / 2.0;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut left: HashMap<usize, usize> = HashMap::new();
    let mut right: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *left.entry(x).or_default() += 1;
        *right.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&v| c2(v)).sum();
    let sa: f64 = left.values().map(|&v| c2(v)).sum();
    let sb: f64 = right.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(a.len());
    (index - expected) / (0.5 * (sa + sb) - expected)
}

fn main() -> cec::Result<()> {
    let labeled = generate_labeled(DatasetName::Fourgauss, 3, 1000)?;
    let result = run(&labeled.data, &CecConfig::new(10, FamilySpec::All).with_nstart(20).with_seed(3))?;
    println!("{} clusters from 10", result.nclusters());
    println!("adjusted Rand index {:.4}", adjusted_rand_index(&result.membership, &labeled.labels));
    Ok(())
}
