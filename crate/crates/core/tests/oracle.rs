use cec::oracle::{brute_force_min, energy_direct, PartitionIterator};
use cec::{rng_from_seed, run, CardMin, CecConfig, DataMatrix, FamilySpec};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn symmetric_pair_by_hand() {
    let data = DataMatrix::from_column(&[-1.0, 1.0]).unwrap();
    let (e, labels) = brute_force_min(&data, &[FamilySpec::fixed_radius(1.0).unwrap()], 2).unwrap();
    let expected = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    assert!((e - expected).abs() < 1e-12);
    assert!((e - 1.418939).abs() < 1e-6);
    assert_eq!(labels, vec![0, 0]);
}

#[test]
fn single_block_equals_engine_energy() {
    let mut rng = rng_from_seed(61);
    for dim in 1..=3 {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        for f in [FamilySpec::All, FamilySpec::Spherical, FamilySpec::Diagonal] {
            let (e, _) = brute_force_min(&data, std::slice::from_ref(&f), dim + 1).unwrap();
            let r = run(&data, &CecConfig::new(1, f.clone()).with_seed(0)).unwrap();
            assert_eq!(e, r.final_energy);
            assert_eq!(e, energy_direct(&data, &[0; 10], &[f]));
        }
    }
}

#[test]
fn mixed_families_use_full_labelings() {
    let data = DataMatrix::from_column(&[0.0, 0.1, 0.2, 5.0, 5.3, 5.1, 5.2, 0.15]).unwrap();
    let families = vec![FamilySpec::fixed_radius(0.01).unwrap(), FamilySpec::All];
    let (e, labels) = brute_force_min(&data, &families, 2).unwrap();
    // exhaustive reference over all 2^8 labelings
    let mut best = f64::INFINITY;
    for code in 0u32..256 {
        let l: Vec<usize> = (0..8).map(|i| ((code >> i) & 1) as usize).collect();
        let sizes = [l.iter().filter(|&&v| v == 0).count(), l.iter().filter(|&&v| v == 1).count()];
        if sizes.iter().any(|&s| s > 0 && s < 2) {
            continue;
        }
        best = best.min(energy_direct(&data, &l, &families));
    }
    assert_eq!(e, best);
    assert_eq!(energy_direct(&data, &labels, &families), e);
}

#[test]
fn oversized_instances_are_refused() {
    let data = DataMatrix::from_column(&(0..15).map(f64::from).collect::<Vec<_>>()).unwrap();
    assert!(brute_force_min(&data, &vec![FamilySpec::All; 2], 2).is_err());
    let data = DataMatrix::from_column(&(0..6).map(f64::from).collect::<Vec<_>>()).unwrap();
    assert!(brute_force_min(&data, &vec![FamilySpec::All; 5], 2).is_err());
}

#[test]
fn partitions_are_canonical_and_distinct() {
    let all: Vec<Vec<usize>> = PartitionIterator::new(6, 3).collect();
    let mut seen = std::collections::HashSet::new();
    for p in &all {
        let mut next = 0;
        for &l in p {
            assert!(l <= next);
            if l == next {
                next += 1;
            }
        }
        assert!(seen.insert(p.clone()));
    }
    // S(6,1) + S(6,2) + S(6,3)
    assert_eq!(all.len(), 1 + 31 + 90);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn engine_never_beats_the_oracle(
        values in prop::collection::vec(-10.0..10.0f64, 6..10),
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        let data = DataMatrix::from_column(&values).unwrap();
        let cfg = CecConfig::new(k, FamilySpec::All).with_seed(seed).with_nstart(3);
        let card_min = CardMin::default().resolve(values.len(), 1);
        let (oracle, _) = brute_force_min(&data, &cfg.families, card_min).unwrap();
        let r = run(&data, &cfg).unwrap();
        prop_assert!(oracle <= r.final_energy + 1e-9);
        let labels: Vec<usize> = r.membership.iter().map(|l| l - 1).collect();
        let direct = energy_direct(&data, &labels, &r.families);
        prop_assert!((direct - r.final_energy).abs() <= 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn relabeling_keeps_the_energy(
        values in prop::collection::vec(-10.0..10.0f64, 6..12),
        labels in prop::collection::vec(0usize..3, 12),
    ) {
        let n = values.len();
        let data = DataMatrix::from_column(&values).unwrap();
        let labels = &labels[..n];
        let families = vec![FamilySpec::fixed_radius(1.0).unwrap(), FamilySpec::Spherical, FamilySpec::fixed_radius(4.0).unwrap()];
        let e = energy_direct(&data, labels, &families);
        // rotate labels and families together
        let rotated: Vec<usize> = labels.iter().map(|l| (l + 1) % 3).collect();
        let rotated_families = vec![families[2].clone(), families[0].clone(), families[1].clone()];
        let r = energy_direct(&data, &rotated, &rotated_families);
        prop_assert!(e == r || (e - r).abs() <= 1e-12 * e.abs().max(1.0));
    }
}
