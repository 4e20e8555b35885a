use cec::init::{assign_to_nearest, init_kmeanspp, init_random, kmeanspp_centers, random_centers};
use cec::{rng_from_seed, DataMatrix};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn second_center_follows_the_squared_distance_law() {
    // line {0, 1, 3}: with the first center at 0 the weights are 1 and 9
    let data = DataMatrix::from_column(&[0.0, 1.0, 3.0]).unwrap();
    let mut rng = rng_from_seed(31);
    let mut counts = [0u64; 3];
    let mut draws = 0u64;
    while draws < 100_000 {
        let c = kmeanspp_centers(&data, 2, &mut rng).unwrap();
        if c[0] == 0 {
            counts[c[1]] += 1;
            draws += 1;
        }
    }
    assert_eq!(counts[0], 0);
    let expected = [0.1 * draws as f64, 0.9 * draws as f64];
    let chi2: f64 = [counts[1], counts[2]]
        .iter()
        .zip(expected)
        .map(|(&o, e)| (o as f64 - e).powi(2) / e)
        .sum();
    // one degree of freedom, alpha = 0.01
    assert!(chi2 < 6.635, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn first_center_is_uniform() {
    let data = DataMatrix::from_column(&[0.0, 1.0, 3.0, 7.0]).unwrap();
    let mut rng = rng_from_seed(32);
    let mut counts = [0u64; 4];
    for _ in 0..40_000 {
        counts[kmeanspp_centers(&data, 1, &mut rng).unwrap()[0]] += 1;
    }
    let chi2: f64 = counts.iter().map(|&o| (o as f64 - 10_000.0).powi(2) / 10_000.0).sum();
    // three degrees of freedom, alpha = 0.01
    assert!(chi2 < 11.345, "chi2 = {chi2}");
}

#[test]
fn random_centers_are_uniform_without_replacement() {
    let data = DataMatrix::from_column(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
    let mut rng = rng_from_seed(33);
    let mut counts = [0u64; 5];
    for _ in 0..20_000 {
        let c = random_centers(&data, 2, &mut rng).unwrap();
        assert_ne!(c[0], c[1]);
        for i in c {
            counts[i] += 1;
        }
    }
    let chi2: f64 = counts.iter().map(|&o| (o as f64 - 8_000.0).powi(2) / 8_000.0).sum();
    assert!(chi2 < 13.277, "chi2 = {chi2}");
}

#[test]
fn same_seed_same_assignment() {
    let mut rng = rng_from_seed(34);
    let rows: Vec<[f64; 2]> = (0..300).map(|_| [rng.random(), rng.random()]).collect();
    let data = DataMatrix::from_rows(&rows).unwrap();
    for seed in 0..5 {
        let a = init_kmeanspp(&data, 7, &mut rng_from_seed(seed)).unwrap();
        let b = init_kmeanspp(&data, 7, &mut rng_from_seed(seed)).unwrap();
        assert_eq!(a, b);
        let a = init_random(&data, 7, &mut rng_from_seed(seed)).unwrap();
        let b = init_random(&data, 7, &mut rng_from_seed(seed)).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #[test]
    fn every_point_goes_to_a_nearest_center(
        rows in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 2), 3..60),
        k in 1usize..6,
        seed in any::<u64>(),
    ) {
        let data = DataMatrix::from_rows(&rows).unwrap();
        let k = k.min(rows.len());
        let centers = kmeanspp_centers(&data, k, &mut rng_from_seed(seed)).unwrap();
        let labels = assign_to_nearest(&data, &centers);
        let d2 = |a: &[f64], b: &[f64]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        for (i, &l) in labels.iter().enumerate() {
            prop_assert!((1..=k).contains(&l));
            let mine = d2(data.row(i), data.row(centers[l - 1]));
            for (j, &c) in centers.iter().enumerate() {
                let other = d2(data.row(i), data.row(c));
                prop_assert!(mine < other || (mine == other && l - 1 <= j));
            }
        }
    }
}
