use cec::{gaussian_density, rng_from_seed, CecRng, FamilySpec, Moments, SymMatrix};
use proptest::prelude::*;
use rand::Rng;

fn random_moments(rng: &mut CecRng, dim: usize) -> Moments {
    let n = rng.random_range(dim + 2..60);
    let stretch: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..10.0)).collect();
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| stretch.iter().map(|s| s * rng.random_range(-1.0..1.0)).collect())
        .collect();
    Moments::of_points(points.iter().map(|p| p.as_slice()), dim)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn every_family(m: &Moments) -> Vec<FamilySpec> {
    let dim = m.dim();
    vec![
        FamilySpec::All,
        FamilySpec::Spherical,
        FamilySpec::Diagonal,
        FamilySpec::fixed_radius(0.7).unwrap(),
        FamilySpec::fixed_covariance(SymMatrix::from_diagonal(&vec![2.0; dim])).unwrap(),
        FamilySpec::fixed_eigenvalues((1..=dim).map(|i| i as f64).collect()).unwrap(),
    ]
}

#[test]
fn substitution_identities() {
    let mut rng = rng_from_seed(21);
    for _ in 0..1000 {
        let dim = rng.random_range(1..=5);
        let m = random_moments(&mut rng, dim);
        let all = FamilySpec::All.cross_entropy(&m);
        let spherical = FamilySpec::Spherical.cross_entropy(&m);
        let r = m.cov.trace() / dim as f64;
        let fixed_r = FamilySpec::fixed_radius(r).unwrap().cross_entropy(&m);
        assert!(close(fixed_r, spherical, 1e-12), "{fixed_r} vs {spherical}");
        let fixed_cov = FamilySpec::fixed_covariance(m.cov.clone()).unwrap().cross_entropy(&m);
        assert!(close(fixed_cov, all, 1e-10), "{fixed_cov} vs {all}");
        let eig = FamilySpec::fixed_eigenvalues(m.cov.eigenvalues()).unwrap().cross_entropy(&m);
        assert!(close(eig, all, 1e-10), "{eig} vs {all}");
        assert!(FamilySpec::Diagonal.cross_entropy(&m) >= all - 1e-10);
    }
}

#[test]
fn general_family_is_the_minimum() {
    let mut rng = rng_from_seed(22);
    for _ in 0..300 {
        let dim = rng.random_range(1..=4);
        let m = random_moments(&mut rng, dim);
        let all = FamilySpec::All.cross_entropy(&m);
        for f in every_family(&m) {
            assert!(f.cross_entropy(&m) >= all - 1e-10, "{:?}", f.kind());
        }
    }
}

#[test]
fn closed_forms_equal_the_fixed_covariance_form_at_the_fit() {
    let mut rng = rng_from_seed(23);
    for _ in 0..300 {
        let dim = rng.random_range(1..=4);
        let m = random_moments(&mut rng, dim);
        for f in every_family(&m) {
            let fitted = f.fitted_covariance(&m);
            let at_fit = FamilySpec::fixed_covariance(fitted).unwrap().cross_entropy(&m);
            let h = f.cross_entropy(&m);
            assert!(close(h, at_fit, 1e-10), "{:?}: {h} vs {at_fit}", f.kind());
        }
    }
}

#[test]
fn fixed_radius_closed_form_by_hand() {
    // points -1 and 1: trace 1, so ln(2 pi)/2 + 1/2
    let m = Moments::of_points([[-1.0], [1.0]].iter().map(|p| p.as_slice()), 1);
    let h = FamilySpec::fixed_radius(1.0).unwrap().cross_entropy(&m);
    assert!((h - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()).abs() < 1e-12);
}

#[test]
fn incremental_costs_match_refits() {
    let mut rng = rng_from_seed(24);
    for _ in 0..300 {
        let dim = rng.random_range(1..=4);
        let m = random_moments(&mut rng, dim);
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-12.0..12.0)).collect();
        let mut with = m.clone();
        with.add_point(&x);
        let mut scratch = Moments::empty(dim);
        for f in every_family(&m) {
            let added = f.added_shape_cost(&m, &x, &mut scratch);
            assert!(close(added, f.shape_cost(&with.cov), 1e-9), "{:?}", f.kind());
            let removed = f.removed_shape_cost(&with, &x, &mut scratch);
            assert!(close(removed, f.shape_cost(&m.cov), 1e-8), "{:?}", f.kind());
            let bound = f.shape_bound(&m).lower(&m, &x);
            assert!(bound <= added + 1e-9 * (1.0 + added.abs()), "{:?}", f.kind());
        }
    }
}

#[test]
fn density_integrates_to_one_in_three_dimensions() {
    let mut rng = rng_from_seed(25);
    let a: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut cov = SymMatrix::scaled_identity(3, 0.3);
    for row in &a {
        cov.add_outer(1.0, row);
    }
    let mean = [0.4, -1.0, 2.0];
    let half: Vec<f64> = cov.diagonal().iter().map(|v| 7.0 * v.sqrt()).collect();
    let steps = 70;
    let h: Vec<f64> = half.iter().map(|w| 2.0 * w / steps as f64).collect();
    let mut total = 0.0;
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let x = [
                    mean[0] - half[0] + (i as f64 + 0.5) * h[0],
                    mean[1] - half[1] + (j as f64 + 0.5) * h[1],
                    mean[2] - half[2] + (k as f64 + 0.5) * h[2],
                ];
                total += gaussian_density(&mean, &cov, &x).unwrap();
            }
        }
    }
    total *= h[0] * h[1] * h[2];
    assert!((total - 1.0).abs() < 1e-3, "integral {total}");
}

proptest! {
    #[test]
    fn cross_entropy_ignores_translation(
        points in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 2), 4..30),
        shift in prop::collection::vec(-1e3..1e3f64, 2),
    ) {
        let m = Moments::of_points(points.iter().map(|p| p.as_slice()), 2);
        let moved: Vec<Vec<f64>> = points.iter().map(|p| vec![p[0] + shift[0], p[1] + shift[1]]).collect();
        let t = Moments::of_points(moved.iter().map(|p| p.as_slice()), 2);
        for f in every_family(&m) {
            let (a, b) = (f.cross_entropy(&m), f.cross_entropy(&t));
            prop_assert!(a == b || close(a, b, 1e-8), "{:?}: {} vs {}", f.kind(), a, b);
        }
    }

    #[test]
    fn positive_definite_scatter_gives_finite_costs(
        points in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 3), 8..30),
    ) {
        let m = Moments::of_points(points.iter().map(|p| p.as_slice()), 3);
        prop_assume!(m.cov.eigenvalues()[0] > 1e-6 * m.cov.trace());
        for f in every_family(&m) {
            prop_assert!(f.cross_entropy(&m).is_finite());
        }
    }
}
