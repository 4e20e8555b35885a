use cec::{rng_from_seed, CecRng, DataMatrix, Moments, SymMatrix};
use proptest::prelude::*;
use rand::Rng;

fn random_points(rng: &mut CecRng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect()
}

fn random_spd(rng: &mut CecRng, dim: usize) -> SymMatrix {
    let a: Vec<Vec<f64>> = random_points(rng, dim, dim);
    let mut m = SymMatrix::scaled_identity(dim, 0.5);
    for row in &a {
        m.add_outer(1.0, row);
    }
    m
}

fn two_pass(points: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = points.len() as f64;
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x / n;
        }
    }
    let mut cov = vec![vec![0.0; dim]; dim];
    for p in points {
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]) / n;
            }
        }
    }
    (mean, cov)
}

fn moments_of(points: &[Vec<f64>]) -> Moments {
    Moments::of_points(points.iter().map(|p| p.as_slice()), points[0].len())
}

fn assert_matches_two_pass(m: &Moments, points: &[Vec<f64>], tol: f64) {
    let (mean, cov) = two_pass(points);
    assert_eq!(m.count, points.len());
    let reference = Moments {
        count: points.len(),
        mean,
        cov: SymMatrix::from_rows(&cov).unwrap(),
    };
    let dev = m.relative_deviation(&reference);
    assert!(dev <= tol, "relative deviation {dev}");
}

#[test]
fn random_sample_matches_two_pass() {
    let mut rng = rng_from_seed(3);
    for dim in 1..=6 {
        let points = random_points(&mut rng, 200, dim);
        assert_matches_two_pass(&moments_of(&points), &points, 1e-12);
    }
}

#[test]
fn rows_subset_matches_two_pass() {
    let mut rng = rng_from_seed(4);
    let points = random_points(&mut rng, 60, 3);
    let data = DataMatrix::from_rows(&points).unwrap();
    let rows: Vec<usize> = (0..60).filter(|i| i % 3 != 1).collect();
    let picked: Vec<Vec<f64>> = rows.iter().map(|&i| points[i].clone()).collect();
    assert_matches_two_pass(&Moments::of_rows(&data, &rows).unwrap(), &picked, 1e-12);
}

#[test]
fn merged_halves_equal_the_whole() {
    let mut rng = rng_from_seed(5);
    let points = random_points(&mut rng, 100, 4);
    let merged = moments_of(&points[..50]).merge(&moments_of(&points[50..])).unwrap();
    assert_matches_two_pass(&merged, &points, 1e-12);
}

#[test]
fn uneven_merge_and_subtract() {
    let mut rng = rng_from_seed(6);
    let points = random_points(&mut rng, 90, 3);
    let whole = moments_of(&points);
    let part = moments_of(&points[..7]);
    let rest = whole.subtract(&part).unwrap();
    assert_matches_two_pass(&rest, &points[7..], 1e-10);
}

#[test]
fn merging_two_empties_fails() {
    assert!(Moments::empty(2).merge(&Moments::empty(2)).is_err());
}

#[test]
fn streaming_drift_stays_small() {
    let mut rng = rng_from_seed(7);
    for dim in [1, 3, 6] {
        let pool = random_points(&mut rng, 400, dim);
        let mut inside: Vec<usize> = (0..40).collect();
        let mut outside: Vec<usize> = (40..400).collect();
        let mut m = moments_of(&pool[..40]);
        for op in 1..=10_000 {
            let add = inside.len() <= dim + 2 || (!outside.is_empty() && rng.random_bool(0.5));
            if add {
                let k = rng.random_range(0..outside.len());
                let i = outside.swap_remove(k);
                m.add_point(&pool[i]);
                inside.push(i);
            } else {
                let k = rng.random_range(0..inside.len());
                let i = inside.swap_remove(k);
                m.remove_point(&pool[i]);
                outside.push(i);
            }
            if op % 100 == 0 {
                let current: Vec<Vec<f64>> = inside.iter().map(|&i| pool[i].clone()).collect();
                assert_matches_two_pass(&m, &current, 1e-9);
            }
        }
    }
}

#[test]
fn determinant_is_product_of_eigenvalues() {
    let mut rng = rng_from_seed(8);
    for _ in 0..50 {
        let m = random_spd(&mut rng, 4);
        let product: f64 = m.eigenvalues().iter().product();
        let det = m.det();
        assert!((det - product).abs() <= 1e-10 * product.abs(), "{det} vs {product}");
    }
}

#[test]
fn inverse_residual() {
    let mut rng = rng_from_seed(9);
    for _ in 0..50 {
        let m = random_spd(&mut rng, 5);
        let inv = m.inverse().unwrap();
        let product = m.matmul(&inv);
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((product[i * 5 + j] - expected).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn singular_matrix_has_no_inverse() {
    let m = SymMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
    assert!(m.inverse().is_err());
}

/// `det(M - lambda I)` by Gaussian elimination with partial pivoting,
/// independent of the library's factorization.
fn char_poly_at(m: &SymMatrix, lambda: f64) -> f64 {
    let n = m.dim();
    let mut a: Vec<Vec<f64>> = m.to_rows();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

#[test]
fn eigenvalues_are_roots_of_the_characteristic_polynomial() {
    let mut rng = rng_from_seed(10);
    for _ in 0..30 {
        let rows = random_points(&mut rng, 6, 6);
        let sym: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..6).map(|j| 0.5 * (rows[i][j] + rows[j][i])).collect())
            .collect();
        let m = SymMatrix::from_rows(&sym).unwrap();
        let values = m.eigenvalues();
        let scale = m.max_abs().powi(6);
        for &l in &values {
            assert!(char_poly_at(&m, l).abs() <= 1e-8 * scale, "residual at {l}");
        }
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = values.iter().sum();
        assert!((sum - m.trace()).abs() <= 1e-10 * m.max_abs().max(1.0));
    }
}

#[test]
fn eigenvectors_reconstruct_the_matrix() {
    let mut rng = rng_from_seed(11);
    let m = random_spd(&mut rng, 5);
    let e = m.eigen();
    let back = SymMatrix::from_eigen(&e.values, &e.vectors);
    for i in 0..5 {
        for j in 0..5 {
            assert!((back.get(i, j) - m.get(i, j)).abs() <= 1e-10 * m.max_abs());
        }
    }
}

fn points_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..5).prop_flat_map(|dim| prop::collection::vec(prop::collection::vec(-100.0..100.0f64, dim), 2..40))
}

proptest! {
    #[test]
    fn merge_commutes_and_associates(points in points_strategy(), a in 0usize..40, b in 0usize..40) {
        let n = points.len();
        // x and y nonempty, z possibly empty
        let lo = 1 + a % (n - 1);
        let hi = lo + 1 + b % (n - lo);
        let part = |r: &[Vec<f64>]| if r.is_empty() { Moments::empty(points[0].len()) } else { moments_of(r) };
        let x = part(&points[..lo]);
        let y = part(&points[lo..hi]);
        let z = part(&points[hi..]);
        let left = x.merge(&y).unwrap().merge(&z).unwrap();
        let right = z.merge(&y).unwrap().merge(&x).unwrap();
        prop_assert_eq!(left.count, n);
        prop_assert!(left.relative_deviation(&right) <= 1e-12);
    }

    #[test]
    fn subtract_undoes_merge(points in points_strategy(), split in 1usize..40) {
        let split = split.min(points.len() - 1);
        let a = moments_of(&points[..split]);
        let b = moments_of(&points[split..]);
        let back = a.merge(&b).unwrap().subtract(&b).unwrap();
        prop_assert_eq!(back.count, a.count);
        prop_assert!(back.relative_deviation(&a) <= 1e-9);
    }

    #[test]
    fn covariance_is_positive_semidefinite(points in points_strategy()) {
        let m = moments_of(&points);
        let tr = m.cov.trace();
        prop_assert!(tr >= 0.0);
        prop_assert!(m.cov.eigenvalues()[0] >= -1e-9 * tr.max(1e-300));
    }

    #[test]
    fn determinant_matches_eigen_product(points in points_strategy()) {
        let m = moments_of(&points);
        let product: f64 = m.cov.eigenvalues().iter().product();
        let scale = m.cov.max_abs().powi(m.dim() as i32);
        prop_assert!((m.cov.det() - product).abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE));
    }
}
