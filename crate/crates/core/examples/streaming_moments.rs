//! Running mean and covariance under point insertions and removals.
use cec::{rng_from_seed, Moments};
use rand::Rng;

fn main() {
    let mut rng = rng_from_seed(0);
    let points: Vec<[f64; 3]> = (0..2000)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(0.0..5.0), rng.random_range(-3.0..3.0)])
        .collect();
    let mut running = Moments::empty(3);
    for p in &points {
        running.add_point(p);
    }
    for p in &points[..1500] {
        running.remove_point(p);
    }
    let direct = Moments::of_points(points[1500..].iter().map(|p| p.as_slice()), 3);
    println!("count {}  mean {:?}", running.count, running.mean);
    println!("relative deviation from a fresh pass {:.2e}", running.relative_deviation(&direct));

    let halves = Moments::of_points(points[..1000].iter().map(|p| p.as_slice()), 3)
        .merge(&Moments::of_points(points[1000..].iter().map(|p| p.as_slice()), 3))
        .unwrap();
    let whole = Moments::of_points(points.iter().map(|p| p.as_slice()), 3);
    println!("merged halves vs whole {:.2e}", halves.relative_deviation(&whole));
}
