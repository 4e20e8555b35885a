//! Initial cluster membership: center selection followed by nearest-center
//! assignment.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`, which is
//! specified independently of platform and word size.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{CecError, Result};

/// The generator used everywhere randomness is needed.
pub type CecRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> CecRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// How initial centers are picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InitMethod {
    #[serde(rename = "random")]
    Random,
    #[default]
    #[serde(rename = "kmeans++")]
    KMeansPlusPlus,
}

impl InitMethod {
    pub fn name(self) -> &'static str {
        match self {
            InitMethod::Random => "random",
            InitMethod::KMeansPlusPlus => "kmeans++",
        }
    }
}

impl std::str::FromStr for InitMethod {
    type Err = CecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitMethod::Random),
            "kmeans++" => Ok(InitMethod::KMeansPlusPlus),
            other => Err(CecError::InvalidParameter(format!("unknown init method '{other}'"))),
        }
    }
}

fn check_k(data: &DataMatrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(CecError::InvalidParameter("number of centers must be at least 1".into()));
    }
    if k > data.rows() {
        return Err(CecError::TooManyCenters { k, n: data.rows() });
    }
    Ok(())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` distinct rows drawn uniformly without replacement.
pub fn random_centers(data: &DataMatrix, k: usize, rng: &mut CecRng) -> Result<Vec<usize>> {
    check_k(data, k)?;
    Ok(sample(rng, data.rows(), k).into_vec())
}

/// k-means++ seeding: each new center is drawn with probability
/// proportional to the squared distance to the closest chosen center.
pub fn kmeanspp_centers(data: &DataMatrix, k: usize, rng: &mut CecRng) -> Result<Vec<usize>> {
    check_k(data, k)?;
    let n = data.rows();
    let first = rng.random_range(0..n);
    let mut centers = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let push = |c: usize, centers: &mut Vec<usize>, chosen: &mut Vec<bool>, nearest: &mut Vec<f64>| {
        centers.push(c);
        chosen[c] = true;
        let center = data.row(c);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_distance(data.row(i), center));
        }
    };
    push(first, &mut centers, &mut chosen, &mut nearest);

    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight implies a candidate")
        } else {
            // every point coincides with a center; pick uniformly among the rest
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        push(next, &mut centers, &mut chosen, &mut nearest);
    }
    Ok(centers)
}

/// 1-based labels assigning each row to its nearest center (Euclidean),
/// ties to the lowest center index.
pub fn assign_to_nearest(data: &DataMatrix, centers: &[usize]) -> Vec<usize> {
    data.iter_rows()
        .map(|x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, &c) in centers.iter().enumerate() {
                let d = squared_distance(x, data.row(c));
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            best + 1
        })
        .collect()
}

pub fn init_random(data: &DataMatrix, k: usize, rng: &mut CecRng) -> Result<Vec<usize>> {
    let centers = random_centers(data, k, rng)?;
    Ok(assign_to_nearest(data, &centers))
}

pub fn init_kmeanspp(data: &DataMatrix, k: usize, rng: &mut CecRng) -> Result<Vec<usize>> {
    let centers = kmeanspp_centers(data, k, rng)?;
    Ok(assign_to_nearest(data, &centers))
}

pub fn initialize(
    method: InitMethod,
    data: &DataMatrix,
    k: usize,
    rng: &mut CecRng,
) -> Result<Vec<usize>> {
    match method {
        InitMethod::Random => init_random(data, k, rng),
        InitMethod::KMeansPlusPlus => init_kmeanspp(data, k, rng),
    }
}
