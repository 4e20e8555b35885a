//! Exhaustive reference solutions for small instances.
//!
//! Energies here are always recomputed from scratch with two-pass moments,
//! so they share no streaming code with the engine.

use crate::data::DataMatrix;
use crate::engine::cluster_term;
use crate::error::{CecError, Result};
use crate::linalg::Moments;
use crate::models::FamilySpec;

pub const MAX_POINTS: usize = 14;
pub const MAX_BLOCKS: usize = 4;
pub const MAX_POINTS_MIXED: usize = 10;
pub const MAX_BLOCKS_MIXED: usize = 3;

/// Enumerates set partitions of `n` items into at most `k` blocks as
/// restricted-growth strings, in lexicographic order. Each partition is
/// produced exactly once.
#[derive(Debug, Clone)]
pub struct PartitionIterator {
    k: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl PartitionIterator {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            k,
            current: vec![0; n],
            started: false,
            done: n == 0 || k == 0,
        }
    }
}

impl Iterator for PartitionIterator {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current.clone());
        }
        let n = self.current.len();
        let mut prefix_max = vec![0; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(self.current[i - 1]);
        }
        for i in (1..n).rev() {
            let a = self.current[i];
            if a + 1 < self.k && a <= prefix_max[i] {
                self.current[i] = a + 1;
                self.current[i + 1..].iter_mut().for_each(|v| *v = 0);
                return Some(self.current.clone());
            }
        }
        self.done = true;
        None
    }
}

/// All `k^n` labelings, odometer order.
#[derive(Debug, Clone)]
struct LabelingIterator {
    k: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl Iterator for LabelingIterator {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current.clone());
        }
        for i in (0..self.current.len()).rev() {
            if self.current[i] + 1 < self.k {
                self.current[i] += 1;
                self.current[i + 1..].iter_mut().for_each(|v| *v = 0);
                return Some(self.current.clone());
            }
        }
        self.done = true;
        None
    }
}

/// Energy of a labeling (0-based block index per row, block `j` modelled by
/// `families[j]`), recomputed from scratch.
pub fn energy_direct(data: &DataMatrix, labeling: &[usize], families: &[FamilySpec]) -> f64 {
    let n = data.rows();
    families
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let points = labeling
                .iter()
                .zip(data.iter_rows())
                .filter(move |(&l, _)| l == j)
                .map(|(_, x)| x);
            let m = Moments::of_points(points, data.dim());
            cluster_term(&m, f, n)
        })
        .sum()
}

/// Global minimum of the energy over all labelings into at most
/// `families.len()` blocks whose nonempty blocks hold at least `card_min`
/// points. Ties go to the first labeling in enumeration order.
pub fn brute_force_min(
    data: &DataMatrix,
    families: &[FamilySpec],
    card_min: usize,
) -> Result<(f64, Vec<usize>)> {
    let n = data.rows();
    let k = families.len();
    if k == 0 {
        return Err(CecError::InvalidParameter("at least one family is required".into()));
    }
    let homogeneous = families.iter().all(|f| *f == families[0]);
    let labelings: Box<dyn Iterator<Item = Vec<usize>>> = if homogeneous {
        if n > MAX_POINTS || k > MAX_BLOCKS {
            return Err(CecError::OracleSizeExceeded { n, k });
        }
        Box::new(PartitionIterator::new(n, k))
    } else {
        if n > MAX_POINTS_MIXED || k > MAX_BLOCKS_MIXED {
            return Err(CecError::OracleSizeExceeded { n, k });
        }
        Box::new(LabelingIterator {
            k,
            current: vec![0; n],
            started: false,
            done: n == 0,
        })
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut sizes = vec![0usize; k];
    for labeling in labelings {
        sizes.iter_mut().for_each(|s| *s = 0);
        for &l in &labeling {
            sizes[l] += 1;
        }
        if sizes.iter().any(|&s| s > 0 && s < card_min) {
            continue;
        }
        let e = energy_direct(data, &labeling, families);
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, labeling));
        }
    }
    best.ok_or(CecError::NoClusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_partial(n: usize, k: usize) -> usize {
        // sum of Stirling numbers of the second kind S(n, j), j <= k
        let mut s = vec![vec![0usize; k + 1]; n + 1];
        s[0][0] = 1;
        for i in 1..=n {
            for j in 1..=k {
                s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1];
            }
        }
        (1..=k).map(|j| s[n][j]).sum()
    }

    #[test]
    fn partition_counts_match_stirling_sums() {
        for n in 1..=8 {
            for k in 1..=4 {
                let all: Vec<Vec<usize>> = PartitionIterator::new(n, k).collect();
                assert_eq!(all.len(), bell_partial(n, k), "n={n} k={k}");
                let mut dedup = all.clone();
                dedup.sort();
                dedup.dedup();
                assert_eq!(dedup.len(), all.len());
            }
        }
    }

    #[test]
    fn symmetric_pair_under_fixed_radius() {
        let data = DataMatrix::from_column(&[-1.0, 1.0]).unwrap();
        let f = FamilySpec::fixed_radius(1.0).unwrap();
        let (e, labels) = brute_force_min(&data, &[f], 1).unwrap();
        let expected = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((e - expected).abs() < 1e-12);
        assert_eq!(labels, vec![0, 0]);
    }

    #[test]
    fn far_pairs_are_separated() {
        let data = DataMatrix::from_column(&[0.0, 0.1, 50.0, 50.1]).unwrap();
        let f = FamilySpec::fixed_radius(0.01).unwrap();
        let (_, labels) = brute_force_min(&data, &[f.clone(), f], 1).unwrap();
        assert_eq!(labels, vec![0, 0, 1, 1]);
    }

    #[test]
    fn label_permutation_invariance() {
        let data = DataMatrix::from_rows(&[[0.0, 1.0], [2.0, 0.5], [1.0, 1.0], [5.0, 5.0], [6.0, 4.0], [5.5, 6.0]]).unwrap();
        let fams = vec![FamilySpec::All, FamilySpec::Spherical];
        let labels = vec![0, 0, 0, 1, 1, 1];
        let swapped_fams = vec![FamilySpec::Spherical, FamilySpec::All];
        let swapped: Vec<usize> = labels.iter().map(|l| 1 - l).collect();
        let a = energy_direct(&data, &labels, &fams);
        let b = energy_direct(&data, &swapped, &swapped_fams);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn size_guard() {
        let data = DataMatrix::from_column(&(0..15).map(f64::from).collect::<Vec<_>>()).unwrap();
        assert!(matches!(
            brute_force_min(&data, &[FamilySpec::All], 2),
            Err(CecError::OracleSizeExceeded { .. })
        ));
        let data = DataMatrix::from_column(&(0..11).map(f64::from).collect::<Vec<_>>()).unwrap();
        assert!(matches!(
            brute_force_min(&data, &[FamilySpec::All, FamilySpec::Spherical], 2),
            Err(CecError::OracleSizeExceeded { .. })
        ));
    }
}
