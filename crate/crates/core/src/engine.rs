//! Energy minimization: Hartigan and Lloyd passes with cluster removal, the
//! single-start driver and the multi-start driver.
//!
//! The energy of a partition `X_1..X_k` of `n` points is
//! `sum_i p_i (-ln p_i + H(X_i | F_i))` with `p_i = |X_i| / n`. Every cluster
//! pays `-ln p_i` per point, so clusters that do not pay for themselves get
//! drained and removed once they fall below the minimal cardinality.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{CecError, Result};
use crate::init::{initialize, rng_from_seed, InitMethod};
use crate::linalg::{Moments, SymMatrix};
use crate::models::{FamilySpec, Gaussian, ShapeBound};

/// Relative improvement a move must achieve to be accepted.
const MOVE_TOLERANCE: f64 = 1e-12;
const INIT_ATTEMPTS: usize = 10;
// repair passes after a trial merge, and how pessimistic the early stop is
const MERGE_PASSES: usize = 8;
const MERGE_ABORT: f64 = 0.5;

/// Minimization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Hartigan,
    Lloyd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hartigan => "hartigan",
            Method::Lloyd => "lloyd",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = CecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hartigan" => Ok(Method::Hartigan),
            "lloyd" => Ok(Method::Lloyd),
            other => Err(CecError::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

/// Minimal cluster size, as a percentage of the data or an absolute count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CardMin {
    Percent(f64),
    Count(usize),
}

impl Default for CardMin {
    fn default() -> Self {
        CardMin::Percent(5.0)
    }
}

impl CardMin {
    /// Resolves to a point count, never below `dim + 1`.
    pub fn resolve(self, n: usize, dim: usize) -> usize {
        let raw = match self {
            // the epsilon keeps e.g. 5% of 100 at 5 rather than 6
            CardMin::Percent(pct) => ((pct * n as f64) / 100.0 - 1e-9).ceil().max(0.0) as usize,
            CardMin::Count(c) => c,
        };
        raw.max(dim + 1)
    }
}

impl std::fmt::Display for CardMin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CardMin::Percent(p) => write!(f, "{p}%"),
            CardMin::Count(c) => write!(f, "{c}"),
        }
    }
}

impl std::str::FromStr for CardMin {
    type Err = CecError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || CecError::InvalidParameter(format!("invalid card-min '{s}'"));
        if let Some(pct) = s.strip_suffix('%') {
            let v: f64 = pct.trim().parse().map_err(|_| bad())?;
            if !(0.0..=100.0).contains(&v) {
                return Err(bad());
            }
            Ok(CardMin::Percent(v))
        } else {
            s.parse::<usize>().map(CardMin::Count).map_err(|_| bad())
        }
    }
}

/// Parameters of a clustering run.
#[derive(Debug, Clone)]
pub struct CecConfig {
    /// One family per initial cluster; its length is the initial `k`.
    pub families: Vec<FamilySpec>,
    pub max_iterations: usize,
    pub card_min: CardMin,
    pub init: InitMethod,
    pub nstart: usize,
    pub seed: Option<u64>,
    pub method: Method,
    /// Run restarts on the rayon pool. Results do not depend on this.
    pub parallel: bool,
    /// When passes stall, try merging pairs of clusters before stopping.
    pub merge_search: bool,
}

impl CecConfig {
    /// `k` clusters sharing one family.
    pub fn new(k: usize, family: FamilySpec) -> Self {
        Self::mixed(vec![family; k])
    }

    /// One family per cluster, bound in center creation order.
    pub fn mixed(families: Vec<FamilySpec>) -> Self {
        Self {
            families,
            max_iterations: 100,
            card_min: CardMin::default(),
            init: InitMethod::default(),
            nstart: 1,
            seed: None,
            method: Method::default(),
            parallel: true,
            merge_search: true,
        }
    }

    pub fn k(&self) -> usize {
        self.families.len()
    }

    pub fn with_nstart(mut self, nstart: usize) -> Self {
        self.nstart = nstart;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_card_min(mut self, card_min: CardMin) -> Self {
        self.card_min = card_min;
        self
    }

    pub fn with_init(mut self, init: InitMethod) -> Self {
        self.init = init;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn with_merge_search(mut self, merge_search: bool) -> Self {
        self.merge_search = merge_search;
        self
    }

    fn validate(&self, data: &DataMatrix) -> Result<()> {
        if self.families.is_empty() {
            return Err(CecError::InvalidParameter("number of centers must be at least 1".into()));
        }
        if self.nstart == 0 {
            return Err(CecError::InvalidParameter("nstart must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(CecError::InvalidParameter("iter-max must be at least 1".into()));
        }
        if data.rows() <= data.dim() {
            return Err(CecError::TooFewPoints {
                points: data.rows(),
                dim: data.dim(),
            });
        }
        if self.k() > data.rows() {
            return Err(CecError::TooManyCenters {
                k: self.k(),
                n: data.rows(),
            });
        }
        for f in &self.families {
            f.check_dim(data.dim())?;
        }
        Ok(())
    }
}

/// Sufficient statistics of one cluster together with its family.
#[derive(Debug, Clone)]
pub struct ClusterState {
    pub moments: Moments,
    pub family: FamilySpec,
    pub alive: bool,
}

/// Contribution `p (-ln p + H)` of one cluster; empty clusters contribute 0.
pub fn cluster_term(moments: &Moments, family: &FamilySpec, total_n: usize) -> f64 {
    if moments.count == 0 {
        return 0.0;
    }
    let p = moments.count as f64 / total_n as f64;
    let h = family.cross_entropy(moments);
    if h.is_infinite() {
        return h;
    }
    p * (-p.ln() + h)
}

/// Total energy over the alive clusters.
pub fn energy(clusters: &[ClusterState], total_n: usize) -> f64 {
    clusters
        .iter()
        .filter(|c| c.alive)
        .map(|c| cluster_term(&c.moments, &c.family, total_n))
        .sum()
}

/// `cluster_term` with the logarithms of counts and the data-independent
/// parts of each family precomputed.
#[derive(Debug, Clone)]
struct TermTable {
    n: f64,
    log_counts: Vec<f64>,
    constants: Vec<f64>,
}

impl TermTable {
    fn new(n: usize, dim: usize, families: &[FamilySpec]) -> Self {
        Self {
            n: n as f64,
            log_counts: (0..=n).map(|c| (c as f64).ln()).collect(),
            constants: families.iter().map(|f| f.log_constant(dim)).collect(),
        }
    }

    #[inline]
    fn term(&self, j: usize, family: &FamilySpec, m: &Moments) -> f64 {
        if m.count == 0 {
            return 0.0;
        }
        self.term_from_shape(j, m.count, family.shape_cost(&m.cov))
    }

    #[inline]
    fn term_from_shape(&self, j: usize, count: usize, shape: f64) -> f64 {
        if shape.is_infinite() {
            return shape;
        }
        let p = count as f64 / self.n;
        p * (self.log_counts[self.log_counts.len() - 1] - self.log_counts[count] + self.constants[j] + shape)
    }
}

/// `new - old`, treating two infinities of the same sign as no change.
#[inline]
fn change(old: f64, new: f64) -> f64 {
    if old.is_infinite() && new == old {
        0.0
    } else {
        new - old
    }
}

#[inline]
fn improves(delta: f64, energy: f64) -> bool {
    delta < 0.0 && delta < -MOVE_TOLERANCE * energy.abs()
}

/// Mutable clustering state: per-cluster statistics plus membership.
///
/// Membership labels are 1-based cluster indices; 0 marks an unassigned
/// point.
#[derive(Debug, Clone)]
pub struct EngineState<'a> {
    data: &'a DataMatrix,
    clusters: Vec<ClusterState>,
    terms: Vec<f64>,
    table: TermTable,
    membership: Vec<usize>,
    threshold: usize,
    energy: f64,
    scratch_remove: Moments,
    scratch_add: Moments,
    scratch_best: Moments,
    // change stamps: a point is re-examined only against clusters modified
    // since it was last checked
    stamp: u64,
    modified: Vec<u64>,
    checked: Vec<u64>,
    bounds: Vec<ShapeBound>,
    // lower_delta = offset + mult * kernel
    bound_affine: Vec<(f64, f64)>,
    /// Spherical kernel weight per cluster, NaN for other kernels.
    bound_weight: Vec<f64>,
    /// Cluster means at the last bound refresh, row-major.
    bound_means: Vec<f64>,
    bound_stamp: Vec<u64>,
    removal_checked: Vec<u64>,
    // per point: its label when the floor was taken, and a lower bound on
    // the best addition delta over the other clusters
    floors: Vec<(usize, f64)>,
}

struct Removal {
    delta: f64,
    targets: Vec<(usize, usize)>,
    moments: Vec<Moments>,
    terms: Vec<f64>,
}

impl<'a> EngineState<'a> {
    /// Builds the state from an initial labeling (1-based, 0 = unassigned).
    /// Clusters smaller than `threshold` are removed at once and their
    /// points reassigned greedily.
    pub fn new(
        data: &'a DataMatrix,
        families: &[FamilySpec],
        membership: Vec<usize>,
        threshold: usize,
    ) -> Result<Self> {
        if membership.len() != data.rows() {
            return Err(CecError::DimensionMismatch {
                expected: data.rows(),
                got: membership.len(),
            });
        }
        if let Some(&bad) = membership.iter().find(|&&l| l > families.len()) {
            return Err(CecError::InvalidParameter(format!(
                "label {bad} exceeds number of clusters {}",
                families.len()
            )));
        }
        let dim = data.dim();
        let clusters = families
            .iter()
            .map(|f| ClusterState {
                moments: Moments::empty(dim),
                family: f.clone(),
                alive: true,
            })
            .collect();
        let mut state = Self {
            data,
            clusters,
            terms: vec![0.0; families.len()],
            table: TermTable::new(data.rows(), dim, families),
            membership,
            threshold,
            energy: 0.0,
            scratch_remove: Moments::empty(dim),
            scratch_add: Moments::empty(dim),
            scratch_best: Moments::empty(dim),
            stamp: 1,
            modified: vec![1; families.len()],
            checked: vec![0; data.rows()],
            bounds: vec![ShapeBound::none(); families.len()],
            bound_affine: vec![(0.0, 0.0); families.len()],
            bound_weight: vec![f64::NAN; families.len()],
            bound_means: vec![0.0; families.len() * dim],
            bound_stamp: vec![0; families.len()],
            removal_checked: vec![0; families.len()],
            floors: vec![(0, f64::NEG_INFINITY); data.rows()],
        };
        state.recompute();
        state.remove_small_clusters()?;
        Ok(state)
    }

    pub fn clusters(&self) -> &[ClusterState] {
        &self.clusters
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn alive_count(&self) -> usize {
        self.clusters.iter().filter(|c| c.alive).count()
    }

    fn touch(&mut self, j: usize) {
        self.stamp += 1;
        self.modified[j] = self.stamp;
    }

    fn touch_all(&mut self) {
        self.stamp += 1;
        self.modified.fill(self.stamp);
    }

    /// Recomputes every cluster's moments and the energy from scratch.
    pub fn recompute(&mut self) {
        let dim = self.data.dim();
        let k = self.clusters.len();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &l) in self.membership.iter().enumerate() {
            if l > 0 {
                rows[l - 1].push(i);
            }
        }
        for (c, rows) in self.clusters.iter_mut().zip(&rows) {
            c.moments = Moments::of_points(rows.iter().map(|&r| self.data.row(r)), dim);
        }
        for (j, (t, c)) in self.terms.iter_mut().zip(&self.clusters).enumerate() {
            *t = if c.alive {
                self.table.term(j, &c.family, &c.moments)
            } else {
                0.0
            };
        }
        self.energy = self.terms.iter().sum();
        for j in 0..k {
            self.refresh_bound(j);
        }
    }

    /// Lower bound on the term increase of adding `x` to cluster `j`, if
    /// its cached bound is current.
    #[inline]
    fn lower_delta(&self, j: usize, x: &[f64]) -> Option<f64> {
        if self.bound_stamp[j] != self.modified[j] {
            return None;
        }
        let (offset, mult) = self.bound_affine[j];
        let w = self.bound_weight[j];
        if w >= 0.0 {
            let dim = x.len();
            let mean = &self.bound_means[j * dim..(j + 1) * dim];
            let dd: f64 = mean.iter().zip(x).map(|(m, x)| (m - x) * (m - x)).sum();
            let u = w * dd;
            return Some(offset + mult * (u / (1.0 + u)));
        }
        if self.bounds[j].is_none() {
            return None;
        }
        Some(offset + mult * self.bounds[j].kernel(&self.clusters[j].moments.mean, x))
    }

    fn refresh_stale_bounds(&mut self) {
        for j in 0..self.clusters.len() {
            if self.bound_stamp[j] != self.modified[j] {
                self.refresh_bound(j);
            }
        }
    }

    fn refresh_bound(&mut self, j: usize) {
        let c = &self.clusters[j];
        let mut bound = if c.alive {
            c.family.shape_bound(&c.moments)
        } else {
            ShapeBound::none()
        };
        if !self.terms[j].is_finite() || c.moments.count + 1 >= self.table.log_counts.len() {
            bound = ShapeBound::none();
        }
        if !bound.is_none() {
            let count = c.moments.count + 1;
            let p = count as f64 / self.table.n;
            let k = self.table.log_counts[self.table.log_counts.len() - 1] - self.table.log_counts[count]
                + self.table.constants[j];
            self.bound_affine[j] = (p * (k + bound.base) - self.terms[j], p * bound.half);
        }
        let dim = c.moments.dim();
        self.bound_weight[j] = bound.spherical_weight().unwrap_or(f64::NAN);
        self.bound_means[j * dim..(j + 1) * dim].copy_from_slice(&c.moments.mean);
        self.bounds[j] = bound;
        self.bound_stamp[j] = self.modified[j];
    }

    fn remove_small_clusters(&mut self) -> Result<bool> {
        let mut removed = false;
        for j in 0..self.clusters.len() {
            let c = &mut self.clusters[j];
            if c.alive && c.moments.count < self.threshold {
                c.alive = false;
                c.moments = Moments::empty(self.data.dim());
                self.terms[j] = 0.0;
                for l in self.membership.iter_mut().filter(|l| **l == j + 1) {
                    *l = 0;
                }
                removed = true;
            }
        }
        if self.alive_count() == 0 {
            return Err(CecError::NoClusters);
        }
        self.energy = self.terms.iter().sum();
        self.assign_unassigned()?;
        Ok(removed)
    }

    /// Places every unassigned point, in index order, into the cluster whose
    /// term grows the least.
    fn assign_unassigned(&mut self) -> Result<bool> {
        let mut any = false;
        for i in 0..self.membership.len() {
            if self.membership[i] != 0 {
                continue;
            }
            let x = self.data.row(i);
            let (j, _) = self.best_addition(x, None, 0, f64::INFINITY).0.ok_or(CecError::NoClusters)?;
            self.clusters[j].moments.with_point_into(x, &mut self.scratch_best);
            std::mem::swap(&mut self.clusters[j].moments, &mut self.scratch_best);
            self.terms[j] = self.table.term(j, &self.clusters[j].family, &self.clusters[j].moments);
            self.membership[i] = j + 1;
            self.touch(j);
            any = true;
        }
        self.energy = self.terms.iter().sum();
        Ok(any)
    }

    #[inline]
    fn margin(&self) -> f64 {
        1e-12 * (1.0 + self.energy.abs())
    }

    /// Alive cluster (other than `exclude`) whose term grows the least when
    /// `x` joins it, and a lower bound on the increase over all candidates
    /// looked at.
    ///
    /// Candidates whose increase provably exceeds `budget` are skipped.
    fn best_addition(
        &mut self,
        x: &[f64],
        exclude: Option<usize>,
        since: u64,
        budget: f64,
    ) -> (Option<(usize, f64)>, f64) {
        let mut best: Option<(usize, f64)> = None;
        let mut floor = f64::INFINITY;
        let margin = self.margin();
        for j in 0..self.clusters.len() {
            if !self.clusters[j].alive || Some(j) == exclude || self.modified[j] <= since {
                continue;
            }
            if self.bound_stamp[j] != self.modified[j] {
                self.refresh_bound(j);
            }
            if let Some(lower) = self.lower_delta(j, x) {
                if lower > budget + margin || best.is_some_and(|(_, d)| lower >= d) {
                    floor = floor.min(lower);
                    continue;
                }
            }
            let c = &self.clusters[j];
            let shape = c.family.added_shape_cost(&c.moments, x, &mut self.scratch_add);
            let t = self.table.term_from_shape(j, c.moments.count + 1, shape);
            let delta = change(self.terms[j], t);
            floor = floor.min(delta);
            if best.is_none_or(|(_, d)| delta < d) {
                best = Some((j, delta));
            }
        }
        (best, floor)
    }

    /// Energy change of removing cluster `c` and greedily reassigning its
    /// members, without committing anything.
    fn evaluate_removal(&self, c: usize) -> Option<Removal> {
        let mut moments: Vec<Moments> = self.clusters.iter().map(|c| c.moments.clone()).collect();
        let mut terms = self.terms.clone();
        let mut delta = -terms[c];
        terms[c] = 0.0;
        moments[c] = Moments::empty(self.data.dim());
        let mut scratch = Moments::empty(self.data.dim());
        let mut best_m = Moments::empty(self.data.dim());
        let mut targets = Vec::with_capacity(self.clusters[c].moments.count);
        // clusters that have not received points yet can still use their
        // cached bounds
        let mut pristine: Vec<bool> = (0..self.clusters.len())
            .map(|j| self.bound_stamp[j] == self.modified[j])
            .collect();
        for (i, _) in self.membership.iter().enumerate().filter(|(_, &l)| l == c + 1) {
            let x = self.data.row(i);
            let mut best: Option<(usize, f64, f64)> = None;
            for (j, cl) in self.clusters.iter().enumerate() {
                if !cl.alive || j == c {
                    continue;
                }
                if let (Some((_, bd, _)), true) = (best, pristine[j]) {
                    if let Some(lower) = self.lower_delta(j, x) {
                        if lower >= bd {
                            continue;
                        }
                    }
                }
                let shape = cl.family.added_shape_cost(&moments[j], x, &mut scratch);
                let t = self.table.term_from_shape(j, moments[j].count + 1, shape);
                let d = change(terms[j], t);
                if best.is_none_or(|(_, bd, _)| d < bd) {
                    best = Some((j, d, t));
                }
            }
            let (j, d, _) = best?;
            pristine[j] = false;
            moments[j].with_point_into(x, &mut best_m);
            std::mem::swap(&mut moments[j], &mut best_m);
            let t = self.table.term(j, &self.clusters[j].family, &moments[j]);
            terms[j] = t;
            delta += d;
            targets.push((i, j));
        }
        Some(Removal {
            delta,
            targets,
            moments,
            terms,
        })
    }

    fn commit_removal(&mut self, c: usize, removal: Removal) {
        for (i, j) in removal.targets {
            self.membership[i] = j + 1;
            self.modified[j] = self.stamp + 1;
        }
        self.stamp += 1;
        self.modified[c] = self.stamp;
        for (cl, m) in self.clusters.iter_mut().zip(removal.moments) {
            cl.moments = m;
        }
        self.clusters[c].alive = false;
        self.terms = removal.terms;
        self.energy = self.terms.iter().sum();
    }

    /// One sweep over all points in index order. Returns whether any
    /// membership changed.
    pub fn hartigan_pass(&mut self) -> Result<bool> {
        let n = self.data.rows();
        let dim = self.data.dim();
        let mut changed = false;
        for i in 0..n {
            let x = self.data.row(i);
            let label = self.membership[i];
            if label == 0 {
                let (j, _) = self.best_addition(x, None, 0, f64::INFINITY).0.ok_or(CecError::NoClusters)?;
                self.clusters[j].moments.with_point_into(x, &mut self.scratch_best);
                std::mem::swap(&mut self.clusters[j].moments, &mut self.scratch_best);
                self.terms[j] = self.table.term(j, &self.clusters[j].family, &self.clusters[j].moments);
                self.energy = self.terms.iter().sum();
                self.membership[i] = j + 1;
                self.touch(j);
                self.checked[i] = self.stamp;
                changed = true;
                continue;
            }
            let c = label - 1;
            let last = self.checked[i];
            let donor_changed = self.modified[c] > last;
            let since = if donor_changed { 0 } else { last };
            self.checked[i] = self.stamp;
            let candidate_changed = (0..self.clusters.len())
                .any(|j| j != c && self.clusters[j].alive && self.modified[j] > last);
            if !donor_changed && !candidate_changed {
                continue;
            }
            let count = self.clusters[c].moments.count;
            let donor = &self.clusters[c];
            let removed_shape = donor.family.removed_shape_cost(&donor.moments, x, &mut self.scratch_remove);
            let removed_term = if count > 1 {
                self.table.term_from_shape(c, count - 1, removed_shape)
            } else {
                0.0
            };
            let removal_delta = change(self.terms[c], removed_term);
            let budget = if removal_delta.is_finite() {
                -removal_delta
            } else {
                f64::INFINITY
            };
            // no other cluster changed, so the best addition is still bounded
            // by the floor found at the last check
            let (floor_label, floor) = self.floors[i];
            let known = floor_label == label;
            if known && !candidate_changed && count - 1 > dim && floor > budget + self.margin() {
                continue;
            }
            let (best, new_floor) = self.best_addition(x, Some(c), since, budget);
            self.floors[i] = if since == 0 || !known {
                (if since == 0 { label } else { 0 }, new_floor)
            } else {
                (label, floor.min(new_floor))
            };
            let Some((j, add_delta)) = best else {
                continue;
            };
            let total = removal_delta + add_delta;

            if count - 1 < self.threshold {
                // Leaving would drop the donor below the minimal size: judge
                // the move by the cost of removing the donor outright.
                let worth_checking = count - 1 <= dim || improves(total, self.energy);
                if worth_checking && self.removal_checked[c] != self.stamp {
                    self.refresh_stale_bounds();
                    self.removal_checked[c] = self.stamp;
                    if let Some(removal) = self.evaluate_removal(c) {
                        if improves(removal.delta, self.energy) {
                            self.commit_removal(c, removal);
                            self.checked[i] = self.stamp;
                            changed = true;
                        }
                    }
                }
                continue;
            }

            if improves(total, self.energy) {
                self.clusters[c]
                    .moments
                    .without_point_into(x, &mut self.scratch_remove);
                self.clusters[j].moments.with_point_into(x, &mut self.scratch_best);
                std::mem::swap(&mut self.clusters[c].moments, &mut self.scratch_remove);
                std::mem::swap(&mut self.clusters[j].moments, &mut self.scratch_best);
                self.terms[c] = removed_term;
                self.terms[j] = self.table.term(j, &self.clusters[j].family, &self.clusters[j].moments);
                self.energy = self.terms.iter().sum();
                self.membership[i] = j + 1;
                self.touch(c);
                self.touch(j);
                self.checked[i] = self.stamp;
                changed = true;
            }
        }
        Ok(changed)
    }

    /// Batch pass: every point goes to the cluster maximizing
    /// `ln p_i + ln f_i(x)` under the current fitted models, then all
    /// statistics are refit. Clusters that end below the minimal size are
    /// removed and their points reassigned greedily. If the resulting energy
    /// is higher than before, the batch step is discarded and a Hartigan
    /// pass is run instead.
    pub fn lloyd_pass(&mut self) -> Result<bool> {
        let n = self.data.rows();
        let models: Vec<Option<(f64, Gaussian)>> = self
            .clusters
            .iter()
            .map(|c| {
                if !c.alive || c.moments.count == 0 {
                    return None;
                }
                let cov = c.family.fitted_covariance(&c.moments);
                let g = Gaussian::new(&c.moments.mean, &cov).ok()?;
                Some(((c.moments.count as f64 / n as f64).ln(), g))
            })
            .collect();
        if models.iter().all(Option::is_none) {
            return self.hartigan_pass();
        }

        let before = self.clone();
        let mut changed = false;
        for i in 0..n {
            let x = self.data.row(i);
            let mut best: Option<(usize, f64)> = None;
            for (j, m) in models.iter().enumerate() {
                if let Some((log_p, g)) = m {
                    let score = log_p + g.log_pdf(x);
                    if best.is_none_or(|(_, s)| score > s) {
                        best = Some((j, score));
                    }
                }
            }
            let (j, _) = best.expect("at least one model");
            if self.membership[i] != j + 1 {
                self.membership[i] = j + 1;
                changed = true;
            }
        }
        self.recompute();
        self.remove_small_clusters()?;
        self.recompute();
        self.touch_all();

        if self.energy > before.energy + 1e-9 * before.energy.abs().max(1.0) || !self.energy.is_finite() {
            *self = before;
            return self.hartigan_pass();
        }
        Ok(changed)
    }

    /// Passes on a trial state until nothing moves, `MERGE_PASSES` have run,
    /// or the energy is clearly not going to drop below `target` in time.
    fn repair(&mut self, method: Method, target: f64) -> Result<()> {
        let mut last = self.energy;
        for pass in 0..MERGE_PASSES {
            let changed = match method {
                Method::Hartigan => self.hartigan_pass()?,
                Method::Lloyd => self.lloyd_pass()?,
            };
            if !changed {
                break;
            }
            let gap = self.energy - target;
            let left = (MERGE_PASSES - pass - 1) as f64;
            if pass > 0 && gap > 0.0 && gap > MERGE_ABORT * (last - self.energy) * left {
                break;
            }
            last = self.energy;
        }
        self.recompute();
        Ok(())
    }

    /// Tries merging pairs of clusters, cheapest merged energy first, each
    /// followed by a few repair passes. Returns the first outcome with lower
    /// energy than the current state.
    pub fn merge_search(&self, method: Method) -> Result<Option<Self>> {
        let alive: Vec<usize> = (0..self.clusters.len()).filter(|&c| self.clusters[c].alive).collect();
        if alive.len() < 2 {
            return Ok(None);
        }
        let mut pairs = Vec::new();
        for (x, &a) in alive.iter().enumerate() {
            for &b in &alive[x + 1..] {
                let merged = self.clusters[a].moments.merge(&self.clusters[b].moments)?;
                let ta = self.table.term(a, &self.clusters[a].family, &merged);
                let tb = self.table.term(b, &self.clusters[b].family, &merged);
                let (keep, drop, t) = if tb < ta { (b, a, tb) } else { (a, b, ta) };
                pairs.push((t - self.terms[a] - self.terms[b], keep, drop, merged));
            }
        }
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        for (_, keep, drop, merged) in pairs.into_iter().take(alive.len()) {
            let mut trial = self.clone();
            trial.clusters[keep].moments = merged;
            trial.clusters[drop].alive = false;
            trial.clusters[drop].moments = Moments::empty(self.data.dim());
            for l in trial.membership.iter_mut().filter(|l| **l == drop + 1) {
                *l = keep + 1;
            }
            trial.touch(keep);
            trial.touch(drop);
            trial.recompute();
            trial.repair(method, self.energy)?;
            if improves(trial.energy - self.energy, self.energy) {
                return Ok(Some(trial));
            }
        }
        Ok(None)
    }

    /// Membership relabeled to consecutive 1-based indices over the alive
    /// clusters, plus the original index of each surviving cluster.
    fn compact(&self) -> (Vec<usize>, Vec<usize>) {
        let alive: Vec<usize> = (0..self.clusters.len())
            .filter(|&j| self.clusters[j].alive && self.clusters[j].moments.count > 0)
            .collect();
        let mut relabel = vec![0; self.clusters.len() + 1];
        for (new, &old) in alive.iter().enumerate() {
            relabel[old + 1] = new + 1;
        }
        (self.membership.iter().map(|&l| relabel[l]).collect(), alive)
    }
}

/// Outcome of a clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct CecResult {
    /// 1-based cluster label per input row.
    pub membership: Vec<usize>,
    pub probabilities: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Sample covariance of each cluster.
    pub covariances: Vec<SymMatrix>,
    /// Covariance of the fitted member of each cluster's family.
    pub model_covariances: Vec<SymMatrix>,
    pub families: Vec<FamilySpec>,
    pub energy_trace: Vec<f64>,
    pub nclusters_trace: Vec<usize>,
    pub iterations: usize,
    pub final_energy: f64,
    pub elapsed_seconds: f64,
    /// Seed of the start that produced this result.
    pub seed: u64,
}

impl CecResult {
    pub fn nclusters(&self) -> usize {
        self.means.len()
    }

    /// Equality ignoring the wall-clock measurement.
    pub fn same_outcome(&self, other: &CecResult) -> bool {
        let mut a = self.clone();
        a.elapsed_seconds = other.elapsed_seconds;
        a == *other
    }
}

fn finish(
    state: &EngineState<'_>,
    energy_trace: Vec<f64>,
    nclusters_trace: Vec<usize>,
    iterations: usize,
    started: Instant,
    seed: u64,
) -> CecResult {
    let n = state.data.rows() as f64;
    let (membership, alive) = state.compact();
    let clusters: Vec<&ClusterState> = alive.iter().map(|&j| &state.clusters[j]).collect();
    let final_energy = *energy_trace.last().expect("trace holds the initial energy");
    CecResult {
        membership,
        probabilities: clusters.iter().map(|c| c.moments.count as f64 / n).collect(),
        means: clusters.iter().map(|c| c.moments.mean.clone()).collect(),
        covariances: clusters.iter().map(|c| c.moments.cov.clone()).collect(),
        model_covariances: clusters
            .iter()
            .map(|c| c.family.fitted_covariance(&c.moments))
            .collect(),
        families: clusters.iter().map(|c| c.family.clone()).collect(),
        energy_trace,
        nclusters_trace,
        iterations,
        final_energy,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        seed,
    }
}

fn iterate(
    mut state: EngineState<'_>,
    cfg: &CecConfig,
    started: Instant,
    seed: u64,
) -> Result<CecResult> {
    let mut energy_trace = vec![state.energy()];
    let mut nclusters_trace = vec![state.alive_count()];
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let changed = match cfg.method {
            Method::Hartigan => state.hartigan_pass()?,
            Method::Lloyd => state.lloyd_pass()?,
        };
        iterations += 1;
        // bounds drift from the streaming updates
        state.recompute();
        energy_trace.push(state.energy());
        nclusters_trace.push(state.alive_count());
        if !changed {
            if !cfg.merge_search || iterations >= cfg.max_iterations {
                break;
            }
            match state.merge_search(cfg.method)? {
                Some(better) => {
                    state = better;
                    iterations += 1;
                    energy_trace.push(state.energy());
                    nclusters_trace.push(state.alive_count());
                }
                None => break,
            }
        }
    }
    Ok(finish(&state, energy_trace, nclusters_trace, iterations, started, seed))
}

/// One start: seeding, then passes until nothing moves or `max_iterations`
/// passes have run.
pub fn run_single(data: &DataMatrix, cfg: &CecConfig, seed: u64) -> Result<CecResult> {
    cfg.validate(data)?;
    let started = Instant::now();
    let threshold = cfg.card_min.resolve(data.rows(), data.dim());
    let mut rng = rng_from_seed(seed);
    for _ in 0..INIT_ATTEMPTS {
        let membership = initialize(cfg.init, data, cfg.k(), &mut rng)?;
        match EngineState::new(data, &cfg.families, membership, threshold) {
            Ok(state) if state.energy().is_finite() => {
                return iterate(state, cfg, started, seed);
            }
            Ok(_) | Err(CecError::NoClusters) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(CecError::DegenerateInitialization {
        attempts: INIT_ATTEMPTS,
    })
}

/// Runs from a caller-supplied initial labeling (1-based, 0 = unassigned)
/// instead of seeding.
pub fn run_from_membership(
    data: &DataMatrix,
    cfg: &CecConfig,
    membership: Vec<usize>,
) -> Result<CecResult> {
    cfg.validate(data)?;
    let started = Instant::now();
    let threshold = cfg.card_min.resolve(data.rows(), data.dim());
    let state = EngineState::new(data, &cfg.families, membership, threshold)?;
    iterate(state, cfg, started, cfg.seed.unwrap_or(0))
}

/// `nstart` independent starts with seeds `seed, seed + 1, ...`; returns the
/// lowest final energy, ties to the earliest start.
pub fn run(data: &DataMatrix, cfg: &CecConfig) -> Result<CecResult> {
    cfg.validate(data)?;
    let base = cfg.seed.unwrap_or_else(rand::random);
    let seeds: Vec<u64> = (0..cfg.nstart as u64).map(|i| base.wrapping_add(i)).collect();
    let results: Vec<Result<CecResult>> = if cfg.parallel && cfg.nstart > 1 {
        seeds.par_iter().map(|&s| run_single(data, cfg, s)).collect()
    } else {
        seeds.iter().map(|&s| run_single(data, cfg, s)).collect()
    };
    let mut best: Option<CecResult> = None;
    let mut first_error = None;
    for r in results {
        match r {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.final_energy < b.final_energy) {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let best = best.ok_or_else(|| first_error.expect("nstart >= 1"))?;
    Ok(best)
}

/// Fitted mixture built from a result, for classifying new points and
/// evaluating the density estimate.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    components: Vec<Option<(f64, Gaussian)>>,
}

impl MixtureModel {
    pub fn new(result: &CecResult) -> Self {
        let components = result
            .probabilities
            .iter()
            .zip(&result.means)
            .zip(&result.model_covariances)
            .map(|((&p, m), cov)| Gaussian::new(m, cov).ok().map(|g| (p, g)))
            .collect();
        Self { components }
    }

    /// 0-based index of the cluster maximizing `p_i f_i(x)`. Clusters with
    /// a singular covariance are skipped.
    pub fn classify(&self, x: &[f64]) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in self.components.iter().enumerate() {
            if let Some((p, g)) = c {
                let score = p.ln() + g.log_pdf(x);
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((j, score));
                }
            }
        }
        best.map(|(j, _)| j).ok_or(CecError::SingularMatrix)
    }

    /// `sum_i p_i f_i(x)`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.components.iter().try_fold(0.0, |acc, c| match c {
            Some((p, g)) => Ok(acc + p * g.pdf(x)),
            None => Err(CecError::SingularMatrix),
        })
    }
}

pub fn classify(result: &CecResult, x: &[f64]) -> Result<usize> {
    MixtureModel::new(result).classify(x)
}

pub fn mixture_density(result: &CecResult, x: &[f64]) -> Result<f64> {
    MixtureModel::new(result).density(x)
}
