//! Zoom-in search for evolutionarily stable states.
//!
//! Each level runs the agent-based model from the lattice points of the
//! current region set, marks two kinds of promising places (lattice points
//! whose mean displacement is a local minimum, and dense clusters of
//! trajectory endpoints), then refines the lattice around them with more
//! agents and replicates. Surviving regions are polished onto exact rest
//! points of the replicator field and classified by linearization.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::polish::polish_rest_point;
use crate::abm::{ModelState, PopulationCounts};
use crate::dynamics::{classify_fixed_point, lattice, lattice_point, replicator_rhs, FixedPointReport, REST_POINT_TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{GameParams, SimplexPoint};
use crate::rng::derive_seed;
use crate::scalar::Real;

const DEDUP_DISTANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct EssSearchConfig {
    /// Lattice order at level 0 (cell size `1 / initial_order`).
    pub initial_order: usize,
    /// Agents per run at each level; the last entry repeats.
    pub populations: Vec<u64>,
    /// Replicates per lattice point at each level; the last entry repeats.
    pub replicates: Vec<u64>,
    pub refinement_factor: usize,
    /// Search stops once the lattice order reaches this (cell `1 / target_order`).
    pub target_order: usize,
    /// Generations per run when collecting endpoints.
    pub trajectory_length: u64,
    /// Smallest share of all endpoints a cluster needs to mark a region.
    pub min_cluster_fraction: f64,
}

impl Default for EssSearchConfig {
    fn default() -> Self {
        EssSearchConfig {
            initial_order: 10,
            populations: vec![100, 300, 1000],
            replicates: vec![50, 150, 500],
            refinement_factor: 2,
            target_order: 80,
            trajectory_length: 20,
            min_cluster_fraction: 0.05,
        }
    }
}

impl EssSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_order < 2 {
            return Err(Error::domain("initial lattice order must be at least 2"));
        }
        if self.refinement_factor < 2 {
            return Err(Error::domain("refinement factor must be at least 2"));
        }
        if self.target_order < self.initial_order {
            return Err(Error::domain("target cell size exceeds the initial cell size"));
        }
        if self.populations.is_empty() || self.replicates.is_empty() {
            return Err(Error::domain("population and replicate schedules must be non-empty"));
        }
        if self.populations.iter().chain(&self.replicates).any(|&x| x == 0) {
            return Err(Error::domain("schedule entries must be positive"));
        }
        if self.trajectory_length == 0 {
            return Err(Error::domain("trajectory length must be positive"));
        }
        if !(self.min_cluster_fraction > 0.0 && self.min_cluster_fraction <= 1.0) {
            return Err(Error::domain("cluster fraction must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Number of refinements after level 0: `ceil(log_factor(target / initial))`.
    pub fn refinements(&self) -> usize {
        let mut order = self.initial_order;
        let mut k = 0;
        while order < self.target_order {
            order *= self.refinement_factor;
            k += 1;
        }
        k
    }

    fn schedule(&self, level: usize) -> (u64, u64) {
        let pick = |v: &[u64]| v[level.min(v.len() - 1)];
        (pick(&self.populations), pick(&self.replicates))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchLevel<T> {
    pub level: usize,
    pub order: usize,
    pub cell_size: f64,
    pub population: u64,
    pub replicates: u64,
    pub points_evaluated: usize,
    /// Region centres carried to the next level (or to polishing).
    pub regions: Vec<SimplexPoint<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EssSearchResult<T> {
    pub candidates: Vec<FixedPointReport<T>>,
    pub trace: Vec<SearchLevel<T>>,
    pub ess_found: bool,
}

impl<T: Real> EssSearchResult<T> {
    pub fn interior_candidates(&self) -> impl Iterator<Item = &FixedPointReport<T>> {
        self.candidates.iter().filter(|c| c.location.is_interior())
    }
}

fn linf<T: Real>(a: &SimplexPoint<T>, b: &SimplexPoint<T>) -> T {
    let (a, b) = (a.as_array(), b.as_array());
    (0..3).map(|k| (a[k] - b[k]).abs()).fold(T::zero(), T::max)
}

struct PointRuns {
    speed: f64,
    endpoints: Vec<[u64; 3]>,
}

fn run_point<T: Real>(
    params: &GameParams<T>,
    counts: PopulationCounts,
    trajectory_length: u64,
    seed: u64,
) -> ([i64; 3], [u64; 3]) {
    let mut state = ModelState::new(counts, *params, 0.0, seed).expect("validated counts");
    let pre = counts.per_type();
    let mut first = [0i64; 3];
    for g in 0..trajectory_length {
        state = state.step().0;
        if g == 0 {
            let post = state.counts().per_type();
            first = [
                post.sitter as i64 - pre.sitter as i64,
                post.identifier as i64 - pre.identifier as i64,
                post.cheater as i64 - pre.cheater as i64,
            ];
        }
    }
    let end = state.counts();
    (first, [end.sitters(), end.identifiers(), end.cheaters()])
}

fn evaluate_level<T: Real>(
    params: &GameParams<T>,
    config: &EssSearchConfig,
    level: usize,
    points: &[[usize; 3]],
    order: usize,
    seed: u64,
) -> Result<Vec<PointRuns>> {
    let (population, reps) = config.schedule(level);
    let counts: Vec<PopulationCounts> = points
        .iter()
        .map(|&abc| PopulationCounts::from_point(&lattice_point::<T>(abc, order), population))
        .collect::<Result<_>>()?;
    let units: Vec<(usize, u64)> = (0..points.len()).flat_map(|j| (0..reps).map(move |r| (j, r))).collect();
    let outcomes: Vec<([i64; 3], [u64; 3])> = units
        .par_iter()
        .map(|&(j, r)| {
            let [a, b, _] = points[j];
            let unit_seed = derive_seed(seed, &[level as u64, a as u64, b as u64, r]);
            run_point(params, counts[j], config.trajectory_length, unit_seed)
        })
        .collect();
    Ok(outcomes
        .chunks(reps as usize)
        .map(|chunk| {
            let mut total = [0i64; 3];
            for (first, _) in chunk {
                for k in 0..3 {
                    total[k] += first[k];
                }
            }
            let scale = (population * reps) as f64;
            let mean = total.map(|d| d as f64 / scale);
            PointRuns {
                speed: mean.iter().map(|x| x * x).sum::<f64>().sqrt(),
                endpoints: chunk.iter().map(|(_, end)| *end).collect(),
            }
        })
        .collect())
}

/// Lattice points whose mean displacement is no larger than at any evaluated neighbour.
fn slow_points(points: &[[usize; 3]], runs: &[PointRuns]) -> Vec<usize> {
    let index: HashMap<[usize; 3], usize> = points.iter().enumerate().map(|(j, &p)| (p, j)).collect();
    (0..points.len())
        .filter(|&j| {
            let p = points[j];
            let mut ok = true;
            for from in 0..3 {
                for to in 0..3 {
                    if from == to || p[from] == 0 {
                        continue;
                    }
                    let mut q = p;
                    q[from] -= 1;
                    q[to] += 1;
                    if let Some(&k) = index.get(&q) {
                        ok &= runs[j].speed <= runs[k].speed;
                    }
                }
            }
            ok
        })
        .collect()
}

/// Single-linkage clusters of endpoints (L∞ radius), each represented by its
/// densest member. Clusters holding less than `min_fraction` of all
/// endpoints are dropped.
fn endpoint_clusters(endpoints: &BTreeMap<[u64; 3], u64>, radius: f64, min_fraction: f64) -> Vec<[f64; 3]> {
    let unique: Vec<([f64; 3], u64)> = endpoints
        .iter()
        .map(|(c, &w)| {
            let n = (c[0] + c[1] + c[2]) as f64;
            (c.map(|x| x as f64 / n), w)
        })
        .collect();
    let total: u64 = unique.iter().map(|(_, w)| w).sum();
    let close = |a: &[f64; 3], b: &[f64; 3]| (0..3).all(|k| (a[k] - b[k]).abs() <= radius + 1e-12);

    let mut parent: Vec<usize> = (0..unique.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..unique.len() {
        for b in a + 1..unique.len() {
            if close(&unique[a].0, &unique[b].0) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for x in 0..unique.len() {
        let root = find(&mut parent, x);
        members.entry(root).or_default().push(x);
    }
    members
        .values()
        .filter(|m| m.iter().map(|&x| unique[x].1).sum::<u64>() as f64 >= min_fraction * total as f64)
        .map(|m| {
            let density = |x: usize| -> u64 {
                m.iter()
                    .filter(|&&y| close(&unique[x].0, &unique[y].0))
                    .map(|&y| unique[y].1)
                    .sum()
            };
            let best = m
                .iter()
                .copied()
                .max_by(|&x, &y| {
                    density(x)
                        .cmp(&density(y))
                        .then(unique[x].1.cmp(&unique[y].1))
                        .then(y.cmp(&x))
                })
                .expect("non-empty cluster");
            unique[best].0
        })
        .collect()
}

/// Heuristic search for evolutionarily stable states.
pub fn ess_search<T: Real>(params: &GameParams<T>, config: &EssSearchConfig, seed: u64) -> Result<EssSearchResult<T>> {
    config.validate()?;
    let mut trace: Vec<SearchLevel<T>> = Vec::new();
    let mut regions: Vec<SimplexPoint<T>> = Vec::new();
    let mut order = config.initial_order;
    let mut level = 0;
    loop {
        let (population, reps) = config.schedule(level);
        let cell = T::one() / T::from_usize(order).expect("order fits scalar");
        let points: Vec<[usize; 3]> = if level == 0 {
            lattice(order)
        } else {
            let reach = T::one() / T::from_usize(order / config.refinement_factor).expect("order fits scalar");
            let slack = T::lit(1e-12);
            lattice(order)
                .into_iter()
                .filter(|&abc| {
                    let p = lattice_point::<T>(abc, order);
                    regions.iter().any(|r| linf(&p, r) <= reach + slack)
                })
                .collect()
        };
        let runs = evaluate_level(params, config, level, &points, order, seed)?;

        let mut found: Vec<SimplexPoint<T>> = slow_points(&points, &runs)
            .into_iter()
            .map(|j| lattice_point(points[j], order))
            .collect();
        let mut endpoints: BTreeMap<[u64; 3], u64> = BTreeMap::new();
        for run in &runs {
            for end in &run.endpoints {
                *endpoints.entry(*end).or_default() += 1;
            }
        }
        let radius = cell.to_f64().expect("cell size is finite");
        for centre in endpoint_clusters(&endpoints, radius, config.min_cluster_fraction) {
            found.push(SimplexPoint::from_array(centre.map(|x| T::lit(x)))?);
        }
        let mut merged: Vec<SimplexPoint<T>> = Vec::new();
        for p in found {
            if !merged.iter().any(|q| linf(q, &p) <= cell) {
                merged.push(p);
            }
        }
        regions = merged;
        trace.push(SearchLevel {
            level,
            order,
            cell_size: radius,
            population,
            replicates: reps,
            points_evaluated: points.len(),
            regions: regions.clone(),
        });
        if order >= config.target_order {
            break;
        }
        order *= config.refinement_factor;
        level += 1;
    }

    let cell = T::one() / T::from_usize(order).expect("order fits scalar");
    let polished: Vec<(SimplexPoint<T>, T)> = regions
        .par_iter()
        .map(|r| {
            let p = polish_rest_point(r, params, cell);
            (p, replicator_rhs(&p, params).norm())
        })
        .collect();
    let mut rest_points: Vec<(SimplexPoint<T>, T)> = Vec::new();
    for (p, speed) in polished {
        if speed.is_nan() || speed > T::lit(REST_POINT_TOLERANCE) {
            continue;
        }
        match rest_points
            .iter_mut()
            .find(|(q, _)| q.l1_distance(&p) <= T::lit(DEDUP_DISTANCE))
        {
            Some(existing) if speed < existing.1 => *existing = (p, speed),
            Some(_) => {}
            None => rest_points.push((p, speed)),
        }
    }
    let candidates = rest_points
        .iter()
        .map(|(p, _)| classify_fixed_point(p, params))
        .collect::<Result<Vec<_>>>()?;
    let ess_found = candidates.iter().any(|c| c.ess_flag);
    Ok(EssSearchResult {
        candidates,
        trace,
        ess_found,
    })
}
