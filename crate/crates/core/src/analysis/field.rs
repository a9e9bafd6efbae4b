use rayon::prelude::*;

use crate::abm::{ModelState, PopulationCounts};
use crate::dynamics::{lattice, lattice_point, vector_field_grid, TangentVector};
use crate::error::{Error, Result};
use crate::model::{GameParams, SimplexPoint};
use crate::rng::derive_seed;
use crate::scalar::Real;

/// Replicates per lattice point for ABM fields.
pub const DEFAULT_FIELD_REPS: u64 = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSource {
    Abm,
    Analytic,
}

impl FieldSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            FieldSource::Abm => "abm",
            FieldSource::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample<T> {
    pub point: SimplexPoint<T>,
    /// Replicator velocity (analytic) or mean one-generation displacement (abm).
    pub displacement: TangentVector<T>,
    /// Zero for analytic samples.
    pub reps: u64,
    pub source: FieldSource,
}

pub fn analytic_field<T: Real>(params: &GameParams<T>, order: usize) -> Result<Vec<FieldSample<T>>> {
    Ok(vector_field_grid(params, order)?
        .into_iter()
        .map(|(point, v)| FieldSample {
            point,
            displacement: v,
            reps: 0,
            source: FieldSource::Analytic,
        })
        .collect())
}

/// Mean one-generation change in proportions from each lattice point.
///
/// Each of the `reps` replicates starts a fresh model at the counts nearest
/// the lattice point and takes one full step, reproduction included.
pub fn abm_vector_field<T: Real>(
    params: &GameParams<T>,
    population: u64,
    reps: u64,
    order: usize,
    mutation_rate: f64,
    seed: u64,
) -> Result<Vec<FieldSample<T>>> {
    if order < 2 {
        return Err(Error::domain(format!("lattice order must be at least 2, got {order}")));
    }
    if population < order as u64 {
        return Err(Error::domain(format!(
            "population {population} is smaller than lattice order {order}"
        )));
    }
    if reps == 0 {
        return Err(Error::domain("replicate count must be at least 1"));
    }
    let points = lattice(order);
    points
        .par_iter()
        .enumerate()
        .map(|(j, &abc)| {
            let point: SimplexPoint<T> = lattice_point(abc, order);
            let counts = PopulationCounts::from_point(&point, population)?;
            let pre = counts.per_type();
            let moves: Vec<[i64; 3]> = (0..reps)
                .map(|r| {
                    let model = ModelState::new(counts, *params, mutation_rate, derive_seed(seed, &[j as u64, r]))?;
                    let (_, report) = model.step();
                    let post = report.post_counts.per_type();
                    Ok([
                        post.sitter as i64 - pre.sitter as i64,
                        post.identifier as i64 - pre.identifier as i64,
                        post.cheater as i64 - pre.cheater as i64,
                    ])
                })
                .collect::<Result<_>>()?;
            let scale = T::from_u64(population * reps).expect("sample size fits scalar");
            let mut total = [0i64; 3];
            for m in &moves {
                for k in 0..3 {
                    total[k] += m[k];
                }
            }
            Ok(FieldSample {
                point,
                displacement: TangentVector::from_array(total.map(|d| T::from_i64(d).expect("count fits") / scale)),
                reps,
                source: FieldSource::Abm,
            })
        })
        .collect()
}

/// Average direction cosine between matched samples of two fields, over
/// points whose every share is at least `min_share`. Pairs where either
/// vector vanishes are skipped.
pub fn mean_direction_cosine<T: Real>(a: &[FieldSample<T>], b: &[FieldSample<T>], min_share: T) -> Option<T> {
    let mut sum = T::zero();
    let mut n = 0usize;
    for (x, y) in a.iter().zip(b) {
        debug_assert_eq!(x.point, y.point);
        if x.point.as_array().iter().any(|&p| p < min_share) {
            continue;
        }
        if let Some(c) = x.displacement.direction_cosine(&y.displacement) {
            sum = sum + c;
            n += 1;
        }
    }
    (n > 0).then(|| sum / T::from_usize(n).expect("count fits"))
}
