use rayon::prelude::*;

use super::stats::mean_and_stderr;
use crate::abm::{AgentType, ModelState, PerType, PopulationCounts};
use crate::error::{Error, Result};
use crate::model::{expected_payoffs, GameParams, PayoffVector, SimplexPoint};
use crate::rng::derive_seed;
use crate::scalar::Real;

/// Monte Carlo estimate of per-type mean utility at one population state.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate<T> {
    /// `None` for types absent from the snapped population.
    pub mean: PerType<Option<T>>,
    pub stderr: PerType<Option<T>>,
    pub reps: u64,
    pub population: u64,
    pub counts: PopulationCounts,
    /// Proportions of the snapped counts actually simulated.
    pub point: SimplexPoint<T>,
}

impl<T: Real> McEstimate<T> {
    /// Closed-form payoffs at the simulated proportions.
    pub fn analytic(&self, params: &GameParams<T>) -> PayoffVector<T> {
        expected_payoffs(&self.point, params)
    }
}

/// Runs `reps` independent measurement generations (no reproduction) at the
/// counts nearest `point` and averages the per-type mean utilities.
pub fn estimate_payoffs_mc<T: Real>(
    point: &SimplexPoint<T>,
    params: &GameParams<T>,
    population: u64,
    reps: u64,
    seed: u64,
) -> Result<McEstimate<T>> {
    if reps == 0 {
        return Err(Error::domain("replicate count must be at least 1"));
    }
    if population < 3 {
        return Err(Error::domain(format!("population {population} is below 3")));
    }
    let counts = PopulationCounts::from_point(point, population)?;
    let per_rep: Vec<PerType<Option<T>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let model = ModelState::new(counts, *params, 0.0, derive_seed(seed, &[r]))
                .expect("validated counts and rate");
            model.play(1).mean_utility
        })
        .collect();

    let mut mean = PerType::default();
    let mut stderr = PerType::default();
    for t in AgentType::ALL {
        let samples: Vec<T> = per_rep.iter().filter_map(|m| m[t]).collect();
        if let Some((m, se)) = mean_and_stderr(&samples) {
            mean[t] = Some(m);
            stderr[t] = Some(se);
        }
    }
    Ok(McEstimate {
        mean,
        stderr,
        reps,
        population,
        counts,
        point: counts.proportions(),
    })
}
