use super::estimate::estimate_payoffs_mc;
use super::stats::log_log_slope;
use crate::abm::{AgentType, PerType, PopulationCounts};
use crate::error::{Error, Result};
use crate::model::{expected_payoffs, GameParams, PayoffVector, SimplexPoint};
use crate::rng::derive_seed;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<T> {
    pub reps: u64,
    pub mean: PerType<Option<T>>,
    /// `|mean - analytic|`.
    pub abs_error: PerType<Option<T>>,
    pub stderr: PerType<Option<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<T> {
    pub point: SimplexPoint<T>,
    pub analytic: PayoffVector<T>,
    pub rows: Vec<ConvergenceRow<T>>,
    /// Log-log slope of stderr against reps; `None` where stderr vanishes.
    pub stderr_slope: PerType<Option<T>>,
}

/// Monte Carlo error against the closed-form payoffs for an increasing
/// replicate schedule.
pub fn convergence_study<T: Real>(
    point: &SimplexPoint<T>,
    params: &GameParams<T>,
    population: u64,
    schedule: &[u64],
    seed: u64,
) -> Result<ConvergenceStudy<T>> {
    if schedule.len() < 3 {
        return Err(Error::domain(format!(
            "replicate schedule needs at least 3 entries, got {}",
            schedule.len()
        )));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("replicate schedule must be strictly increasing"));
    }
    let snapped = PopulationCounts::from_point(point, population)?.proportions::<T>();
    let analytic = expected_payoffs(&snapped, params);
    if analytic.sitter.is_neg_infinity() {
        return Err(Error::domain("analytic sitter payoff is -inf at this point"));
    }
    let reference = analytic.finite()?;

    let mut rows = Vec::with_capacity(schedule.len());
    for (k, &reps) in schedule.iter().enumerate() {
        let est = estimate_payoffs_mc(point, params, population, reps, derive_seed(seed, &[k as u64]))?;
        let abs_error = PerType::from_fn(|t| est.mean[t].map(|m| (m - reference[t.index()]).abs()));
        rows.push(ConvergenceRow {
            reps,
            mean: est.mean,
            abs_error,
            stderr: est.stderr,
        });
    }

    let xs: Vec<T> = schedule.iter().map(|&r| T::from_u64(r).expect("reps fit scalar")).collect();
    let stderr_slope = PerType::from_fn(|t: AgentType| {
        let ys: Option<Vec<T>> = rows.iter().map(|row| row.stderr[t]).collect();
        ys.and_then(|ys| log_log_slope(&xs, &ys))
    });
    Ok(ConvergenceStudy {
        point: snapped,
        analytic,
        rows,
        stderr_slope,
    })
}
