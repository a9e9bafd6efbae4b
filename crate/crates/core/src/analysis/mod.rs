//! Estimators and searches built on the agent-based model.
//!
//! Work units (replicates, lattice points) draw their seeds from
//! `derive_seed(seed, unit path)` and are reduced in unit-index order, so every
//! result here is independent of the rayon pool size.

mod convergence;
mod estimate;
mod ess;
mod field;
mod polish;
mod stats;

pub use convergence::{convergence_study, ConvergenceRow, ConvergenceStudy};
pub use estimate::{estimate_payoffs_mc, McEstimate};
pub use ess::{ess_search, EssSearchConfig, EssSearchResult, SearchLevel};
pub use field::{abm_vector_field, analytic_field, mean_direction_cosine, FieldSample, FieldSource, DEFAULT_FIELD_REPS};
pub use polish::{polish_rest_point, POLISH_TOLERANCE};
pub use stats::{log_log_slope, mean_and_stderr};
