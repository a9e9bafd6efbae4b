//! Brood-parasitism evolutionary game toolkit.
//!
//! Three strategies share a population: sitters hatch every egg in their
//! nest, identifiers pay to discard foreign eggs, and cheaters lay in other
//! birds' nests. The crate provides the closed-form payoffs and interior
//! equilibrium, replicator dynamics, a generational agent-based model with a
//! deterministic parallel step, Monte Carlo estimators built on the model, and
//! a heuristic search for evolutionarily stable states.
//!
//! The analytic layers are generic over [`Scalar`]/[`Real`]; the aliases below
//! fix the common instantiations.

pub mod abm;
pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod rng;
pub mod scalar;

pub use abm::{AgentType, GenerationReport, ModelState, PerType, PopulationCounts};
pub use dynamics::{FixedPointReport, Stability, TangentVector, Trajectory};
pub use error::{Error, Result};
pub use model::{expected_payoffs, nash_equilibrium, payoff_residual, GameParams, PayoffVector, SimplexPoint, SitterPayoff};
pub use scalar::{Real, Scalar};

pub use num_rational::Rational64;

pub type Params = GameParams<f64>;
pub type Point = SimplexPoint<f64>;
pub type Payoffs = PayoffVector<f64>;
pub type Tangent = TangentVector<f64>;
pub type Model = ModelState<f64>;

pub type ExactParams = GameParams<Rational64>;
pub type ExactPoint = SimplexPoint<Rational64>;
pub type ExactPayoffs = PayoffVector<Rational64>;
