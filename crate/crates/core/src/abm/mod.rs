//! Generational agent-based model.
//!
//! Each generation runs a fixed phase order: nest owners lay, cheaters lay
//! into random nests, identifiers discard foreign eggs, birds sit and eggs
//! hatch, utilities are tallied, and the next generation is resampled in
//! proportion to each type's total utility.

mod engine;
mod population;

pub use engine::{
    account, init_model, reproduce, GenerationRecord, GenerationReport, ModelState, NestRegistry, Outcome,
};
pub use population::{AgentType, PerType, PopulationCounts};
