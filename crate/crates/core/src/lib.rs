//! Permutation flow-shop scheduling with a genetic algorithm whose parent
//! selection and mutation settings are chosen each generation by a
//! reinforcement-learning agent, plus classical baselines and an experiment harness.

pub mod baselines;
pub mod budget;
pub mod error;
pub mod experiment;
pub mod ga;
pub mod pfsp;
pub mod rl;
pub mod taillard;

pub use budget::{Budget, SizeClass};
pub use error::{Error, Result};
pub use ga::{GenerationParams, Individual, Population, SelectionMethod, StepOutcome};
pub use pfsp::{makespan, parse_taillard, validate_permutation, Instance, Permutation, Time};
pub use rl::{Action, AgentState, QNetwork, RlParams};
