use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{fitness_entropy, Population};
use crate::pfsp::Time;

/// Agent observation: normalised mean makespan and normalised fitness entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    /// Mean makespan divided by the best makespan of the episode's initial population.
    pub avg_fitness_norm: f64,
    /// Fitness entropy divided by `log2 M`, in `[0, 1]`.
    pub entropy_norm: f64,
}

impl AgentState {
    pub fn features(&self) -> [f64; 2] {
        [self.avg_fitness_norm, self.entropy_norm]
    }
}

/// Encodes a raw fitness vector; a single member has zero normalised entropy.
pub fn encode_fitness(fitness: &[Time], initial_best: Time) -> Result<AgentState> {
    if initial_best == 0 {
        return Err(Error::contract("initial best makespan must be positive"));
    }
    if fitness.is_empty() {
        return Err(Error::contract("cannot encode an empty population"));
    }
    let entropy = fitness_entropy(fitness)?;
    let m = fitness.len();
    let entropy_norm = if m > 1 {
        (entropy / (m as f64).log2()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mean = fitness.iter().map(|&f| f as f64).sum::<f64>() / m as f64;
    Ok(AgentState {
        avg_fitness_norm: mean / initial_best as f64,
        entropy_norm,
    })
}

pub fn encode_state(pop: &Population, initial_best: Time) -> Result<AgentState> {
    let fitness: Vec<Time> = pop.fitness().collect();
    encode_fitness(&fitness, initial_best)
}
