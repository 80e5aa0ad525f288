//! Run budgets and the default settings of each benchmark size class.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Episodes x generations per episode, with population size `population`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub episodes: usize,
    pub iterations: usize,
    pub population: usize,
}

impl Budget {
    pub const fn new(episodes: usize, iterations: usize, population: usize) -> Self {
        Self {
            episodes,
            iterations,
            population,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.iterations == 0 {
            return Err(Error::Config(format!("budget must be positive: {self:?}")));
        }
        if self.population < 2 {
            return Err(Error::Config(format!("population must be at least 2: {self:?}")));
        }
        Ok(())
    }

    pub fn total_generations(&self) -> usize {
        self.episodes * self.iterations
    }
}

/// Taillard size classes used in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SizeClass {
    #[serde(rename = "20_5")]
    J20M5,
    #[serde(rename = "50_10")]
    J50M10,
    #[serde(rename = "100_10")]
    J100M10,
}

impl SizeClass {
    pub fn dims(self) -> (usize, usize) {
        match self {
            SizeClass::J20M5 => (20, 5),
            SizeClass::J50M10 => (50, 10),
            SizeClass::J100M10 => (100, 10),
        }
    }

    /// Offline training budget.
    pub fn training(self) -> Budget {
        match self {
            SizeClass::J20M5 => Budget::new(50, 100, 50),
            SizeClass::J50M10 => Budget::new(100, 200, 100),
            SizeClass::J100M10 => Budget::new(200, 300, 200),
        }
    }

    /// Test budget of the learning variants (frozen and online), CPU settings.
    pub fn agent_test(self) -> Budget {
        match self {
            SizeClass::J20M5 => Budget::new(3, 50, 30),
            SizeClass::J50M10 => Budget::new(5, 75, 100),
            SizeClass::J100M10 => Budget::new(8, 100, 120),
        }
    }

    /// Budget of the fixed-parameter GA (a single run).
    pub fn standard_ga(self) -> Budget {
        match self {
            SizeClass::J20M5 => Budget::new(1, 50, 30),
            SizeClass::J50M10 => Budget::new(1, 100, 100),
            SizeClass::J100M10 => Budget::new(1, 200, 200),
        }
    }

    pub fn matches(self, n_jobs: usize, n_machines: usize) -> bool {
        self.dims() == (n_jobs, n_machines)
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, m) = self.dims();
        write!(f, "{n}_{m}")
    }
}

impl FromStr for SizeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "20_5" => Ok(SizeClass::J20M5),
            "50_10" => Ok(SizeClass::J50M10),
            "100_10" => Ok(SizeClass::J100M10),
            other => Err(Error::Config(format!(
                "unknown size class {other:?} (expected 20_5, 50_10 or 100_10)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_roundtrip() {
        for c in [SizeClass::J20M5, SizeClass::J50M10, SizeClass::J100M10] {
            assert_eq!(c.to_string().parse::<SizeClass>().unwrap(), c);
        }
        assert!("10_5".parse::<SizeClass>().is_err());
    }

    #[test]
    fn budgets() {
        assert_eq!(SizeClass::J20M5.training(), Budget::new(50, 100, 50));
        assert_eq!(SizeClass::J20M5.agent_test().total_generations(), 150);
        assert!(Budget::new(1, 1, 1).validate().is_err());
    }
}
