use std::fmt;

use crate::error::{Error, Result};
use crate::ga::{GenerationParams, SelectionMethod};

/// Size of the action space: 3 selection methods x 3 selection rates x 3 mutation rates.
pub const ACTION_COUNT: usize = 27;

/// Representative rate of each third of `[0, 1]`.
pub const RATE_LEVELS: [f64; 3] = [1.0 / 6.0, 0.5, 5.0 / 6.0];

/// Index `method * 9 + selection_level * 3 + mutation_level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(u8);

impl Action {
    pub fn from_index(index: usize) -> Result<Self> {
        if index >= ACTION_COUNT {
            return Err(Error::contract(format!("action index {index} outside 0..{ACTION_COUNT}")));
        }
        Ok(Self(index as u8))
    }

    pub fn from_levels(method: SelectionMethod, selection_level: usize, mutation_level: usize) -> Result<Self> {
        if selection_level > 2 || mutation_level > 2 {
            return Err(Error::contract("rate levels are 0, 1 or 2"));
        }
        let m = SelectionMethod::ALL.iter().position(|&s| s == method).expect("known method");
        Self::from_index(m * 9 + selection_level * 3 + mutation_level)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn method(self) -> SelectionMethod {
        SelectionMethod::ALL[self.index() / 9]
    }

    pub fn selection_level(self) -> usize {
        (self.index() / 3) % 3
    }

    pub fn mutation_level(self) -> usize {
        self.index() % 3
    }

    pub fn p_s(self) -> f64 {
        RATE_LEVELS[self.selection_level()]
    }

    pub fn p_mut(self) -> f64 {
        RATE_LEVELS[self.mutation_level()]
    }

    pub fn params(self) -> GenerationParams {
        GenerationParams {
            method: self.method(),
            p_s: self.p_s(),
            p_mut: self.p_mut(),
        }
    }

    pub fn all() -> impl Iterator<Item = Action> {
        (0..ACTION_COUNT as u8).map(Action)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#{} ({:?}, p_s={:.3}, p_mut={:.3})",
            self.0,
            self.method(),
            self.p_s(),
            self.p_mut()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_examples() {
        let a = Action::from_index(0).unwrap();
        assert_eq!((a.method(), a.p_s(), a.p_mut()), (SelectionMethod::Elitism, 1.0 / 6.0, 1.0 / 6.0));
        let a = Action::from_index(13).unwrap();
        assert_eq!((a.method(), a.p_s(), a.p_mut()), (SelectionMethod::Roulette, 0.5, 0.5));
        let a = Action::from_index(26).unwrap();
        assert_eq!((a.method(), a.p_s(), a.p_mut()), (SelectionMethod::Rank, 5.0 / 6.0, 5.0 / 6.0));
        assert!(Action::from_index(27).is_err());
    }

    #[test]
    fn codec_is_bijective() {
        for a in Action::all() {
            let back = Action::from_levels(a.method(), a.selection_level(), a.mutation_level()).unwrap();
            assert_eq!(back, a);
        }
        let distinct: std::collections::HashSet<_> = Action::all()
            .map(|a| (a.method(), a.p_s().to_bits(), a.p_mut().to_bits()))
            .collect();
        assert_eq!(distinct.len(), ACTION_COUNT);
    }
}
