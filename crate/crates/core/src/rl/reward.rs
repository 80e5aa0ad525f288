//! Rewards, oriented so that a shorter makespan earns a positive value.

use crate::ga::StepOutcome;
use crate::pfsp::Time;

/// Parents' makespan sum minus children's makespan sum.
pub fn children_reward(parents: (Time, Time), children: (Time, Time)) -> i64 {
    (parents.0 + parents.1) as i64 - (children.0 + children.1) as i64
}

/// Drop in the population's best makespan over one generation.
pub fn selection_reward(old_best: Time, new_best: Time) -> i64 {
    old_best as i64 - new_best as i64
}

pub fn total_reward(outcome: &StepOutcome) -> i64 {
    outcome
        .pairs
        .iter()
        .map(|p| children_reward(p.parents, p.children))
        .sum::<i64>()
        + selection_reward(outcome.old_best, outcome.new_best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::PairOutcome;

    #[test]
    fn children_examples() {
        assert_eq!(children_reward((100, 110), (95, 105)), 10);
        assert_eq!(children_reward((100, 110), (100, 110)), 0);
        assert_eq!(children_reward((100, 100), (120, 130)), -50);
    }

    #[test]
    fn selection_examples() {
        assert_eq!(selection_reward(1338, 1255), 83);
        assert_eq!(selection_reward(70, 70), 0);
        assert_eq!(selection_reward(100, 98), 2);
    }

    #[test]
    fn total_examples() {
        let empty = StepOutcome {
            old_best: 50,
            new_best: 50,
            pairs: vec![],
        };
        assert_eq!(total_reward(&empty), 0);

        let mixed = StepOutcome {
            old_best: 100,
            new_best: 97,
            pairs: vec![
                PairOutcome { parents: (100, 110), children: (95, 105) },
                PairOutcome { parents: (100, 100), children: (102, 102) },
            ],
        };
        assert_eq!(total_reward(&mixed), 9);

        let worse = StepOutcome {
            old_best: 100,
            new_best: 100,
            pairs: vec![PairOutcome { parents: (100, 100), children: (101, 140) }],
        };
        assert!(total_reward(&worse) < 0);
    }
}
