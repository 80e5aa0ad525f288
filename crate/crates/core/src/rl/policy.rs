//! Action-selection policies over a slice of action values.

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    #[default]
    EpsilonGreedy,
    Softmax,
}

/// Index of the largest value; the lowest index wins ties.
pub fn greedy(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// Uniform action with probability `epsilon`, otherwise [`greedy`].
pub fn epsilon_greedy<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.len())
    } else {
        greedy(q)
    }
}

/// Boltzmann distribution `exp(beta q_a) / sum exp(beta q)`, stabilised by subtracting the max.
pub fn softmax(q: &[f64], beta: f64) -> Vec<f64> {
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = q.iter().map(|&v| (beta * (v - max)).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn sample_softmax<R: Rng + ?Sized>(q: &[f64], beta: f64, rng: &mut R) -> usize {
    let probs = softmax(q, beta);
    match WeightedIndex::new(&probs) {
        Ok(dist) => dist.sample(rng),
        Err(_) => greedy(q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softmax_examples() {
        let p = softmax(&[0.0; 27], 1.0);
        assert!(p.iter().all(|&x| (x - 1.0 / 27.0).abs() < 1e-12));
        let p = softmax(&[1.0, 0.0], 1.0);
        assert!((p[0] - 0.7311).abs() < 1e-4 && (p[1] - 0.2689).abs() < 1e-4);
        let p = softmax(&[0.5, 1.0, 0.2], 100.0);
        assert!((p[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn softmax_shift_invariant() {
        let q = [0.3, -1.2, 2.0, 0.0];
        let a = softmax(&q, 0.7);
        let shifted: Vec<f64> = q.iter().map(|v| v + 1e3).collect();
        let b = softmax(&shifted, 0.7);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_ties_pick_lowest() {
        assert_eq!(greedy(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(greedy(&[0.0; 27]), 0);
    }

    #[test]
    fn epsilon_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q: Vec<f64> = (0..27).map(|i| if i == 4 { 1.0 } else { 0.0 }).collect();
        assert!((0..1000).all(|_| epsilon_greedy(&q, 0.0, &mut rng) == 4));

        let draws = 10_000;
        let mut counts = [0usize; 27];
        for _ in 0..draws {
            counts[epsilon_greedy(&q, 1.0, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 1.0 / 27.0).abs() <= 0.01);
        }

        let hits = (0..draws).filter(|_| epsilon_greedy(&q, 0.5, &mut rng) == 4).count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - (0.5 + 0.5 / 27.0)).abs() <= 0.02, "{freq}");
    }
}
