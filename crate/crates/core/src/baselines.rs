//! Comparison methods: the fixed-parameter GA, NEH, and CDS built on Johnson's rule.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ga::{ga_step, init_population, GenerationParams, Individual, SelectionMethod};
use crate::pfsp::{Instance, Permutation, Time};

/// Operator settings of the reference GA.
pub const STANDARD_GA_PARAMS: GenerationParams = GenerationParams {
    method: SelectionMethod::Roulette,
    p_s: 0.5,
    p_mut: 0.5,
};

/// GA with fixed roulette selection at rate 0.5 and mutation rate 0.5.
pub fn standard_ga<R: Rng + ?Sized>(
    instance: &Instance,
    population: usize,
    iterations: usize,
    rng: &mut R,
) -> Result<Individual> {
    let mut pop = init_population(instance, population, rng)?;
    for _ in 0..iterations {
        pop = ga_step(instance, &pop, STANDARD_GA_PARAMS, rng)?.0;
    }
    Ok(pop.best().clone())
}

/// Nawaz-Enscore-Ham insertion heuristic.
///
/// Jobs are taken by decreasing total time (lower index first on ties) and each is
/// inserted where the partial makespan is smallest (earliest position on ties).
pub fn neh(instance: &Instance) -> Permutation {
    let order = decreasing_total_order(instance);
    let mut seq: Vec<usize> = Vec::with_capacity(order.len());
    for job in order {
        let mut best_pos = 0;
        let mut best_val = Time::MAX;
        for pos in 0..=seq.len() {
            seq.insert(pos, job);
            let value = instance.sequence_makespan(&seq);
            seq.remove(pos);
            if value < best_val {
                best_val = value;
                best_pos = pos;
            }
        }
        seq.insert(best_pos, job);
    }
    Permutation::from_vec_unchecked(seq)
}

/// Jobs sorted by decreasing total processing time, ties by index.
pub fn decreasing_total_order(instance: &Instance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..instance.n_jobs()).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(instance.job_total(j)));
    order
}

/// Johnson's rule for the two-machine flow shop, given `(a_j, b_j)` per job.
///
/// Jobs with `a_j <= b_j` go first by increasing `a_j`, the rest last by
/// decreasing `b_j`; equal keys keep job-index order.
pub fn johnson_rule(times: &[(Time, Time)]) -> Result<Permutation> {
    if times.is_empty() {
        return Err(Error::contract("johnson_rule needs at least one job"));
    }
    let (mut front, mut back): (Vec<usize>, Vec<usize>) = (0..times.len()).partition(|&j| times[j].0 <= times[j].1);
    front.sort_by_key(|&j| times[j].0);
    back.sort_by_key(|&j| std::cmp::Reverse(times[j].1));
    front.extend(back);
    Ok(Permutation::from_vec_unchecked(front))
}

/// Campbell-Dudek-Smith: best of the `m - 1` Johnson sequences of the aggregated
/// two-machine surrogates (first `k` machines vs last `k` machines).
pub fn cds(instance: &Instance) -> Result<Permutation> {
    let m = instance.n_machines();
    if m < 2 {
        return Err(Error::contract("CDS needs at least two machines"));
    }
    let mut best: Option<(Time, Permutation)> = None;
    for k in 1..m {
        let surrogate: Vec<(Time, Time)> = (0..instance.n_jobs())
            .map(|j| {
                let a = (0..k).map(|i| instance.time(i, j)).sum();
                let b = (m - k..m).map(|i| instance.time(i, j)).sum();
                (a, b)
            })
            .collect();
        let candidate = johnson_rule(&surrogate)?;
        let value = instance.sequence_makespan(candidate.as_slice());
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, candidate));
        }
    }
    Ok(best.expect("m >= 2 gives a candidate").1)
}
