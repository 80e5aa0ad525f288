//! Genetic algorithm substrate: population lifecycle, parent selection,
//! two-point crossover (version I), shift mutation and elitist replacement.

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pfsp::{random_permutation, Instance, Permutation, Time};

/// A job sequence together with its makespan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    perm: Permutation,
    fitness: Time,
}

impl Individual {
    pub fn evaluate(instance: &Instance, perm: Permutation) -> Result<Self> {
        let fitness = crate::pfsp::makespan(instance, &perm)?;
        Ok(Self { perm, fitness })
    }

    /// Skips validation; `perm` must come from a closed operator.
    pub(crate) fn evaluate_trusted(instance: &Instance, perm: Permutation) -> Self {
        let fitness = instance.sequence_makespan(perm.as_slice());
        Self { perm, fitness }
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn fitness(&self) -> Time {
        self.fitness
    }

    pub fn into_perm(self) -> Permutation {
        self.perm
    }
}

/// A generation of individuals, kept sorted by ascending makespan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    members: Vec<Individual>,
    generation: usize,
}

impl Population {
    /// Sorts `members` (stable, so equal makespans keep their given order).
    pub fn from_members(mut members: Vec<Individual>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::contract(format!(
                "population needs at least 2 members, got {}",
                members.len()
            )));
        }
        members.sort_by_key(Individual::fitness);
        Ok(Self {
            members,
            generation: 0,
        })
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn best(&self) -> &Individual {
        &self.members[0]
    }

    pub fn worst(&self) -> &Individual {
        &self.members[self.members.len() - 1]
    }

    pub fn fitness(&self) -> impl Iterator<Item = Time> + '_ {
        self.members.iter().map(Individual::fitness)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Elitism,
    Roulette,
    Rank,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 3] = [
        SelectionMethod::Elitism,
        SelectionMethod::Roulette,
        SelectionMethod::Rank,
    ];
}

/// Operator settings for one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub method: SelectionMethod,
    /// Fraction of the population entering reproduction.
    pub p_s: f64,
    /// Per-child probability of a shift mutation.
    pub p_mut: f64,
}

impl GenerationParams {
    pub fn new(method: SelectionMethod, p_s: f64, p_mut: f64) -> Result<Self> {
        if !(p_s > 0.0 && p_s <= 1.0) {
            return Err(Error::contract(format!("selection rate {p_s} not in (0, 1]")));
        }
        if !(0.0..=1.0).contains(&p_mut) {
            return Err(Error::contract(format!("mutation rate {p_mut} not in [0, 1]")));
        }
        Ok(Self { method, p_s, p_mut })
    }
}

pub fn init_population<R: Rng + ?Sized>(instance: &Instance, size: usize, rng: &mut R) -> Result<Population> {
    if size < 2 {
        return Err(Error::contract(format!("population size {size} < 2")));
    }
    let members = (0..size)
        .map(|_| {
            random_permutation(instance.n_jobs(), rng)
                .map(|p| Individual::evaluate_trusted(instance, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Population::from_members(members)
}

// ceil() that tolerates representation error in products like (1/6) * 30.
fn ceil_tolerant(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Number of parent pairs drawn for a population of `m` at selection rate `p_s`.
pub fn pair_count(m: usize, p_s: f64) -> usize {
    ceil_tolerant(p_s * m as f64 / 2.0).max(1)
}

/// Draws parent pairs as indices into `pop.members()`.
///
/// `K = ceil(p_s * M / 2)` pairs are returned. The two parents of a pair are
/// distinct members whenever `M >= 2` allows it.
pub fn select_parents<R: Rng + ?Sized>(
    pop: &Population,
    method: SelectionMethod,
    p_s: f64,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    let m = pop.len();
    if m < 2 {
        return Err(Error::contract("selection needs at least 2 members"));
    }
    if !(p_s > 0.0 && p_s <= 1.0) {
        return Err(Error::contract(format!("selection rate {p_s} not in (0, 1]")));
    }
    let k = pair_count(m, p_s);
    let pairs = match method {
        SelectionMethod::Elitism => {
            let pool_size = ceil_tolerant(p_s * m as f64).clamp(2, m);
            let mut deck: Vec<usize> = Vec::with_capacity(pool_size);
            (0..k)
                .map(|_| {
                    if deck.len() < 2 {
                        deck.clear();
                        deck.extend(0..pool_size);
                        deck.shuffle(rng);
                    }
                    let a = deck.pop().expect("deck refilled");
                    let b = deck.pop().expect("deck refilled");
                    (a, b)
                })
                .collect()
        }
        SelectionMethod::Roulette => {
            let worst = pop.worst().fitness();
            let weights = pop.fitness().map(|f| (worst - f + 1) as f64);
            let dist = WeightedIndex::new(weights).expect("weights are positive");
            draw_pairs(k, m, &dist, rng)
        }
        SelectionMethod::Rank => {
            // Linear ranking: member at sorted index i has weight M - i.
            let dist = WeightedIndex::new((0..m).map(|i| (m - i) as u64)).expect("weights are positive");
            draw_pairs(k, m, &dist, rng)
        }
    };
    Ok(pairs)
}

fn draw_pairs<D, R>(k: usize, m: usize, dist: &D, rng: &mut R) -> Vec<(usize, usize)>
where
    D: Distribution<usize>,
    R: Rng + ?Sized,
{
    (0..k)
        .map(|_| {
            let a = dist.sample(rng);
            let mut b = dist.sample(rng);
            for _ in 0..m {
                if b != a {
                    break;
                }
                b = dist.sample(rng);
            }
            (a, b)
        })
        .collect()
}

fn check_pair(p1: &Permutation, p2: &Permutation) -> Result<()> {
    if p1.len() != p2.len() {
        return Err(Error::contract(format!(
            "crossover parents differ in length ({} vs {})",
            p1.len(),
            p2.len()
        )));
    }
    Ok(())
}

/// Two-point crossover version I with explicit cut points `c1 < c2`.
///
/// Each child keeps its first parent outside `[c1, c2)` and receives the
/// missing jobs inside the segment in the order they appear in the other parent.
pub fn crossover_with_cuts(
    p1: &Permutation,
    p2: &Permutation,
    c1: usize,
    c2: usize,
) -> Result<(Permutation, Permutation)> {
    check_pair(p1, p2)?;
    let n = p1.len();
    if !(c1 < c2 && c2 <= n) {
        return Err(Error::contract(format!("bad cut points {c1}, {c2} for length {n}")));
    }
    let child = |keep: &[usize], order: &[usize]| {
        let mut outside = vec![false; n];
        for (pos, &job) in keep.iter().enumerate() {
            if pos < c1 || pos >= c2 {
                outside[job] = true;
            }
        }
        let mut fill = order.iter().copied().filter(|&job| !outside[job]);
        let seq: Vec<usize> = (0..n)
            .map(|pos| {
                if pos < c1 || pos >= c2 {
                    keep[pos]
                } else {
                    fill.next().expect("segment length equals missing job count")
                }
            })
            .collect();
        Permutation::from_vec_unchecked(seq)
    };
    Ok((
        child(p1.as_slice(), p2.as_slice()),
        child(p2.as_slice(), p1.as_slice()),
    ))
}

/// Two-point crossover version I with cut points drawn uniformly over `0 <= c1 < c2 <= n`.
pub fn crossover_two_point_v1<R: Rng + ?Sized>(
    p1: &Permutation,
    p2: &Permutation,
    rng: &mut R,
) -> Result<(Permutation, Permutation)> {
    check_pair(p1, p2)?;
    let n = p1.len();
    if n < 2 {
        return Err(Error::contract("crossover needs permutations of length >= 2"));
    }
    let cuts = rand::seq::index::sample(rng, n + 1, 2);
    let (a, b) = (cuts.index(0), cuts.index(1));
    crossover_with_cuts(p1, p2, a.min(b), a.max(b))
}

/// Removes the job at `from` and reinserts it so that it ends up at position `to`.
pub fn shift_with(perm: &Permutation, from: usize, to: usize) -> Result<Permutation> {
    let n = perm.len();
    if from >= n || to >= n {
        return Err(Error::contract(format!("shift {from} -> {to} out of range for length {n}")));
    }
    let mut seq = perm.as_slice().to_vec();
    let job = seq.remove(from);
    seq.insert(to, job);
    Ok(Permutation::from_vec_unchecked(seq))
}

/// Random insertion move; permutations shorter than 2 come back unchanged.
pub fn shift_mutation<R: Rng + ?Sized>(perm: &Permutation, rng: &mut R) -> Permutation {
    let n = perm.len();
    if n < 2 {
        return perm.clone();
    }
    let from = rng.gen_range(0..n);
    let mut to = rng.gen_range(0..n - 1);
    if to >= from {
        to += 1;
    }
    shift_with(perm, from, to).expect("indices in range")
}

/// Merge-and-truncate replacement: the best `M` of incumbents plus offspring survive.
/// Incumbents win ties against offspring.
pub fn update_population(pop: &Population, offspring: Vec<Individual>) -> Population {
    let m = pop.len();
    let mut merged = Vec::with_capacity(m + offspring.len());
    merged.extend(pop.members.iter().cloned());
    merged.extend(offspring);
    merged.sort_by_key(Individual::fitness);
    merged.truncate(m);
    Population {
        members: merged,
        generation: pop.generation + 1,
    }
}

pub fn average_fitness(pop: &Population) -> f64 {
    pop.fitness().map(|f| f as f64).sum::<f64>() / pop.len() as f64
}

/// Shannon entropy (bits) of the fitness-proportion distribution `f_m / sum f`.
pub fn fitness_entropy(fitness: &[Time]) -> Result<f64> {
    if let Some(bad) = fitness.iter().find(|&&f| f == 0) {
        return Err(Error::contract(format!("entropy needs positive fitness, found {bad}")));
    }
    let total: f64 = fitness.iter().map(|&f| f as f64).sum();
    Ok(fitness
        .iter()
        .map(|&f| {
            let p = f as f64 / total;
            p * (1.0 / p).log2()
        })
        .sum())
}

pub fn population_entropy(pop: &Population) -> Result<f64> {
    let fitness: Vec<Time> = pop.fitness().collect();
    fitness_entropy(&fitness)
}

/// Fitness of one parent pair and the two children it produced (after mutation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairOutcome {
    pub parents: (Time, Time),
    pub children: (Time, Time),
}

/// What happened during one generation, as needed by the reward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub old_best: Time,
    pub new_best: Time,
    pub pairs: Vec<PairOutcome>,
}

/// One generation: selection, crossover of every pair, mutation, evaluation, replacement.
pub fn ga_step<R: Rng + ?Sized>(
    instance: &Instance,
    pop: &Population,
    params: GenerationParams,
    rng: &mut R,
) -> Result<(Population, StepOutcome)> {
    let pairs = select_parents(pop, params.method, params.p_s, rng)?;
    let mut offspring = Vec::with_capacity(2 * pairs.len());
    let mut outcomes = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let (pa, pb) = (&pop.members[a], &pop.members[b]);
        let (c1, c2) = if instance.n_jobs() >= 2 {
            crossover_two_point_v1(&pa.perm, &pb.perm, rng)?
        } else {
            (pa.perm.clone(), pb.perm.clone())
        };
        let mut mutate = |child: Permutation| {
            if rng.gen::<f64>() < params.p_mut {
                shift_mutation(&child, rng)
            } else {
                child
            }
        };
        let c1 = Individual::evaluate_trusted(instance, mutate(c1));
        let c2 = Individual::evaluate_trusted(instance, mutate(c2));
        outcomes.push(PairOutcome {
            parents: (pa.fitness, pb.fitness),
            children: (c1.fitness, c2.fitness),
        });
        offspring.push(c1);
        offspring.push(c2);
    }
    let next = update_population(pop, offspring);
    let outcome = StepOutcome {
        old_best: pop.best().fitness,
        new_best: next.best().fitness,
        pairs: outcomes,
    };
    Ok((next, outcome))
}
