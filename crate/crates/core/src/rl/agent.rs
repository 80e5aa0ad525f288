//! Learning loops: DQN-style offline training, frozen greedy inference and
//! online Sarsa(0) control of the GA.

use std::collections::VecDeque;

use log::{debug, info};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::{Action, ACTION_COUNT};
use super::network::{QNetwork, Sample};
use super::policy::{epsilon_greedy, greedy, sample_softmax, PolicyMode};
use super::reward::total_reward;
use super::state::{encode_state, AgentState};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ga::{ga_step, init_population, population_entropy, Individual, Population, StepOutcome};
use crate::pfsp::{Instance, Time};

/// Learning-rate, discount, exploration and DQN settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Softmax temperature, used when `policy` is `softmax`.
    pub beta: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Gradient steps between target-network refreshes.
    pub target_sync_interval: usize,
    pub policy: PolicyMode,
    pub hidden_layers: Vec<usize>,
    /// Divide rewards by the episode's initial best makespan.
    pub normalize_reward: bool,
}

impl Default for RlParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.9,
            epsilon: 0.5,
            beta: 1.0,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync_interval: 100,
            policy: PolicyMode::EpsilonGreedy,
            hidden_layers: vec![32, 32],
            normalize_reward: true,
        }
    }
}

impl RlParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("invalid RL parameter: {what}")));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must be in [0, 1]");
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad("beta must be positive");
        }
        if self.replay_capacity == 0 || self.batch_size == 0 || self.target_sync_interval == 0 {
            return bad("replay capacity, batch size and sync interval must be positive");
        }
        if self.hidden_layers.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![2];
        dims.extend(&self.hidden_layers);
        dims.push(ACTION_COUNT);
        dims
    }

    /// Picks an action index among `q` according to the configured policy.
    pub fn choose<R: Rng + ?Sized>(&self, q: &[f64], rng: &mut R) -> usize {
        match self.policy {
            PolicyMode::EpsilonGreedy => epsilon_greedy(q, self.epsilon, rng),
            PolicyMode::Softmax => sample_softmax(q, self.beta, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: AgentState,
    pub action: usize,
    pub reward: f64,
    pub next_state: AgentState,
    /// Action actually taken in `next_state`; only the on-policy path records it.
    pub next_action: Option<usize>,
    pub terminal: bool,
}

/// Bounded FIFO experience store.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            items: VecDeque::with_capacity(capacity.min(4096)),
        }
    }

    pub fn push(&mut self, tr: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(tr);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Up to `batch` distinct transitions drawn uniformly.
    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Vec<&Transition> {
        let k = batch.min(self.items.len());
        rand::seq::index::sample(rng, self.items.len(), k)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }
}

/// Bootstrapped Q-learning target `r + gamma * max_a Q_target(s')`, or `r` when terminal.
pub fn q_target(tr: &Transition, gamma: f64, target_net: &QNetwork) -> Result<f64> {
    if tr.terminal {
        return Ok(tr.reward);
    }
    let q = target_net.forward(&tr.next_state.features())?;
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(tr.reward + gamma * max)
}

/// Semi-gradient Sarsa(0): one step toward `r + gamma * Q(s')[a']`. Returns the pre-step loss.
pub fn sarsa_update(net: &mut QNetwork, tr: &Transition, alpha: f64, gamma: f64) -> Result<f64> {
    let target = if tr.terminal {
        tr.reward
    } else {
        let next = tr
            .next_action
            .ok_or_else(|| Error::contract("non-terminal Sarsa transition lacks a next action"))?;
        tr.reward + gamma * net.forward(&tr.next_state.features())?[next]
    };
    let sample = Sample {
        input: tr.state.features().to_vec(),
        action: tr.action,
        target,
    };
    net.train_step(std::slice::from_ref(&sample), alpha)
}

/// One DQN update from a replay sample; the target network supplies the bootstrap.
pub fn dqn_update<R: Rng + ?Sized>(
    net: &mut QNetwork,
    target_net: &QNetwork,
    replay: &ReplayBuffer,
    params: &RlParams,
    rng: &mut R,
) -> Result<f64> {
    let batch = replay
        .sample(params.batch_size, rng)
        .into_iter()
        .map(|tr| {
            Ok(Sample {
                input: tr.state.features().to_vec(),
                action: tr.action,
                target: q_target(tr, params.gamma, target_net)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    net.train_step(&batch, params.alpha)
}

/// Per-generation trace of a controlled GA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub episode: usize,
    pub generation: usize,
    /// Best makespan of the population after this generation.
    pub best_fitness: Time,
    pub action: usize,
    /// Fitness entropy (bits) of the population after this generation.
    pub entropy: f64,
    pub reward: Option<f64>,
}

/// Training summary of one offline episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub instance: String,
    pub cumulative_reward: f64,
    pub mean_loss: f64,
    pub best_fitness: Time,
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub network: QNetwork,
    pub episodes: Vec<EpisodeLog>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Individual,
    pub history: Vec<GenerationRecord>,
}

#[derive(Debug, Clone)]
pub struct OnlineOutcome {
    pub best: Individual,
    pub network: QNetwork,
    pub history: Vec<GenerationRecord>,
}

/// Per-episode environment: a fresh population plus the reference used for normalisation.
struct Episode<'a> {
    instance: &'a Instance,
    pop: Population,
    initial_best: Time,
}

impl<'a> Episode<'a> {
    fn start<R: Rng + ?Sized>(instance: &'a Instance, population: usize, rng: &mut R) -> Result<Self> {
        let pop = init_population(instance, population, rng)?;
        let initial_best = pop.best().fitness();
        if initial_best == 0 {
            return Err(Error::contract(format!(
                "instance {} has zero makespan; nothing to optimise",
                instance.id
            )));
        }
        Ok(Self {
            instance,
            pop,
            initial_best,
        })
    }

    fn state(&self) -> Result<AgentState> {
        encode_state(&self.pop, self.initial_best)
    }

    fn step<R: Rng + ?Sized>(&mut self, action: usize, rng: &mut R) -> Result<StepOutcome> {
        let params = Action::from_index(action)?.params();
        let (next, outcome) = ga_step(self.instance, &self.pop, params, rng)?;
        self.pop = next;
        Ok(outcome)
    }

    fn reward(&self, outcome: &StepOutcome, normalize: bool) -> f64 {
        let raw = total_reward(outcome) as f64;
        if normalize {
            raw / self.initial_best as f64
        } else {
            raw
        }
    }

    fn record(&self, episode: usize, generation: usize, action: usize, reward: Option<f64>) -> Result<GenerationRecord> {
        Ok(GenerationRecord {
            episode,
            generation,
            best_fitness: self.pop.best().fitness(),
            action,
            entropy: population_entropy(&self.pop)?,
            reward,
        })
    }
}

fn keep_better(best: &mut Option<Individual>, candidate: &Individual) {
    if best.as_ref().is_none_or(|b| candidate.fitness() < b.fitness()) {
        *best = Some(candidate.clone());
    }
}

fn check_controller(net: &QNetwork) -> Result<()> {
    if net.input_dim() != 2 || net.output_dim() != ACTION_COUNT {
        return Err(Error::contract(format!(
            "controller network must map 2 features to {ACTION_COUNT} values, has dims {:?}",
            net.layer_dims()
        )));
    }
    Ok(())
}

/// Offline DQN training over `instances`, cycling through them one episode at a time.
pub fn train_offline<R: Rng + ?Sized>(
    instances: &[Instance],
    budget: Budget,
    params: &RlParams,
    rng: &mut R,
) -> Result<TrainingReport> {
    if instances.is_empty() {
        return Err(Error::contract("offline training needs at least one instance"));
    }
    budget.validate()?;
    params.validate()?;

    let mut net = QNetwork::new(&params.layer_dims(), rng)?;
    let mut target_net = net.clone();
    let mut replay = ReplayBuffer::new(params.replay_capacity);
    let mut steps = 0usize;
    let mut logs = Vec::with_capacity(budget.episodes);

    for episode in 0..budget.episodes {
        let instance = &instances[episode % instances.len()];
        let mut env = Episode::start(instance, budget.population, rng)?;
        let mut state = env.state()?;
        let mut cumulative = 0.0;
        let mut loss_sum = 0.0;

        for generation in 0..budget.iterations {
            let q = net.forward(&state.features())?;
            let action = params.choose(&q, rng);
            let outcome = env.step(action, rng)?;
            let reward = env.reward(&outcome, params.normalize_reward);
            let next_state = env.state()?;
            replay.push(Transition {
                state,
                action,
                reward,
                next_state,
                next_action: None,
                terminal: generation + 1 == budget.iterations,
            });
            loss_sum += dqn_update(&mut net, &target_net, &replay, params, rng)?;
            steps += 1;
            if steps.is_multiple_of(params.target_sync_interval) {
                target_net = net.clone();
            }
            cumulative += reward;
            state = next_state;
        }

        let log = EpisodeLog {
            episode,
            instance: instance.id.clone(),
            cumulative_reward: cumulative,
            mean_loss: loss_sum / budget.iterations as f64,
            best_fitness: env.pop.best().fitness(),
        };
        debug!(
            "episode {} on {}: reward {:.4}, loss {:.6}, best {}",
            log.episode, log.instance, log.cumulative_reward, log.mean_loss, log.best_fitness
        );
        logs.push(log);
    }
    info!("offline training finished after {steps} gradient steps");
    Ok(TrainingReport {
        network: net,
        episodes: logs,
    })
}

/// Greedy control with fixed weights: no exploration, no rewards, no learning.
pub fn run_frozen<R: Rng + ?Sized>(
    net: &QNetwork,
    instance: &Instance,
    budget: Budget,
    rng: &mut R,
) -> Result<RunOutcome> {
    check_controller(net)?;
    budget.validate()?;
    let mut best = None;
    let mut history = Vec::with_capacity(budget.total_generations());
    for episode in 0..budget.episodes {
        let mut env = Episode::start(instance, budget.population, rng)?;
        for generation in 0..budget.iterations {
            let action = greedy(&net.forward(&env.state()?.features())?);
            env.step(action, rng)?;
            history.push(env.record(episode, generation, action, None)?);
        }
        keep_better(&mut best, env.pop.best());
    }
    Ok(RunOutcome {
        best: best.expect("at least one episode"),
        history,
    })
}

/// Online Sarsa(0) control from a freshly initialised network. Weights carry over
/// between episodes; each episode restarts the population.
pub fn run_online<R: Rng + ?Sized>(
    instance: &Instance,
    budget: Budget,
    params: &RlParams,
    rng: &mut R,
) -> Result<OnlineOutcome> {
    params.validate()?;
    let net = QNetwork::new(&params.layer_dims(), rng)?;
    run_online_with(net, instance, budget, params, rng)
}

/// As [`run_online`], starting from the given network.
pub fn run_online_with<R: Rng + ?Sized>(
    mut net: QNetwork,
    instance: &Instance,
    budget: Budget,
    params: &RlParams,
    rng: &mut R,
) -> Result<OnlineOutcome> {
    check_controller(&net)?;
    budget.validate()?;
    params.validate()?;
    let mut best = None;
    let mut history = Vec::with_capacity(budget.total_generations());

    for episode in 0..budget.episodes {
        let mut env = Episode::start(instance, budget.population, rng)?;
        let mut state = env.state()?;
        let mut action = params.choose(&net.forward(&state.features())?, rng);
        for generation in 0..budget.iterations {
            let outcome = env.step(action, rng)?;
            let reward = env.reward(&outcome, params.normalize_reward);
            let next_state = env.state()?;
            let terminal = generation + 1 == budget.iterations;
            let next_action = if terminal {
                None
            } else {
                Some(params.choose(&net.forward(&next_state.features())?, rng))
            };
            let tr = Transition {
                state,
                action,
                reward,
                next_state,
                next_action,
                terminal,
            };
            sarsa_update(&mut net, &tr, params.alpha, params.gamma)?;
            history.push(env.record(episode, generation, action, Some(reward))?);
            state = next_state;
            if let Some(a) = next_action {
                action = a;
            }
        }
        keep_better(&mut best, env.pop.best());
    }
    Ok(OnlineOutcome {
        best: best.expect("at least one episode"),
        network: net,
        history,
    })
}
