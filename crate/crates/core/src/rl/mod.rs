//! Reinforcement-learning control of the GA's selection and mutation operators.

pub mod action;
pub mod agent;
pub mod network;
pub mod policy;
pub mod reward;
pub mod state;

pub use action::{Action, ACTION_COUNT, RATE_LEVELS};
pub use agent::{
    dqn_update, q_target, run_frozen, run_online, run_online_with, sarsa_update, train_offline, EpisodeLog,
    GenerationRecord, OnlineOutcome, ReplayBuffer, RlParams, RunOutcome, TrainingReport, Transition,
};
pub use network::{Gradients, QNetwork, Sample};
pub use policy::{epsilon_greedy, greedy, sample_softmax, softmax, PolicyMode};
pub use reward::{children_reward, selection_reward, total_reward};
pub use state::{encode_fitness, encode_state, AgentState};
