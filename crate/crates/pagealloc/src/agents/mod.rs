//! The learners and fixed policies behind a common action interface.
//!
//! Four behaviours share the [`Policy`] type: the frozen x-fit heuristics,
//! linear Q-learning over hand-crafted page features, DQN over the raw
//! observation, and a PPO actor-critic for low-level placement. Training
//! entry points live in the per-agent submodules and all return the final
//! policy plus a per-episode log.

mod dqn;
mod linear;
mod ppo;
mod replay;
mod rollout;

pub use dqn::dqn_train;
pub use linear::{linear_features, linear_q_train, linear_q_update, LINEAR_INPUTS};
pub use ppo::{clipped_surrogate, ppo_train};
pub use replay::{ReplayBuffer, Transition};
pub use rollout::{normalize, Boundary, RolloutBuffer};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::{ActionMode, Env, Observation};
use crate::fit::{self, FitKind};
use crate::nn::DenseNet;
use crate::page::PageState;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgentError {
    #[error("observation shape {got} does not match the policy input {want}")]
    ShapeMismatch { got: usize, want: usize },
    #[error("{agent} requires {mode} actions")]
    WrongActionMode {
        agent: &'static str,
        mode: &'static str,
    },
    #[error("next_fit is not part of the policy set")]
    NextFitPolicy,
    #[error("no feasible placement for the current request")]
    NoFeasiblePlacement,
    #[error("invalid training config: {0}")]
    Config(String),
}

/// Which trainable agent to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    LinearQ,
    Dqn,
    Ppo,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::LinearQ => "linear_q",
            AgentKind::Dqn => "dqn",
            AgentKind::Ppo => "ppo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear_q" => Some(AgentKind::LinearQ),
            "dqn" => Some(AgentKind::Dqn),
            "ppo" => Some(AgentKind::Ppo),
            _ => None,
        }
    }
}

/// What drives action selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    /// Always answer with one fit heuristic.
    FixedFit(FitKind),
    /// Linear action values over the 10 hand-crafted inputs; one weight row
    /// per action.
    LinearQ { weights: Vec<Vec<f64>> },
    /// Q-network plus its frozen target copy.
    Dqn { net: DenseNet, target: DenseNet },
    /// Separate actor and critic networks.
    Ppo { actor: DenseNet, critic: DenseNet },
}

/// A policy: behaviour, action mode, and the exploration rate used when
/// `act` is called with `explore = true`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub behavior: Behavior,
    pub action_mode: ActionMode,
    /// Probability of a uniform random action for the epsilon-greedy
    /// behaviours. Trainers update this along their schedule.
    pub epsilon: f64,
}

/// Everything a policy may look at when choosing an action.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    pub obs: &'a Observation,
    pub page: &'a PageState,
}

impl<'a> AgentView<'a> {
    pub fn new(obs: &'a Observation, page: &'a PageState) -> Self {
        Self { obs, page }
    }
}

impl Policy {
    pub fn fixed_fit(kind: FitKind, action_mode: ActionMode) -> Result<Self, AgentError> {
        if kind == FitKind::Next {
            return Err(AgentError::NextFitPolicy);
        }
        Ok(Self {
            behavior: Behavior::FixedFit(kind),
            action_mode,
            epsilon: 0.0,
        })
    }

    pub fn name(&self) -> String {
        match &self.behavior {
            Behavior::FixedFit(kind) => kind.name().to_string(),
            Behavior::LinearQ { .. } => "linear_q".to_string(),
            Behavior::Dqn { .. } => "dqn".to_string(),
            Behavior::Ppo { .. } => "ppo".to_string(),
        }
    }

    /// Number of actions the policy emits.
    pub fn action_count(&self, page_size: usize) -> usize {
        match self.action_mode {
            ActionMode::HighLevel => 3,
            ActionMode::LowLevel => page_size,
        }
    }

    /// Choose an action. With `explore` the epsilon-greedy behaviours take a
    /// uniform random action with probability `self.epsilon` and PPO samples
    /// from its softmax; without it the choice is deterministic, argmax ties
    /// breaking toward the lowest action index.
    pub fn act(
        &self,
        view: AgentView<'_>,
        explore: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<usize, AgentError> {
        let n_actions = self.action_count(view.page.page_size());
        match &self.behavior {
            Behavior::FixedFit(kind) => match self.action_mode {
                ActionMode::HighLevel => Ok(match kind {
                    FitKind::First => 0,
                    FitKind::Best => 1,
                    FitKind::Worst => 2,
                    FitKind::Next => unreachable!("rejected at construction"),
                }),
                ActionMode::LowLevel => fit::place(*kind, view.page, view.obs.request_size)
                    .ok_or(AgentError::NoFeasiblePlacement),
            },
            Behavior::LinearQ { weights } => {
                if explore && rng.random::<f64>() < self.epsilon {
                    return Ok(rng.random_range(0..n_actions));
                }
                let phi = linear::linear_features(view.page, view.obs.request_size);
                if weights.len() != n_actions || weights.iter().any(|w| w.len() != phi.len()) {
                    return Err(AgentError::ShapeMismatch {
                        got: weights.first().map_or(0, |w| w.len()),
                        want: phi.len(),
                    });
                }
                let q: Vec<f64> = weights
                    .iter()
                    .map(|w| w.iter().zip(&phi).map(|(a, b)| a * b).sum())
                    .collect();
                Ok(argmax(&q))
            }
            Behavior::Dqn { net, .. } => {
                if explore && rng.random::<f64>() < self.epsilon {
                    return Ok(rng.random_range(0..n_actions));
                }
                let input = view.obs.to_scaled_vec();
                let q = net.predict(&input).map_err(|_| AgentError::ShapeMismatch {
                    got: input.len(),
                    want: net.input_dim(),
                })?;
                Ok(argmax(&q))
            }
            Behavior::Ppo { actor, .. } => {
                let input = view.obs.to_scaled_vec();
                let logits = actor
                    .predict(&input)
                    .map_err(|_| AgentError::ShapeMismatch {
                        got: input.len(),
                        want: actor.input_dim(),
                    })?;
                if explore {
                    Ok(sample_categorical(&log_softmax(&logits), rng))
                } else {
                    Ok(argmax(&logits))
                }
            }
        }
    }
}

/// Index of the largest value; ties break toward the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable log-softmax.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&l| l - max - log_sum).collect()
}

/// Sample an index from log-probabilities.
pub fn sample_categorical(log_probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &lp) in log_probs.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            return i;
        }
    }
    log_probs.len() - 1
}

/// Hyperparameters shared by the trainers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub total_timesteps: usize,
    /// Step size for DQN and linear Q-learning updates.
    pub learning_rate: f64,
    /// Training discount; evaluation returns stay undiscounted.
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the run over which epsilon anneals linearly.
    pub epsilon_fraction: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub target_sync_interval: usize,
    pub train_freq: usize,
    /// Random-action steps before DQN learning starts.
    pub warmup_steps: usize,
    pub ppo_horizon: usize,
    pub ppo_epochs: usize,
    pub ppo_clip: f64,
    pub gae_lambda: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub ppo_batch_size: usize,
    pub ppo_learning_rate: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(total_timesteps: usize) -> Self {
        Self {
            total_timesteps,
            learning_rate: 1e-4,
            discount: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_fraction: 0.1,
            batch_size: 32,
            buffer_capacity: 50_000,
            target_sync_interval: 1000,
            train_freq: 4,
            warmup_steps: 1000,
            ppo_horizon: 2048,
            ppo_epochs: 10,
            ppo_clip: 0.2,
            gae_lambda: 0.95,
            value_coef: 0.5,
            entropy_coef: 0.0,
            ppo_batch_size: 64,
            ppo_learning_rate: 5e-4,
            seed: 0,
        }
    }

    /// Defaults adjusted per agent family: linear Q-learning takes a larger
    /// step size than the network default.
    pub fn for_agent(kind: AgentKind, total_timesteps: usize) -> Self {
        let mut cfg = Self::new(total_timesteps);
        if kind == AgentKind::LinearQ {
            cfg.learning_rate = 0.01;
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.total_timesteps == 0 {
            return Err("train.total_timesteps must be positive".into());
        }
        if self.learning_rate <= 0.0 || self.ppo_learning_rate <= 0.0 {
            return Err("train.learning_rate must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err("train.discount must lie in [0, 1]".into());
        }
        if self.epsilon_end > self.epsilon_start {
            return Err("train.epsilon_end must not exceed train.epsilon_start".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return Err("train.epsilon_start/end must lie in [0, 1]".into());
        }
        if self.batch_size == 0 || self.ppo_batch_size == 0 {
            return Err("train batch sizes must be positive".into());
        }
        if self.buffer_capacity < self.batch_size {
            return Err("train.buffer_capacity must hold at least one batch".into());
        }
        if self.target_sync_interval == 0 || self.train_freq == 0 {
            return Err("train.target_sync_interval and train.train_freq must be positive".into());
        }
        if self.ppo_horizon == 0 || self.ppo_epochs == 0 {
            return Err("train.ppo_horizon and train.ppo_epochs must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err("train.gae_lambda must lie in [0, 1]".into());
        }
        if self.ppo_clip <= 0.0 {
            return Err("train.ppo_clip must be positive".into());
        }
        Ok(())
    }

    /// Linear epsilon schedule over the first `epsilon_fraction` of steps.
    pub fn epsilon_at(&self, step: usize) -> f64 {
        let anneal = (self.total_timesteps as f64 * self.epsilon_fraction).max(1.0);
        let progress = (step as f64 / anneal).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * progress
    }
}

/// One per-episode line of a training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    pub steps: usize,
    pub ret: f64,
}

/// Per-episode training history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub episodes: Vec<EpisodeLog>,
}

impl TrainLog {
    pub fn push(&mut self, steps: usize, ret: f64) {
        self.episodes.push(EpisodeLog {
            episode: self.episodes.len(),
            steps,
            ret,
        });
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("episode,steps,return\n");
        for e in &self.episodes {
            out.push_str(&format!("{},{},{}\n", e.episode, e.steps, e.ret));
        }
        out
    }
}

/// Shared helper: track per-episode returns while a trainer drives the env.
pub(crate) struct EpisodeTracker {
    pub log: TrainLog,
    steps: usize,
    ret: f64,
}

impl EpisodeTracker {
    pub fn new() -> Self {
        Self {
            log: TrainLog::default(),
            steps: 0,
            ret: 0.0,
        }
    }

    pub fn record(&mut self, reward: f64) {
        self.steps += 1;
        self.ret += reward;
    }

    pub fn finish_episode(&mut self) {
        self.log.push(self.steps, self.ret);
        self.steps = 0;
        self.ret = 0.0;
    }
}

/// Drive one full greedy episode; used by trainers for smoke checks.
pub fn greedy_episode(policy: &Policy, env: &mut Env, seed: u64, rng: &mut ChaCha8Rng) -> f64 {
    let mut obs = env.reset(seed);
    let mut total = 0.0;
    loop {
        let view = AgentView::new(&obs, env.page());
        let action = match policy.act(view, false, rng) {
            Ok(a) => a,
            Err(_) => return total,
        };
        match env.step(action) {
            Ok(result) => {
                total += result.reward;
                let finished = result.done();
                obs = result.observation;
                if finished {
                    return total;
                }
            }
            Err(_) => return total,
        }
    }
}
