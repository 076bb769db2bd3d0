//! Evaluation protocol: fixed-seed rollout batteries, mean returns with 95%
//! confidence intervals, and multi-session baseline comparisons.
//!
//! Episode `i` of a battery always reseeds from `(seed, i)`, so every policy
//! in a comparison faces identical workload draws.

use thiserror::Error;

use crate::agents::{
    dqn_train, linear_q_train, ppo_train, AgentKind, AgentView, Policy, TrainConfig, TrainLog,
};
use crate::env::{Env, EnvConfig};
use crate::fit::FitKind;
use crate::seeding::{self, STREAM_EVAL, STREAM_SESSION};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("a confidence interval needs at least 2 rollouts")]
    InsufficientData,
    #[error("environment error: {0}")]
    Env(String),
    #[error("agent error: {0}")]
    Agent(String),
}

/// Per-episode evaluation facts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub ret: f64,
    pub steps: usize,
    pub valid_steps: usize,
    pub invalid_steps: usize,
}

/// Aggregated evaluation of one policy in one session.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub policy: String,
    pub session: usize,
    pub n_rollouts: usize,
    pub episodes: Vec<EpisodeStats>,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// False when fewer than 2 rollouts made the interval degenerate.
    pub ci_defined: bool,
    pub mean_episode_len: f64,
    pub invalid_rate: f64,
}

impl EvalReport {
    pub fn returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.ret).collect()
    }

    fn from_episodes(policy: String, session: usize, episodes: Vec<EpisodeStats>) -> Self {
        let n = episodes.len();
        let returns: Vec<f64> = episodes.iter().map(|e| e.ret).collect();
        let (mean, ci_low, ci_high, ci_defined) = match ci95(&returns) {
            Ok((m, lo, hi)) => (m, lo, hi, true),
            Err(_) => {
                let m = if returns.is_empty() { 0.0 } else { returns[0] };
                (m, m, m, false)
            }
        };
        let total_steps: usize = episodes.iter().map(|e| e.steps).sum();
        let invalid_steps: usize = episodes.iter().map(|e| e.invalid_steps).sum();
        let mean_episode_len = if n == 0 {
            0.0
        } else {
            total_steps as f64 / n as f64
        };
        let invalid_rate = if total_steps == 0 {
            0.0
        } else {
            invalid_steps as f64 / total_steps as f64
        };
        Self {
            policy,
            session,
            n_rollouts: n,
            episodes,
            mean,
            ci_low,
            ci_high,
            ci_defined,
            mean_episode_len,
            invalid_rate,
        }
    }
}

/// Mean and normal-approximation 95% interval: `mean ± 1.96 s / sqrt(n)`
/// with the sample standard deviation.
pub fn ci95(returns: &[f64]) -> Result<(f64, f64, f64), EvalError> {
    if returns.len() < 2 {
        return Err(EvalError::InsufficientData);
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    let half = 1.96 * var.sqrt() / n.sqrt();
    Ok((mean, mean - half, mean + half))
}

/// Run one greedy episode and collect its stats.
fn run_episode(
    policy: &Policy,
    env: &mut Env,
    episode_seed: u64,
) -> Result<EpisodeStats, EvalError> {
    let mut rng = seeding::rng(episode_seed, STREAM_EVAL);
    let mut obs = env.reset(episode_seed);
    let mut stats = EpisodeStats {
        ret: 0.0,
        steps: 0,
        valid_steps: 0,
        invalid_steps: 0,
    };
    loop {
        let action = policy
            .act(AgentView::new(&obs, env.page()), false, &mut rng)
            .map_err(|e| EvalError::Agent(e.to_string()))?;
        let result = env
            .step(action)
            .map_err(|e| EvalError::Env(e.to_string()))?;
        stats.ret += result.reward;
        stats.steps += 1;
        if result.info.action_valid {
            stats.valid_steps += 1;
        } else {
            stats.invalid_steps += 1;
        }
        let finished = result.done();
        obs = result.observation;
        if finished {
            return Ok(stats);
        }
    }
}

/// Evaluate `n` greedy episodes. Episode `i` reseeds deterministically from
/// `(seed, i)`.
pub fn rollout_battery(
    policy: &Policy,
    env_cfg: &EnvConfig,
    n: usize,
    seed: u64,
) -> Result<Vec<EpisodeStats>, EvalError> {
    let mut env = Env::new(env_cfg.clone()).map_err(|e| EvalError::Env(e.to_string()))?;
    let battery_seed = seeding::derive(seed, STREAM_EVAL);
    (0..n)
        .map(|i| run_episode(policy, &mut env, seeding::derive(battery_seed, i as u64)))
        .collect()
}

/// An entry in a comparison table.
pub enum ComparePolicy {
    /// Evaluated once; deterministic given the battery seed.
    Fixed(FitKind),
    /// Re-trained per session with seeds derived from `(seed, session)`.
    Train {
        name: String,
        agent: AgentKind,
        train: TrainConfig,
    },
    /// A pre-trained policy standing in for one session.
    Frozen {
        name: String,
        session: usize,
        policy: Policy,
    },
}

/// Train a policy of the given kind on a fresh environment.
pub fn train_agent(
    agent: AgentKind,
    env_cfg: &EnvConfig,
    train: &TrainConfig,
) -> Result<(Policy, TrainLog), EvalError> {
    let mut env = Env::new(env_cfg.clone()).map_err(|e| EvalError::Env(e.to_string()))?;
    let trained = match agent {
        AgentKind::LinearQ => linear_q_train(&mut env, train),
        AgentKind::Dqn => dqn_train(&mut env, train),
        AgentKind::Ppo => ppo_train(&mut env, train),
    };
    trained.map_err(|e| EvalError::Agent(e.to_string()))
}

/// Build the comparison table. Trainable entries are trained `sessions`
/// times with distinct derived seeds; fixed and frozen entries are evaluated
/// once. Every battery shares the same episode seeds.
pub fn compare(
    entries: &[ComparePolicy],
    env_cfg: &EnvConfig,
    sessions: usize,
    rollouts: usize,
    seed: u64,
) -> Result<Vec<EvalReport>, EvalError> {
    let mut reports = Vec::new();
    for entry in entries {
        match entry {
            ComparePolicy::Fixed(kind) => {
                let policy = Policy::fixed_fit(*kind, env_cfg.action_mode)
                    .map_err(|e| EvalError::Agent(e.to_string()))?;
                let episodes = rollout_battery(&policy, env_cfg, rollouts, seed)?;
                reports.push(EvalReport::from_episodes(kind.name().into(), 0, episodes));
            }
            ComparePolicy::Frozen {
                name,
                session,
                policy,
            } => {
                let episodes = rollout_battery(policy, env_cfg, rollouts, seed)?;
                reports.push(EvalReport::from_episodes(name.clone(), *session, episodes));
            }
            ComparePolicy::Train { name, agent, train } => {
                for session in 0..sessions {
                    let mut cfg = train.clone();
                    cfg.seed =
                        seeding::derive(seeding::derive(seed, STREAM_SESSION), session as u64);
                    let (policy, _) = train_agent(*agent, env_cfg, &cfg)?;
                    let episodes = rollout_battery(&policy, env_cfg, rollouts, seed)?;
                    reports.push(EvalReport::from_episodes(name.clone(), session, episodes));
                }
            }
        }
    }
    Ok(reports)
}

/// Summary CSV: one row per policy per session.
pub fn summary_csv(reports: &[EvalReport]) -> String {
    let mut out =
        String::from("policy,session,n,mean,ci_low,ci_high,mean_episode_len,invalid_rate\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.policy,
            r.session,
            r.n_rollouts,
            r.mean,
            r.ci_low,
            r.ci_high,
            r.mean_episode_len,
            r.invalid_rate
        ));
    }
    out
}

/// Long-format CSV: one row per episode.
pub fn episodes_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("policy,session,episode,return,steps,invalid_steps\n");
    for r in reports {
        for (i, e) in r.episodes.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.policy, r.session, i, e.ret, e.steps, e.invalid_steps
            ));
        }
    }
    out
}
