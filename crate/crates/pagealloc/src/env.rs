//! The episodic allocation environment.
//!
//! An episode runs on one fresh page. Each step presents the agent with the
//! page bitmap, the pending request size and optionally the sizes of the
//! previous requests; the agent answers either with a fit heuristic
//! (high-level) or an exact start cell (low-level). Valid placements earn a
//! small positive reward, invalid low-level placements a large penalty, and
//! the episode ends when the pending request no longer fits in any free run.

use std::collections::VecDeque;

use thiserror::Error;

use crate::fit::{self, FitKind};
use crate::page::{IdSource, PageState};
use crate::seeding::{self, STREAM_WORKLOAD};
use crate::workload::{RequestGen, WorkloadConfig};

/// Which action space the environment exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    /// Actions 0, 1, 2 select first-, best- and worst-fit placement.
    HighLevel,
    /// Actions 0..page_size name the exact start cell.
    LowLevel,
}

impl ActionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionMode::HighLevel => "high_level",
            ActionMode::LowLevel => "low_level",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "high_level" => Some(ActionMode::HighLevel),
            "low_level" => Some(ActionMode::LowLevel),
            _ => None,
        }
    }
}

/// Environment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub page_size: usize,
    pub action_mode: ActionMode,
    /// Number of previous request sizes appended to the observation.
    pub history_len: usize,
    pub workload: WorkloadConfig,
    pub step_reward: f64,
    pub invalid_penalty: f64,
    /// Consecutive invalid low-level actions that end the episode.
    pub max_consecutive_invalid: usize,
    pub max_episode_steps: usize,
    pub seed: u64,
}

impl EnvConfig {
    pub fn new(page_size: usize) -> Self {
        Self {
            page_size,
            action_mode: ActionMode::HighLevel,
            history_len: 0,
            workload: WorkloadConfig::new(page_size),
            step_reward: 0.1,
            invalid_penalty: -10.0,
            max_consecutive_invalid: 4,
            max_episode_steps: 2000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.page_size == 0 {
            return Err("env.page_size must be at least 1".into());
        }
        if self.workload.page_size != self.page_size {
            return Err(format!(
                "workload.page_size ({}) must equal env.page_size ({})",
                self.workload.page_size, self.page_size
            ));
        }
        if self.max_episode_steps == 0 {
            return Err("env.max_episode_steps must be at least 1".into());
        }
        if self.max_consecutive_invalid == 0 {
            return Err("env.max_consecutive_invalid must be at least 1".into());
        }
        self.workload.validate()
    }

    /// Observation length: bitmap + request + history.
    pub fn observation_len(&self) -> usize {
        self.page_size + 1 + self.history_len
    }

    /// Size of the action space under the configured mode.
    pub fn action_count(&self) -> usize {
        match self.action_mode {
            ActionMode::HighLevel => 3,
            ActionMode::LowLevel => self.page_size,
        }
    }
}

/// What the agent sees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub bitmap: Vec<bool>,
    pub request_size: usize,
    /// Previous request sizes, most recent first, zero-padded.
    pub history: Vec<usize>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.bitmap.len() + 1 + self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Raw flattening: bitmap cells, request size, history sizes.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend(self.bitmap.iter().map(|&c| if c { 1.0 } else { 0.0 }));
        v.push(self.request_size as f64);
        v.extend(self.history.iter().map(|&h| h as f64));
        v
    }

    /// Agent-side scaling: size fields divided by the page size, bitmap
    /// left as 0/1.
    pub fn to_scaled_vec(&self) -> Vec<f64> {
        let scale = self.bitmap.len() as f64;
        let mut v = self.to_vec();
        for x in v.iter_mut().skip(self.bitmap.len()) {
            *x /= scale;
        }
        v
    }
}

/// Extra per-step facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInfo {
    /// Frees the workload applied while producing the next request.
    pub frees_applied: usize,
    pub action_valid: bool,
    /// Start cell of the placement, when one happened.
    pub placement: Option<usize>,
}

/// Outcome of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    /// The pending request is unsatisfiable, or invalid actions hit the cap.
    pub terminated: bool,
    /// The step budget ran out.
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    Config(String),
    #[error("action {action} out of range (limit {limit})")]
    ActionOutOfRange { action: usize, limit: usize },
    #[error("step on a finished episode; call reset first")]
    EpisodeOver,
}

/// The allocation MDP.
#[derive(Debug, Clone)]
pub struct Env {
    cfg: EnvConfig,
    page: PageState,
    generator: RequestGen,
    ids: IdSource,
    request: usize,
    history: VecDeque<usize>,
    steps: usize,
    consecutive_invalid: usize,
    terminated: bool,
    truncated: bool,
}

impl Env {
    pub fn new(cfg: EnvConfig) -> Result<Self, EnvError> {
        cfg.validate().map_err(EnvError::Config)?;
        let seed = cfg.seed;
        let mut env = Self {
            page: PageState::new(cfg.page_size).expect("validated page_size"),
            generator: RequestGen::new(cfg.workload.clone(), 0),
            ids: IdSource::new(),
            request: 0,
            history: VecDeque::new(),
            steps: 0,
            consecutive_invalid: 0,
            terminated: false,
            truncated: false,
            cfg,
        };
        env.reset(seed);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn page(&self) -> &PageState {
        &self.page
    }

    pub fn request(&self) -> usize {
        self.request
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.terminated || self.truncated
    }

    /// Start a fresh episode. All randomness derives from `seed`.
    pub fn reset(&mut self, seed: u64) -> Observation {
        self.page = PageState::new(self.cfg.page_size).expect("validated page_size");
        self.generator = RequestGen::new(
            self.cfg.workload.clone(),
            seeding::derive(seed, STREAM_WORKLOAD),
        );
        self.ids = IdSource::new();
        self.history = VecDeque::with_capacity(self.cfg.history_len);
        self.steps = 0;
        self.consecutive_invalid = 0;
        self.terminated = false;
        self.truncated = false;
        self.request = self.generator.next_request(&mut self.page).size;
        self.observation()
    }

    /// The current observation. History holds strictly previous requests.
    pub fn observation(&self) -> Observation {
        let mut history = Vec::with_capacity(self.cfg.history_len);
        history.extend(self.history.iter().copied());
        history.resize(self.cfg.history_len, 0);
        Observation {
            bitmap: self.page.bitmap().to_vec(),
            request_size: self.request,
            history,
        }
    }

    /// Step with a fit-heuristic action (0 first, 1 best, 2 worst).
    pub fn step_high(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if self.is_done() {
            return Err(EnvError::EpisodeOver);
        }
        if action >= 3 {
            return Err(EnvError::ActionOutOfRange { action, limit: 3 });
        }
        let kind = [FitKind::First, FitKind::Best, FitKind::Worst][action];
        let start = fit::place(kind, &self.page, self.request)
            .expect("presented requests are always satisfiable");
        Ok(self.commit_placement(start))
    }

    /// Step with an exact start cell.
    pub fn step_low(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if self.is_done() {
            return Err(EnvError::EpisodeOver);
        }
        if action >= self.cfg.page_size {
            return Err(EnvError::ActionOutOfRange {
                action,
                limit: self.cfg.page_size,
            });
        }
        let id = self.ids.next_id();
        if self.page.allocate_at(action, self.request, id).is_err() {
            // Invalid action: page and request stay frozen.
            self.steps += 1;
            self.consecutive_invalid += 1;
            if self.consecutive_invalid >= self.cfg.max_consecutive_invalid {
                self.terminated = true;
            }
            if self.steps >= self.cfg.max_episode_steps {
                self.truncated = true;
            }
            return Ok(StepResult {
                observation: self.observation(),
                reward: self.cfg.invalid_penalty,
                terminated: self.terminated,
                truncated: self.truncated,
                info: StepInfo {
                    frees_applied: 0,
                    action_valid: false,
                    placement: None,
                },
            });
        }
        self.generator.note_serviced(id);
        Ok(self.finish_valid_step(action))
    }

    /// Dispatch on the configured action mode.
    pub fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        match self.cfg.action_mode {
            ActionMode::HighLevel => self.step_high(action),
            ActionMode::LowLevel => self.step_low(action),
        }
    }

    fn commit_placement(&mut self, start: usize) -> StepResult {
        let id = self.ids.next_id();
        self.page
            .allocate_at(start, self.request, id)
            .expect("fit placement is legal");
        self.generator.note_serviced(id);
        self.finish_valid_step(start)
    }

    fn finish_valid_step(&mut self, placement: usize) -> StepResult {
        self.steps += 1;
        self.consecutive_invalid = 0;
        if self.cfg.history_len > 0 {
            if self.history.len() == self.cfg.history_len {
                self.history.pop_back();
            }
            self.history.push_front(self.request);
        }
        let next = self.generator.next_request(&mut self.page);
        self.request = next.size;
        if !self.page.can_satisfy(self.request) {
            self.terminated = true;
        }
        if self.steps >= self.cfg.max_episode_steps {
            self.truncated = true;
        }
        StepResult {
            observation: self.observation(),
            reward: self.cfg.step_reward,
            terminated: self.terminated,
            truncated: self.truncated,
            info: StepInfo {
                frees_applied: next.frees_applied,
                action_valid: true,
                placement: Some(placement),
            },
        }
    }
}

/// Undiscounted sum of rewards: the evaluation return.
pub fn episode_return(rewards: &[f64]) -> f64 {
    rewards.iter().sum()
}
