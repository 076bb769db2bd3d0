//! Run configuration files: UTF-8 `key = value` lines with dotted section
//! prefixes and `#` comments. Every key has a default, so an empty file is a
//! valid config.

use std::collections::BTreeMap;
use std::path::Path;

use crate::agents::{AgentKind, TrainConfig};
use crate::env::{ActionMode, EnvConfig};
use crate::workload::WorkloadMode;

use super::CliError;

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Master seed; every component seed derives from it.
    pub seed: u64,
    pub agent: AgentKind,
    pub env: EnvConfig,
    pub train: TrainConfig,
    pub eval_rollouts: usize,
    pub eval_sessions: usize,
    pub out_dir: String,
}

impl RunConfig {
    /// Defaults for the given agent and page size.
    pub fn defaults(agent: AgentKind, page_size: usize) -> Self {
        let mut env = EnvConfig::new(page_size);
        if agent == AgentKind::Ppo {
            env.action_mode = ActionMode::LowLevel;
        }
        Self {
            seed: 0,
            agent,
            env,
            train: TrainConfig::for_agent(agent, 50_000),
            eval_rollouts: 100,
            eval_sessions: 5,
            out_dir: "out".to_string(),
        }
    }

    /// Parse a config file. `seed_override` (from `--seed`) wins over the
    /// file; with neither present the `PAGEALLOC_SEED` fallback applies.
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(&format!("reading config {}", path.display()), e))?;
        Self::from_text(&text, seed_override)
    }

    pub fn from_text(text: &str, seed_override: Option<u64>) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", idx + 1))
            })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }

        // page_size and agent steer the remaining defaults.
        let page_size = match entries.get("env.page_size") {
            Some(v) => parse_num::<usize>("env.page_size", v)?,
            None => 256,
        };
        let agent = match entries.get("agent") {
            Some(v) => AgentKind::parse(v)
                .ok_or_else(|| CliError::Config(format!("agent: unknown agent `{v}`")))?,
            None => AgentKind::Dqn,
        };
        let mut cfg = Self::defaults(agent, page_size);

        for (key, value) in &entries {
            cfg.apply(key, value)?;
        }
        if let Some(seed) = seed_override {
            cfg.seed = seed;
        } else if !entries.contains_key("seed") {
            cfg.seed = super::default_seed();
        }
        cfg.env.workload.rng_seed = cfg.seed;
        cfg.env.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "seed" => self.seed = parse_num(key, value)?,
            "agent" => {} // consumed before defaults
            "out.dir" => self.out_dir = value.to_string(),
            "env.page_size" => {} // consumed before defaults
            "env.action_mode" => {
                self.env.action_mode = ActionMode::parse(value)
                    .ok_or_else(|| CliError::Config(format!("{key}: unknown mode `{value}`")))?
            }
            "env.history_len" => self.env.history_len = parse_num(key, value)?,
            "env.step_reward" => self.env.step_reward = parse_num(key, value)?,
            "env.invalid_penalty" => self.env.invalid_penalty = parse_num(key, value)?,
            "env.max_consecutive_invalid" => {
                self.env.max_consecutive_invalid = parse_num(key, value)?
            }
            "env.max_episode_steps" => self.env.max_episode_steps = parse_num(key, value)?,
            "workload.mode" => {
                self.env.workload.mode = WorkloadMode::parse(value)
                    .ok_or_else(|| CliError::Config(format!("{key}: unknown mode `{value}`")))?
            }
            "workload.p_free" => self.env.workload.p_free = parse_num(key, value)?,
            "workload.p_alloc" => self.env.workload.p_alloc = parse_num(key, value)?,
            "workload.size_min" => self.env.workload.size_range.0 = parse_num(key, value)?,
            "workload.size_max" => self.env.workload.size_range.1 = parse_num(key, value)?,
            "workload.segment_random_len" => {
                self.env.workload.segment_random_len = parse_num(key, value)?
            }
            "train.total_timesteps" => self.train.total_timesteps = parse_num(key, value)?,
            "train.learning_rate" => self.train.learning_rate = parse_num(key, value)?,
            "train.discount" => self.train.discount = parse_num(key, value)?,
            "train.epsilon_start" => self.train.epsilon_start = parse_num(key, value)?,
            "train.epsilon_end" => self.train.epsilon_end = parse_num(key, value)?,
            "train.epsilon_fraction" => self.train.epsilon_fraction = parse_num(key, value)?,
            "train.batch_size" => self.train.batch_size = parse_num(key, value)?,
            "train.buffer_capacity" => self.train.buffer_capacity = parse_num(key, value)?,
            "train.target_sync_interval" => {
                self.train.target_sync_interval = parse_num(key, value)?
            }
            "train.train_freq" => self.train.train_freq = parse_num(key, value)?,
            "train.warmup_steps" => self.train.warmup_steps = parse_num(key, value)?,
            "train.ppo_horizon" => self.train.ppo_horizon = parse_num(key, value)?,
            "train.ppo_epochs" => self.train.ppo_epochs = parse_num(key, value)?,
            "train.ppo_clip" => self.train.ppo_clip = parse_num(key, value)?,
            "train.gae_lambda" => self.train.gae_lambda = parse_num(key, value)?,
            "train.value_coef" => self.train.value_coef = parse_num(key, value)?,
            "train.entropy_coef" => self.train.entropy_coef = parse_num(key, value)?,
            "train.ppo_batch_size" => self.train.ppo_batch_size = parse_num(key, value)?,
            "train.ppo_learning_rate" => self.train.ppo_learning_rate = parse_num(key, value)?,
            "eval.rollouts" => self.eval_rollouts = parse_num(key, value)?,
            "eval.sessions" => self.eval_sessions = parse_num(key, value)?,
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.env.validate().map_err(CliError::Config)?;
        self.train.validate().map_err(CliError::Config)?;
        match (self.agent, self.env.action_mode) {
            (AgentKind::Ppo, ActionMode::HighLevel) => {
                return Err(CliError::Config(
                    "agent `ppo` requires env.action_mode = low_level".into(),
                ))
            }
            (AgentKind::Dqn | AgentKind::LinearQ, ActionMode::LowLevel) => {
                return Err(CliError::Config(format!(
                    "agent `{}` requires env.action_mode = high_level",
                    self.agent.as_str()
                )))
            }
            _ => {}
        }
        if self.eval_sessions == 0 {
            return Err(CliError::Config("eval.sessions must be at least 1".into()));
        }
        Ok(())
    }

    /// Canonical serialization of the resolved config: the run manifest.
    /// Reproducing a run needs exactly this text (plus an output path).
    pub fn to_manifest(&self) -> String {
        let mut out = String::from("# pagealloc run manifest: fully resolved config\n");
        let kv = |out: &mut String, k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv(&mut out, "seed", self.seed.to_string());
        kv(&mut out, "agent", self.agent.as_str().to_string());
        kv(&mut out, "env.page_size", self.env.page_size.to_string());
        kv(
            &mut out,
            "env.action_mode",
            self.env.action_mode.as_str().to_string(),
        );
        kv(
            &mut out,
            "env.history_len",
            self.env.history_len.to_string(),
        );
        kv(
            &mut out,
            "env.step_reward",
            self.env.step_reward.to_string(),
        );
        kv(
            &mut out,
            "env.invalid_penalty",
            self.env.invalid_penalty.to_string(),
        );
        kv(
            &mut out,
            "env.max_consecutive_invalid",
            self.env.max_consecutive_invalid.to_string(),
        );
        kv(
            &mut out,
            "env.max_episode_steps",
            self.env.max_episode_steps.to_string(),
        );
        kv(
            &mut out,
            "workload.mode",
            self.env.workload.mode.as_str().to_string(),
        );
        kv(
            &mut out,
            "workload.p_free",
            self.env.workload.p_free.to_string(),
        );
        kv(
            &mut out,
            "workload.p_alloc",
            self.env.workload.p_alloc.to_string(),
        );
        kv(
            &mut out,
            "workload.size_min",
            self.env.workload.size_range.0.to_string(),
        );
        kv(
            &mut out,
            "workload.size_max",
            self.env.workload.size_range.1.to_string(),
        );
        kv(
            &mut out,
            "workload.segment_random_len",
            self.env.workload.segment_random_len.to_string(),
        );
        kv(
            &mut out,
            "train.total_timesteps",
            self.train.total_timesteps.to_string(),
        );
        kv(
            &mut out,
            "train.learning_rate",
            self.train.learning_rate.to_string(),
        );
        kv(&mut out, "train.discount", self.train.discount.to_string());
        kv(
            &mut out,
            "train.epsilon_start",
            self.train.epsilon_start.to_string(),
        );
        kv(
            &mut out,
            "train.epsilon_end",
            self.train.epsilon_end.to_string(),
        );
        kv(
            &mut out,
            "train.epsilon_fraction",
            self.train.epsilon_fraction.to_string(),
        );
        kv(
            &mut out,
            "train.batch_size",
            self.train.batch_size.to_string(),
        );
        kv(
            &mut out,
            "train.buffer_capacity",
            self.train.buffer_capacity.to_string(),
        );
        kv(
            &mut out,
            "train.target_sync_interval",
            self.train.target_sync_interval.to_string(),
        );
        kv(
            &mut out,
            "train.train_freq",
            self.train.train_freq.to_string(),
        );
        kv(
            &mut out,
            "train.warmup_steps",
            self.train.warmup_steps.to_string(),
        );
        kv(
            &mut out,
            "train.ppo_horizon",
            self.train.ppo_horizon.to_string(),
        );
        kv(
            &mut out,
            "train.ppo_epochs",
            self.train.ppo_epochs.to_string(),
        );
        kv(&mut out, "train.ppo_clip", self.train.ppo_clip.to_string());
        kv(
            &mut out,
            "train.gae_lambda",
            self.train.gae_lambda.to_string(),
        );
        kv(
            &mut out,
            "train.value_coef",
            self.train.value_coef.to_string(),
        );
        kv(
            &mut out,
            "train.entropy_coef",
            self.train.entropy_coef.to_string(),
        );
        kv(
            &mut out,
            "train.ppo_batch_size",
            self.train.ppo_batch_size.to_string(),
        );
        kv(
            &mut out,
            "train.ppo_learning_rate",
            self.train.ppo_learning_rate.to_string(),
        );
        kv(&mut out, "eval.rollouts", self.eval_rollouts.to_string());
        kv(&mut out, "eval.sessions", self.eval_sessions.to_string());
        out
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse `{value}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_valid_with_defaults() {
        let cfg = RunConfig::from_text("", Some(7)).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.agent, AgentKind::Dqn);
        assert_eq!(cfg.env.page_size, 256);
        assert_eq!(cfg.env.workload.size_range, (1, 32));
        assert_eq!(cfg.train.total_timesteps, 50_000);
        assert_eq!(cfg.eval_rollouts, 100);
    }

    #[test]
    fn dotted_keys_and_comments_parse() {
        let text = "\
# experiment
agent = linear_q
env.page_size = 10   # small page
env.history_len = 5
workload.mode = bf_good
workload.size_min = 1
workload.size_max = 4
train.total_timesteps = 1234
seed = 99
";
        let cfg = RunConfig::from_text(text, None).unwrap();
        assert_eq!(cfg.agent, AgentKind::LinearQ);
        assert_eq!(cfg.env.page_size, 10);
        assert_eq!(cfg.env.history_len, 5);
        assert_eq!(cfg.env.workload.mode, WorkloadMode::BfGood);
        assert_eq!(cfg.env.workload.size_range, (1, 4));
        assert_eq!(cfg.train.total_timesteps, 1234);
        assert_eq!(cfg.seed, 99);
        // Linear agents default to the larger step size.
        assert_eq!(cfg.train.learning_rate, 0.01);
    }

    #[test]
    fn probability_mismatch_names_both_fields() {
        let err = RunConfig::from_text("workload.p_free = 0.5\n", None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p_free") && msg.contains("p_alloc"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_text("env.pagesize = 10\n", None).unwrap_err();
        assert!(err.to_string().contains("env.pagesize"));
    }

    #[test]
    fn agent_mode_compatibility_is_checked() {
        let err =
            RunConfig::from_text("agent = ppo\nenv.action_mode = high_level\n", None).unwrap_err();
        assert!(err.to_string().contains("low_level"));
        // ppo defaults straight to low_level
        let cfg = RunConfig::from_text("agent = ppo\n", None).unwrap();
        assert_eq!(cfg.env.action_mode, ActionMode::LowLevel);
    }

    #[test]
    fn manifest_round_trips_to_the_same_config() {
        let cfg =
            RunConfig::from_text("agent = ppo\nenv.page_size = 10\nseed = 3\n", None).unwrap();
        let manifest = cfg.to_manifest();
        let mut reparsed = RunConfig::from_text(&manifest, None).unwrap();
        reparsed.out_dir = cfg.out_dir.clone();
        assert_eq!(reparsed, cfg);
        assert_eq!(reparsed.to_manifest(), manifest);
    }
}
