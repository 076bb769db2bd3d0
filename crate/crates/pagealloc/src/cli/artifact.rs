//! Policy checkpoints as structured text.
//!
//! The format is line-oriented `key = value` with a fixed magic header,
//! canonical key order and 17-significant-digit floats, so loading and
//! re-serializing an artifact is byte-identical and any language can parse
//! it back exactly.

use std::collections::BTreeMap;
use std::path::Path;

use crate::agents::{Behavior, Policy, TrainConfig, LINEAR_INPUTS};
use crate::env::ActionMode;
use crate::fit::FitKind;
use crate::nn::{Activation, DenseNet, Layer};

use super::CliError;

const MAGIC: &str = "pagealloc_policy_v1";

/// A serializable trained (or fixed) policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyArtifact {
    pub policy: Policy,
    pub page_size: usize,
    pub history_len: usize,
    /// Training config snapshot; absent for fixed policies.
    pub train: Option<TrainConfig>,
    /// The seed the policy was trained under.
    pub train_seed: u64,
}

/// 17 significant digits: enough to reproduce any f64 exactly.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_f64_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_f64(v))
        .collect::<Vec<_>>()
        .join(" ")
}

impl PolicyArtifact {
    pub fn kind_str(&self) -> &'static str {
        match &self.policy.behavior {
            Behavior::FixedFit(kind) => kind.name(),
            Behavior::LinearQ { .. } => "linear_q",
            Behavior::Dqn { .. } => "dqn",
            Behavior::Ppo { .. } => "ppo",
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        let kv = |out: &mut String, k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv(&mut out, "kind", self.kind_str().to_string());
        kv(
            &mut out,
            "action_mode",
            self.policy.action_mode.as_str().to_string(),
        );
        kv(&mut out, "page_size", self.page_size.to_string());
        kv(&mut out, "history_len", self.history_len.to_string());
        kv(&mut out, "train_seed", self.train_seed.to_string());
        if let Some(t) = &self.train {
            kv(
                &mut out,
                "train.total_timesteps",
                t.total_timesteps.to_string(),
            );
            kv(&mut out, "train.learning_rate", fmt_f64(t.learning_rate));
            kv(&mut out, "train.discount", fmt_f64(t.discount));
            kv(&mut out, "train.epsilon_start", fmt_f64(t.epsilon_start));
            kv(&mut out, "train.epsilon_end", fmt_f64(t.epsilon_end));
            kv(
                &mut out,
                "train.epsilon_fraction",
                fmt_f64(t.epsilon_fraction),
            );
            kv(&mut out, "train.batch_size", t.batch_size.to_string());
            kv(
                &mut out,
                "train.buffer_capacity",
                t.buffer_capacity.to_string(),
            );
            kv(
                &mut out,
                "train.target_sync_interval",
                t.target_sync_interval.to_string(),
            );
            kv(&mut out, "train.train_freq", t.train_freq.to_string());
            kv(&mut out, "train.warmup_steps", t.warmup_steps.to_string());
            kv(&mut out, "train.ppo_horizon", t.ppo_horizon.to_string());
            kv(&mut out, "train.ppo_epochs", t.ppo_epochs.to_string());
            kv(&mut out, "train.ppo_clip", fmt_f64(t.ppo_clip));
            kv(&mut out, "train.gae_lambda", fmt_f64(t.gae_lambda));
            kv(&mut out, "train.value_coef", fmt_f64(t.value_coef));
            kv(&mut out, "train.entropy_coef", fmt_f64(t.entropy_coef));
            kv(
                &mut out,
                "train.ppo_batch_size",
                t.ppo_batch_size.to_string(),
            );
            kv(
                &mut out,
                "train.ppo_learning_rate",
                fmt_f64(t.ppo_learning_rate),
            );
            kv(&mut out, "train.seed", t.seed.to_string());
        }
        match &self.policy.behavior {
            Behavior::FixedFit(_) => {}
            Behavior::LinearQ { weights } => {
                kv(&mut out, "linear.actions", weights.len().to_string());
                kv(&mut out, "linear.inputs", LINEAR_INPUTS.to_string());
                for (i, row) in weights.iter().enumerate() {
                    kv(&mut out, &format!("linear.weights.{i}"), fmt_f64_list(row));
                }
            }
            Behavior::Dqn { net, .. } => write_net(&mut out, "net", net),
            Behavior::Ppo { actor, critic } => {
                write_net(&mut out, "actor", actor);
                write_net(&mut out, "critic", critic);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        let magic = lines.next().unwrap_or_default();
        if magic != MAGIC {
            return Err(CliError::Config(format!(
                "not a pagealloc policy file (header `{magic}`)"
            )));
        }
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "checkpoint line {}: expected `key = value`",
                    idx + 2
                ))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let kind = req(&map, "kind")?;
        let action_mode = ActionMode::parse(&req(&map, "action_mode")?)
            .ok_or_else(|| CliError::Config("bad action_mode in checkpoint".into()))?;
        let page_size: usize = parse(&map, "page_size")?;
        let history_len: usize = parse(&map, "history_len")?;
        let train_seed: u64 = parse(&map, "train_seed")?;
        let train = if map.contains_key("train.total_timesteps") {
            let mut t = TrainConfig::new(parse(&map, "train.total_timesteps")?);
            t.learning_rate = parse_f64(&map, "train.learning_rate")?;
            t.discount = parse_f64(&map, "train.discount")?;
            t.epsilon_start = parse_f64(&map, "train.epsilon_start")?;
            t.epsilon_end = parse_f64(&map, "train.epsilon_end")?;
            t.epsilon_fraction = parse_f64(&map, "train.epsilon_fraction")?;
            t.batch_size = parse(&map, "train.batch_size")?;
            t.buffer_capacity = parse(&map, "train.buffer_capacity")?;
            t.target_sync_interval = parse(&map, "train.target_sync_interval")?;
            t.train_freq = parse(&map, "train.train_freq")?;
            t.warmup_steps = parse(&map, "train.warmup_steps")?;
            t.ppo_horizon = parse(&map, "train.ppo_horizon")?;
            t.ppo_epochs = parse(&map, "train.ppo_epochs")?;
            t.ppo_clip = parse_f64(&map, "train.ppo_clip")?;
            t.gae_lambda = parse_f64(&map, "train.gae_lambda")?;
            t.value_coef = parse_f64(&map, "train.value_coef")?;
            t.entropy_coef = parse_f64(&map, "train.entropy_coef")?;
            t.ppo_batch_size = parse(&map, "train.ppo_batch_size")?;
            t.ppo_learning_rate = parse_f64(&map, "train.ppo_learning_rate")?;
            t.seed = parse(&map, "train.seed")?;
            Some(t)
        } else {
            None
        };

        let behavior = match kind.as_str() {
            "first_fit" => Behavior::FixedFit(FitKind::First),
            "best_fit" => Behavior::FixedFit(FitKind::Best),
            "worst_fit" => Behavior::FixedFit(FitKind::Worst),
            "linear_q" => {
                let actions: usize = parse(&map, "linear.actions")?;
                let weights = (0..actions)
                    .map(|i| parse_f64_list(&map, &format!("linear.weights.{i}")))
                    .collect::<Result<Vec<_>, _>>()?;
                Behavior::LinearQ { weights }
            }
            "dqn" => {
                let net = parse_net(&map, "net")?;
                Behavior::Dqn {
                    target: net.clone(),
                    net,
                }
            }
            "ppo" => Behavior::Ppo {
                actor: parse_net(&map, "actor")?,
                critic: parse_net(&map, "critic")?,
            },
            other => {
                return Err(CliError::Config(format!(
                    "unknown policy kind `{other}` in checkpoint"
                )))
            }
        };
        Ok(Self {
            policy: Policy {
                behavior,
                action_mode,
                epsilon: 0.0,
            },
            page_size,
            history_len,
            train,
            train_seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_text())
            .map_err(|e| CliError::io(&format!("writing checkpoint {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(&format!("reading checkpoint {}", path.display()), e))?;
        Self::from_text(&text)
    }
}

fn write_net(out: &mut String, prefix: &str, net: &DenseNet) {
    let dims: Vec<String> = net.dims().iter().map(|d| d.to_string()).collect();
    out.push_str(&format!("{prefix}.dims = {}\n", dims.join(" ")));
    let acts: Vec<&str> = net.activations().iter().map(|a| a.as_str()).collect();
    out.push_str(&format!("{prefix}.activations = {}\n", acts.join(" ")));
    for (i, layer) in net.layers().iter().enumerate() {
        out.push_str(&format!(
            "{prefix}.layer.{i}.weights = {}\n",
            fmt_f64_list(&layer.weights)
        ));
        out.push_str(&format!(
            "{prefix}.layer.{i}.biases = {}\n",
            fmt_f64_list(&layer.biases)
        ));
    }
}

fn parse_net(map: &BTreeMap<String, String>, prefix: &str) -> Result<DenseNet, CliError> {
    let dims: Vec<usize> = req(map, &format!("{prefix}.dims"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(prefix, "dims")))
        .collect::<Result<_, _>>()?;
    let activations: Vec<Activation> = req(map, &format!("{prefix}.activations"))?
        .split_whitespace()
        .map(|t| Activation::parse(t).ok_or_else(|| bad(prefix, "activations")))
        .collect::<Result<_, _>>()?;
    if dims.len() < 2 || activations.len() != dims.len() - 1 {
        return Err(bad(prefix, "architecture"));
    }
    let mut layers = Vec::with_capacity(activations.len());
    for i in 0..activations.len() {
        let weights = parse_f64_list(map, &format!("{prefix}.layer.{i}.weights"))?;
        let biases = parse_f64_list(map, &format!("{prefix}.layer.{i}.biases"))?;
        let (in_dim, out_dim) = (dims[i], dims[i + 1]);
        if weights.len() != in_dim * out_dim || biases.len() != out_dim {
            return Err(bad(prefix, "layer shapes"));
        }
        layers.push(Layer {
            in_dim,
            out_dim,
            weights,
            biases,
            activation: activations[i],
        });
    }
    DenseNet::from_layers(layers).map_err(|e| CliError::Config(e.to_string()))
}

fn bad(prefix: &str, what: &str) -> CliError {
    CliError::Config(format!("checkpoint {prefix}: bad {what}"))
}

fn req(map: &BTreeMap<String, String>, key: &str) -> Result<String, CliError> {
    map.get(key)
        .cloned()
        .ok_or_else(|| CliError::Config(format!("checkpoint lacks `{key}`")))
}

fn parse<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T, CliError> {
    req(map, key)?
        .parse()
        .map_err(|_| CliError::Config(format!("checkpoint `{key}`: bad value")))
}

fn parse_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64, CliError> {
    parse(map, key)
}

fn parse_f64_list(map: &BTreeMap<String, String>, key: &str) -> Result<Vec<f64>, CliError> {
    req(map, key)?
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Config(format!("checkpoint `{key}`: bad float `{t}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;

    #[test]
    fn float_format_round_trips_exactly() {
        for v in [
            0.1,
            -10.0,
            1e-4,
            3e-4,
            std::f64::consts::PI,
            f64::MIN_POSITIVE,
            123456.789012345,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s}");
        }
    }

    #[test]
    fn dqn_artifact_round_trips_byte_identically() {
        let mut rng = seeding::rng(5, 1);
        let net = DenseNet::init(
            &[11, 8, 3],
            &[Activation::Relu, Activation::Identity],
            &mut rng,
        );
        let artifact = PolicyArtifact {
            policy: Policy {
                behavior: Behavior::Dqn {
                    target: net.clone(),
                    net,
                },
                action_mode: ActionMode::HighLevel,
                epsilon: 0.0,
            },
            page_size: 10,
            history_len: 0,
            train: Some(TrainConfig::new(5000)),
            train_seed: 42,
        };
        let text = artifact.to_text();
        let parsed = PolicyArtifact::from_text(&text).unwrap();
        assert_eq!(parsed.to_text(), text);
        assert_eq!(parsed.page_size, 10);
        assert_eq!(parsed.train.as_ref().unwrap().total_timesteps, 5000);
    }

    #[test]
    fn linear_and_ppo_artifacts_round_trip() {
        let weights = vec![vec![0.25; LINEAR_INPUTS]; 3];
        let artifact = PolicyArtifact {
            policy: Policy {
                behavior: Behavior::LinearQ { weights },
                action_mode: ActionMode::HighLevel,
                epsilon: 0.0,
            },
            page_size: 256,
            history_len: 10,
            train: Some(TrainConfig::new(50_000)),
            train_seed: 1,
        };
        let text = artifact.to_text();
        assert_eq!(PolicyArtifact::from_text(&text).unwrap().to_text(), text);

        let mut rng = seeding::rng(6, 1);
        let acts = [Activation::Tanh, Activation::Identity];
        let artifact = PolicyArtifact {
            policy: Policy {
                behavior: Behavior::Ppo {
                    actor: DenseNet::init(&[11, 4, 10], &acts, &mut rng),
                    critic: DenseNet::init(&[11, 4, 1], &acts, &mut rng),
                },
                action_mode: ActionMode::LowLevel,
                epsilon: 0.0,
            },
            page_size: 10,
            history_len: 0,
            train: Some(TrainConfig::new(1000)),
            train_seed: 9,
        };
        let text = artifact.to_text();
        assert_eq!(PolicyArtifact::from_text(&text).unwrap().to_text(), text);
    }

    #[test]
    fn bad_headers_are_rejected() {
        assert!(PolicyArtifact::from_text("nonsense\n").is_err());
        assert!(PolicyArtifact::from_text("pagealloc_policy_v1\nkind = alien\n").is_err());
    }
}
