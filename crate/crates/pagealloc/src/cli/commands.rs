//! Implementations behind the `pagealloc` subcommands. Kept in the library
//! so tests and examples can drive them directly.

use std::path::{Path, PathBuf};

use crate::eval::{self, compare, ComparePolicy};
use crate::fit::FitKind;
use crate::seeding::{self, STREAM_SCRIPT, STREAM_SESSION};
use crate::workload::{
    make_bf_good, make_wf_good, replay_script, verify_adversarial, ReplayOutcome, RequestScript,
};

use super::{CliError, PolicyArtifact, RunConfig};

/// Where `cmd_train` put its outputs.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: PathBuf,
    pub log: PathBuf,
    pub manifest: PathBuf,
    pub episodes: usize,
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(&format!("creating output dir {}", dir.display()), e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}

/// Training seed for one session under a master seed.
pub fn session_seed(master: u64, session: usize) -> u64 {
    seeding::derive(seeding::derive(master, STREAM_SESSION), session as u64)
}

/// Train the configured agent; write checkpoint, per-episode log, and the
/// run manifest.
pub fn cmd_train(
    config_path: &Path,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<TrainOutcome, CliError> {
    let mut cfg = RunConfig::load(config_path, seed_override)?;
    if let Some(out) = out_override {
        cfg.out_dir = out.display().to_string();
    }
    let out_dir = PathBuf::from(&cfg.out_dir);
    ensure_dir(&out_dir)?;

    let mut train = cfg.train.clone();
    train.seed = session_seed(cfg.seed, 0);
    let (policy, log) = eval::train_agent(cfg.agent, &cfg.env, &train)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let artifact = PolicyArtifact {
        policy,
        page_size: cfg.env.page_size,
        history_len: cfg.env.history_len,
        train: Some(train.clone()),
        train_seed: train.seed,
    };
    let checkpoint = out_dir.join("checkpoint.policy");
    artifact.save(&checkpoint)?;
    let log_path = out_dir.join("training_log.csv");
    write_file(&log_path, &log.to_csv())?;
    let manifest = out_dir.join("run_manifest.cfg");
    write_file(&manifest, &cfg.to_manifest())?;
    Ok(TrainOutcome {
        checkpoint,
        log: log_path,
        manifest,
        episodes: log.episodes.len(),
    })
}

/// Evaluate checkpoints (one summary row per checkpoint) against the fixed
/// baselines on paired episode seeds; write summary and long-format CSVs.
pub fn cmd_eval(
    config_path: &Path,
    checkpoints: &[PathBuf],
    rollouts_override: Option<usize>,
    seed_override: Option<u64>,
    baselines_only: bool,
    out_override: Option<PathBuf>,
) -> Result<(PathBuf, PathBuf), CliError> {
    let mut cfg = RunConfig::load(config_path, seed_override)?;
    if let Some(out) = out_override {
        cfg.out_dir = out.display().to_string();
    }
    let rollouts = rollouts_override.unwrap_or(cfg.eval_rollouts);
    let out_dir = PathBuf::from(&cfg.out_dir);
    ensure_dir(&out_dir)?;

    let mut entries: Vec<ComparePolicy> = FitKind::BASELINES
        .iter()
        .map(|&k| ComparePolicy::Fixed(k))
        .collect();
    if !baselines_only {
        for (session, path) in checkpoints.iter().enumerate() {
            let artifact = PolicyArtifact::load(path)?;
            if artifact.page_size != cfg.env.page_size {
                return Err(CliError::Config(format!(
                    "checkpoint {} has page_size {} but env.page_size is {}",
                    path.display(),
                    artifact.page_size,
                    cfg.env.page_size
                )));
            }
            if artifact.history_len != cfg.env.history_len {
                return Err(CliError::Config(format!(
                    "checkpoint {} has history_len {} but env.history_len is {}",
                    path.display(),
                    artifact.history_len,
                    cfg.env.history_len
                )));
            }
            if artifact.policy.action_mode != cfg.env.action_mode {
                return Err(CliError::Config(format!(
                    "checkpoint {} was trained for {} actions",
                    path.display(),
                    artifact.policy.action_mode.as_str()
                )));
            }
            entries.push(ComparePolicy::Frozen {
                name: artifact.kind_str().to_string(),
                session,
                policy: artifact.policy,
            });
        }
    }

    let reports = compare(&entries, &cfg.env, 1, rollouts, cfg.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let summary_path = out_dir.join("eval_summary.csv");
    write_file(&summary_path, &eval::summary_csv(&reports))?;
    let episodes_path = out_dir.join("eval_episodes.csv");
    write_file(&episodes_path, &eval::episodes_csv(&reports))?;
    write_file(&out_dir.join("run_manifest.cfg"), &cfg.to_manifest())?;
    Ok((summary_path, episodes_path))
}

/// Generate `count` verified adversarial scripts into `out_dir`.
pub fn cmd_gen_workload(
    mode: &str,
    page_size: usize,
    count: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let maker: fn(usize, u64) -> Result<RequestScript, crate::workload::GenError> = match mode {
        "bf_good" => make_bf_good,
        "wf_good" => make_wf_good,
        other => {
            return Err(CliError::Config(format!(
                "gen-workload mode must be bf_good or wf_good, got `{other}`"
            )))
        }
    };
    ensure_dir(out_dir)?;
    let base = seeding::derive(seed, STREAM_SCRIPT);
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let script_seed = seeding::derive(base, i as u64);
        let script =
            maker(page_size, script_seed).map_err(|e| CliError::Generation(e.to_string()))?;
        let path = out_dir.join(format!("{mode}_p{page_size}_{i:04}.script"));
        write_file(&path, &script.to_text())?;
        paths.push(path);
    }
    Ok(paths)
}

/// Replay a script under each baseline and render the verification report,
/// including the page dump at the failure point.
pub fn cmd_inspect(script_path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(script_path)
        .map_err(|e| CliError::io(&format!("reading {}", script_path.display()), e))?;
    let script =
        RequestScript::from_text(&text).map_err(|e| CliError::Generation(e.to_string()))?;
    let report = verify_adversarial(&script).map_err(|e| CliError::Generation(e.to_string()))?;

    let mut out = format!(
        "script: label={} page_size={} seed={} events={}\n",
        script.label,
        script.page_size,
        script.seed,
        script.events.len()
    );
    let render = |out: &mut String, name: &str, outcome: &ReplayOutcome| match outcome.first_failure
    {
        None => out.push_str(&format!("{name}: OK ({} allocations)\n", outcome.satisfied)),
        Some(ord) => {
            out.push_str(&format!("{name}: FAIL@{ord}\n"));
            out.push_str("page at failure:\n");
            out.push_str(&outcome.page.dump());
        }
    };
    for kind in FitKind::BASELINES {
        // Recompute per-policy so the dumps reflect each failure state.
        let outcome =
            replay_script(&script, kind).map_err(|e| CliError::Generation(e.to_string()))?;
        render(&mut out, kind.name(), &outcome);
    }
    let verdict = if report.matches_label(script.label) {
        "PASS"
    } else {
        "FAIL"
    };
    out.push_str(&format!("label check ({}): {verdict}\n", script.label));
    Ok(out)
}

/// Train and evaluate the configured agent at each history length; write a
/// comparison CSV.
pub fn cmd_sweep(
    config_path: &Path,
    history_lens: &[usize],
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<PathBuf, CliError> {
    if history_lens.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one history length".into(),
        ));
    }
    let mut cfg = RunConfig::load(config_path, seed_override)?;
    if let Some(out) = out_override {
        cfg.out_dir = out.display().to_string();
    }
    let out_dir = PathBuf::from(&cfg.out_dir);
    ensure_dir(&out_dir)?;

    let mut csv = String::from("history_len,n,mean,ci_low,ci_high,mean_episode_len,invalid_rate\n");
    for &history_len in history_lens {
        let mut env_cfg = cfg.env.clone();
        env_cfg.history_len = history_len;
        // compare() derives the session-0 training seed from the master, so
        // every history length trains under the same seed.
        let entry = ComparePolicy::Train {
            name: cfg.agent.as_str().to_string(),
            agent: cfg.agent,
            train: cfg.train.clone(),
        };
        let reports = compare(&[entry], &env_cfg, 1, cfg.eval_rollouts, cfg.seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let r = &reports[0];
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            history_len,
            r.n_rollouts,
            r.mean,
            r.ci_low,
            r.ci_high,
            r.mean_episode_len,
            r.invalid_rate
        ));
    }
    let path = out_dir.join("history_sweep.csv");
    write_file(&path, &csv)?;
    write_file(&out_dir.join("run_manifest.cfg"), &cfg.to_manifest())?;
    Ok(path)
}
