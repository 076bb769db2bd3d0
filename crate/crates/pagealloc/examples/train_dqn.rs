//! Train a DQN on an adversarial workload and compare it with the x-fit
//! baselines on paired evaluation seeds.
//!
//! ```bash
//! cargo run --release -p pagealloc --example train_dqn -- [steps] [wf_good|bf_good|mixed]
//! ```

use std::time::Instant;

use pagealloc::agents::{dqn_train, TrainConfig};
use pagealloc::env::{Env, EnvConfig};
use pagealloc::eval::{ci95, rollout_battery};
use pagealloc::fit::FitKind;
use pagealloc::workload::WorkloadMode;

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(50_000);
    let mode = match args.next().as_deref() {
        Some("bf_good") => WorkloadMode::BfGood,
        Some("mixed") => WorkloadMode::Mixed,
        _ => WorkloadMode::WfGood,
    };
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let sync: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(1000);

    let mut env_cfg = EnvConfig::new(256);
    env_cfg.history_len = 10;
    env_cfg.workload.mode = mode;

    let mut train = TrainConfig::new(steps);
    train.seed = seed;
    train.target_sync_interval = sync;

    let start = Instant::now();
    let mut env = Env::new(env_cfg.clone()).expect("valid config");
    let (policy, log) = dqn_train(&mut env, &train).expect("training runs");
    println!(
        "trained {} steps over {} episodes in {:.1?}",
        steps,
        log.episodes.len(),
        start.elapsed()
    );
    if let Some(tail) = log.episodes.rchunks(5).next() {
        for e in tail {
            println!(
                "  episode {:>4}: steps {:>5} return {:>8.1}",
                e.episode, e.steps, e.ret
            );
        }
    }

    let eval_seed = 1234;
    let rollouts = 100;
    let start = Instant::now();
    let stats = rollout_battery(&policy, &env_cfg, rollouts, eval_seed).expect("battery runs");
    let returns: Vec<f64> = stats.iter().map(|s| s.ret).collect();
    let (mean, lo, hi) = ci95(&returns).expect("enough rollouts");
    println!(
        "dqn        mean {mean:>8.2}  ci [{lo:>8.2}, {hi:>8.2}]  ({:.1?})",
        start.elapsed()
    );

    for kind in FitKind::BASELINES {
        let policy = pagealloc::agents::Policy::fixed_fit(kind, env_cfg.action_mode).unwrap();
        let stats = rollout_battery(&policy, &env_cfg, rollouts, eval_seed).unwrap();
        let returns: Vec<f64> = stats.iter().map(|s| s.ret).collect();
        let (mean, lo, hi) = ci95(&returns).unwrap();
        println!(
            "{:<10} mean {mean:>8.2}  ci [{lo:>8.2}, {hi:>8.2}]",
            kind.name()
        );
    }
}
