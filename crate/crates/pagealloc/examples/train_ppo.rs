//! Train a low-level PPO policy on the random workload and compare it with
//! the x-fit baselines, reporting the invalid-action episode rate.
//!
//! ```bash
//! cargo run --release -p pagealloc --example train_ppo -- [steps] [seed]
//! ```

use std::time::Instant;

use pagealloc::agents::{ppo_train, Policy, TrainConfig};
use pagealloc::env::{ActionMode, Env, EnvConfig};
use pagealloc::eval::{ci95, rollout_battery};
use pagealloc::fit::FitKind;

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(200_000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let lr: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(3e-4);

    let mut env_cfg = EnvConfig::new(10);
    env_cfg.action_mode = ActionMode::LowLevel;
    env_cfg.workload.size_range = (1, 4);

    let mut train = TrainConfig::new(steps);
    train.seed = seed;
    train.ppo_learning_rate = lr;

    let start = Instant::now();
    let mut env = Env::new(env_cfg.clone()).expect("valid config");
    let (policy, log) = ppo_train(&mut env, &train).expect("training runs");
    println!(
        "trained {} steps over {} episodes in {:.1?}",
        steps,
        log.episodes.len(),
        start.elapsed()
    );
    let window = log.episodes.len() / 10;
    if window > 0 {
        for (i, chunk) in log.episodes.chunks(window).enumerate() {
            let mean = chunk.iter().map(|e| e.ret).sum::<f64>() / chunk.len() as f64;
            println!("  decile {i}: mean return {mean:.3}");
        }
    }

    let rollouts = 1000;
    let eval_seed = 4321;
    let stats = rollout_battery(&policy, &env_cfg, rollouts, eval_seed).expect("battery runs");
    let returns: Vec<f64> = stats.iter().map(|s| s.ret).collect();
    let (mean, lo, hi) = ci95(&returns).unwrap();
    let bad_episodes = stats.iter().filter(|s| s.invalid_steps > 0).count();
    println!(
        "ppo        mean {mean:>8.2}  ci [{lo:>8.2}, {hi:>8.2}]  episodes with invalid: {} / {rollouts}",
        bad_episodes
    );

    for kind in FitKind::BASELINES {
        let baseline = Policy::fixed_fit(kind, env_cfg.action_mode).unwrap();
        let stats = rollout_battery(&baseline, &env_cfg, rollouts, eval_seed).unwrap();
        let returns: Vec<f64> = stats.iter().map(|s| s.ret).collect();
        let (mean, lo, hi) = ci95(&returns).unwrap();
        println!(
            "{:<10} mean {mean:>8.2}  ci [{lo:>8.2}, {hi:>8.2}]",
            kind.name()
        );
    }
}
