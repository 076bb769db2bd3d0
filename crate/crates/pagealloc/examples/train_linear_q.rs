//! Train the linear Q-learning agent on an adversarial workload and compare
//! it with the x-fit baselines on paired evaluation seeds.
//!
//! ```bash
//! cargo run --release -p pagealloc --example train_linear_q -- [steps] [bf_good|wf_good] [seed]
//! ```

use pagealloc::agents::{linear_q_train, AgentKind, Policy, TrainConfig};
use pagealloc::env::{Env, EnvConfig};
use pagealloc::eval::{ci95, rollout_battery};
use pagealloc::fit::FitKind;
use pagealloc::workload::WorkloadMode;

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(50_000);
    let mode = match args.next().as_deref() {
        Some("wf_good") => WorkloadMode::WfGood,
        _ => WorkloadMode::BfGood,
    };
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let mut env_cfg = EnvConfig::new(256);
    env_cfg.history_len = 10;
    env_cfg.workload.mode = mode;

    let mut train = TrainConfig::for_agent(AgentKind::LinearQ, steps);
    train.seed = seed;

    let mut env = Env::new(env_cfg.clone()).expect("valid config");
    let (policy, log) = linear_q_train(&mut env, &train).expect("training runs");
    println!(
        "trained {} steps over {} episodes on {}",
        steps,
        log.episodes.len(),
        mode.as_str()
    );

    let rollouts = 100;
    let eval_seed = 1234;
    let stats = rollout_battery(&policy, &env_cfg, rollouts, eval_seed).expect("battery runs");
    let returns: Vec<f64> = stats.iter().map(|s| s.ret).collect();
    let (mean, lo, hi) = ci95(&returns).unwrap();
    println!("linear_q   mean {mean:>8.2}  ci [{lo:>8.2}, {hi:>8.2}]");

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
