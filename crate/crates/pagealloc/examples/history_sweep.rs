//! The history-length ablation: train the same agent on the same workload
//! at several history lengths and compare the evaluation returns.
//!
//! Uses a small budget by default so it finishes quickly; pass a step count
//! to run it at experiment scale.
//!
//! ```bash
//! cargo run --release -p pagealloc --example history_sweep -- [steps]
//! ```

use pagealloc::agents::{AgentKind, TrainConfig};
use pagealloc::env::EnvConfig;
use pagealloc::eval::{compare, ComparePolicy};
use pagealloc::workload::WorkloadMode;

fn main() {
    let steps: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(10_000);

    println!("history_len | mean return | 95% interval");
    for history_len in [0usize, 5, 10] {
        let mut cfg = EnvConfig::new(256);
        cfg.history_len = history_len;
        cfg.workload.mode = WorkloadMode::Mixed;

        let mut train = TrainConfig::new(steps);
        train.seed = 11;
        let entry = ComparePolicy::Train {
            name: "dqn".into(),
            agent: AgentKind::Dqn,
            train,
        };
        let reports = compare(&[entry], &cfg, 1, 50, 2024).expect("sweep runs");
        let r = &reports[0];
        println!(
            "{history_len:>11} | {:>11.2} | [{:.2}, {:.2}]",
            r.mean, r.ci_low, r.ci_high
        );
    }
}
