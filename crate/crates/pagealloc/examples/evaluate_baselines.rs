//! Evaluate the three x-fit baselines on a chosen workload with paired
//! seeds and print the summary table plus its CSV form.
//!
//! ```bash
//! cargo run --release -p pagealloc --example evaluate_baselines -- [random|bf_good|wf_good|mixed] [rollouts]
//! ```

use pagealloc::env::EnvConfig;
use pagealloc::eval::{compare, summary_csv, ComparePolicy};
use pagealloc::fit::FitKind;
use pagealloc::workload::WorkloadMode;

fn main() {
    let mut args = std::env::args().skip(1);
    let mode = args
        .next()
        .as_deref()
        .and_then(WorkloadMode::parse)
        .unwrap_or(WorkloadMode::Mixed);
    let rollouts: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);

    let mut cfg = EnvConfig::new(256);
    cfg.history_len = 10;
    cfg.workload.mode = mode;

    let entries: Vec<ComparePolicy> = FitKind::BASELINES
        .iter()
        .map(|&k| ComparePolicy::Fixed(k))
        .collect();
    let reports = compare(&entries, &cfg, 1, rollouts, 2024).expect("evaluation runs");

    println!(
        "workload {} over {rollouts} paired rollouts:",
        mode.as_str()
    );
    for r in &reports {
        println!(
            "  {:<10} mean {:>7.2}  ci [{:>7.2}, {:>7.2}]  mean episode length {:>6.1}",
            r.policy, r.mean, r.ci_low, r.ci_high, r.mean_episode_len
        );
    }
    println!("\nsummary CSV:\n{}", summary_csv(&reports));
}
