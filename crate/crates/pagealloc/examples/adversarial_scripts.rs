//! Generate adversarial workload scripts and verify them against the three
//! baselines.
//!
//! ```bash
//! cargo run -p pagealloc --example adversarial_scripts -- [page_size] [seed]
//! ```

use pagealloc::fit::FitKind;
use pagealloc::workload::{make_bf_good, make_wf_good, verify_adversarial};

fn main() {
    let mut args = std::env::args().skip(1);
    let page_size: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(42);

    for (name, script) in [
        (
            "bf_good",
            make_bf_good(page_size, seed).expect("page large enough"),
        ),
        (
            "wf_good",
            make_wf_good(page_size, seed).expect("page large enough"),
        ),
    ] {
        println!("=== {name} script (page {page_size}, seed {seed}) ===");
        print!("{}", script.to_text());
        let report = verify_adversarial(&script).expect("well-formed script");
        for kind in FitKind::BASELINES {
            let outcome = report.outcome(kind);
            match outcome.first_failure {
                None => println!(
                    "{}: satisfied all {} allocations",
                    kind.name(),
                    outcome.satisfied
                ),
                Some(ord) => println!("{}: failed at allocation #{ord}", kind.name()),
            }
        }
        assert!(report.matches_label(script.label));
        println!();
    }
}
