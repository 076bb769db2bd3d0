//! Step through one episode of the random workload with a fixed policy,
//! showing observations, rewards, interleaved frees and termination.
//!
//! ```bash
//! cargo run -p pagealloc --example random_workload -- [seed]
//! ```

use pagealloc::agents::{AgentView, Policy};
use pagealloc::env::{Env, EnvConfig};
use pagealloc::fit::FitKind;
use pagealloc::seeding;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3);

    let mut cfg = EnvConfig::new(10);
    cfg.workload.size_range = (1, 4);
    let mut env = Env::new(cfg).expect("valid config");
    let policy = Policy::fixed_fit(FitKind::First, env.config().action_mode).unwrap();
    let mut rng = seeding::rng(seed, 0);

    let mut obs = env.reset(seed);
    let mut total = 0.0;
    println!("step | bitmap     | req | action | reward | frees");
    loop {
        let bitmap: String = obs
            .bitmap
            .iter()
            .map(|&c| if c { '1' } else { '0' })
            .collect();
        let action = policy
            .act(AgentView::new(&obs, env.page()), false, &mut rng)
            .unwrap();
        let result = env.step(action).unwrap();
        total += result.reward;
        println!(
            "{:>4} | {} |  {}  | {:>6} | {:>6} | {}",
            env.steps(),
            bitmap,
            obs.request_size,
            action,
            result.reward,
            result.info.frees_applied
        );
        obs = result.observation;
        if result.terminated {
            println!(
                "episode terminated: request {} exceeds the largest free run ({})",
                obs.request_size,
                env.page().largest_free()
            );
            break;
        }
        if result.truncated {
            println!("episode truncated at the step budget");
            break;
        }
    }
    println!("return = {total:.1}");
}
