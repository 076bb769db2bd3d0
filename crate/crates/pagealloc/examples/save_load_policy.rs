//! Checkpoint round trip: train a small policy, save it as a text artifact,
//! load it back and confirm identical behaviour.
//!
//! ```bash
//! cargo run --release -p pagealloc --example save_load_policy
//! ```

use pagealloc::agents::{linear_q_train, AgentKind, AgentView, TrainConfig};
use pagealloc::cli::PolicyArtifact;
use pagealloc::env::{Env, EnvConfig};
use pagealloc::seeding;

fn main() {
    let mut cfg = EnvConfig::new(10);
    cfg.workload.size_range = (1, 4);
    let mut train = TrainConfig::for_agent(AgentKind::LinearQ, 2_000);
    train.seed = 5;

    let mut env = Env::new(cfg.clone()).unwrap();
    let (policy, _) = linear_q_train(&mut env, &train).unwrap();

    let artifact = PolicyArtifact {
        policy,
        page_size: cfg.page_size,
        history_len: cfg.history_len,
        train: Some(train),
        train_seed: 5,
    };
    let dir = std::env::temp_dir().join("pagealloc_example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("linear.policy");
    artifact.save(&path).unwrap();
    println!("saved checkpoint to {}", path.display());

    let loaded = PolicyArtifact::load(&path).unwrap();
    // Loading then re-serializing is byte-identical.
    assert_eq!(loaded.to_text(), artifact.to_text());

    // And the loaded policy acts identically.
    let mut rng = seeding::rng(0, 0);
    let mut env = Env::new(cfg).unwrap();
    let obs = env.reset(99);
    let view = AgentView::new(&obs, env.page());
    let a = artifact.policy.act(view, false, &mut rng).unwrap();
    let b = loaded.policy.act(view, false, &mut rng).unwrap();
    assert_eq!(a, b);
    println!("loaded policy picks the same action ({a}) on the same observation");
}
