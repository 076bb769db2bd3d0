//! Single-page dynamic memory allocation as a reinforcement-learning
//! benchmark.
//!
//! One episode manages one fixed-size page. A workload generator streams
//! allocation requests (with frees landing in between), and a policy decides
//! where each one goes — either by naming a fit heuristic (high-level
//! actions) or an exact start cell (low-level actions). Valid placements
//! earn +0.1, invalid ones cost -10, and the episode ends once the pending
//! request no longer fits in any free run. The crate ships the page model,
//! the first/best/worst/next-fit baselines, verified adversarial workload
//! generators (`bf_good`, `wf_good`) plus a mixed regime, linear Q-learning,
//! DQN and PPO learners built on an internal dense-network core, and an
//! evaluation harness with paired-seed rollout batteries and 95% confidence
//! intervals.
//!
//! ## Examples
//!
//! The `examples/` directory is the guided tour; each file is runnable on
//! its own:
//!
//! - **`page_basics`** — page state, free-run scans, the debug dump format
//! - **`fit_comparison`** — how the four fit heuristics differ on one page
//! - **`random_workload`** — stepping an episode against the random workload
//! - **`adversarial_scripts`** — generating and verifying bf/wf-good scripts
//! - **`evaluate_baselines`** — rollout batteries, confidence intervals, CSV
//! - **`train_linear_q`** — linear Q-learning on adversarial workloads
//! - **`train_dqn`** — DQN vs the baselines on bf/wf-good and mixed streams
//! - **`train_ppo`** — low-level placement with PPO on a small page
//! - **`history_sweep`** — the request-history-length ablation
//! - **`save_load_policy`** — checkpoint artifacts and byte-exact round trips
//!
//! ```bash
//! cargo run -p pagealloc --example page_basics
//! cargo run --release -p pagealloc --example train_dqn -- 50000 wf_good
//! ```
//!
//! Training examples want `--release`.
//!
//! ## Module map
//!
//! | module | provides |
//! |--------|----------|
//! | [`page`] | bitmap + block-table page state and its invariants |
//! | [`fit`] | first/best/worst/next-fit placement policies |
//! | [`workload`] | request scripts, adversarial generators, request streams |
//! | [`mod@env`] | the episodic environment: reset/step, rewards, termination |
//! | [`features`] | the 9-feature page summary for the linear agent |
//! | [`nn`] | dense nets, backprop, Adam — no external ML dependency |
//! | [`agents`] | policies and the three trainers |
//! | [`eval`] | rollout batteries, confidence intervals, comparisons |
//! | [`cli`] | run configs, checkpoints, and the subcommand implementations |
//! | [`seeding`] | the master-seed splitting scheme |
//!
//! The `pagealloc` binary wraps [`cli`] with `train`, `eval`, `gen-workload`,
//! `inspect` and `sweep` subcommands; see the README for the file formats.

pub mod agents;
pub mod cli;
pub mod env;
pub mod eval;
pub mod features;
pub mod fit;
pub mod nn;
pub mod page;
pub mod seeding;
pub mod workload;
