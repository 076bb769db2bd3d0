//! Linear Q-learning over the hand-crafted page features.

use rand::Rng;

use crate::env::{ActionMode, Env};
use crate::features::{extract_features, FeatureVector};
use crate::page::PageState;
use crate::seeding;

use super::{argmax, AgentError, Behavior, EpisodeTracker, Policy, TrainConfig, TrainLog};

/// The nine page features plus the scaled request size.
pub const LINEAR_INPUTS: usize = FeatureVector::LEN + 1;

/// Inputs for the linear agent: features of the page, then the pending
/// request size divided by the page size.
pub fn linear_features(page: &PageState, request_size: usize) -> Vec<f64> {
    let mut phi = extract_features(page).to_array().to_vec();
    phi.push(request_size as f64 / page.page_size() as f64);
    phi
}

/// One tabular-style TD(0) update on the weight row of the taken action:
/// `w_a += alpha * (target - w_a . phi) * phi`.
#[allow(clippy::too_many_arguments)]
pub fn linear_q_update(
    weights: &mut [Vec<f64>],
    phi: &[f64],
    action: usize,
    reward: f64,
    phi_next: &[f64],
    terminated: bool,
    alpha: f64,
    gamma: f64,
) {
    let target = if terminated {
        reward
    } else {
        let best_next = weights
            .iter()
            .map(|w| w.iter().zip(phi_next).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        reward + gamma * best_next
    };
    let q: f64 = weights[action].iter().zip(phi).map(|(a, b)| a * b).sum();
    let delta = target - q;
    for (w, &p) in weights[action].iter_mut().zip(phi) {
        *w += alpha * delta * p;
    }
}

/// Train a linear Q-learning policy with epsilon-greedy exploration.
/// High-level actions only.
pub fn linear_q_train(env: &mut Env, cfg: &TrainConfig) -> Result<(Policy, TrainLog), AgentError> {
    cfg.validate().map_err(AgentError::Config)?;
    if env.config().action_mode != ActionMode::HighLevel {
        return Err(AgentError::WrongActionMode {
            agent: "linear_q",
            mode: "high_level",
        });
    }
    let mut rng = seeding::rng(cfg.seed, seeding::STREAM_AGENT);
    let mut weights = vec![vec![0.0; LINEAR_INPUTS]; 3];
    let mut tracker = EpisodeTracker::new();
    let mut episode = 0u64;

    env.reset(seeding::episode_seed(cfg.seed, episode));
    for step in 0..cfg.total_timesteps {
        if env.is_done() {
            tracker.finish_episode();
            episode += 1;
            env.reset(seeding::episode_seed(cfg.seed, episode));
        }
        let phi = linear_features(env.page(), env.request());
        let epsilon = cfg.epsilon_at(step);
        let action = if rng.random::<f64>() < epsilon {
            rng.random_range(0..3)
        } else {
            let q: Vec<f64> = weights
                .iter()
                .map(|w| w.iter().zip(&phi).map(|(a, b)| a * b).sum())
                .collect();
            argmax(&q)
        };
        let result = env
            .step_high(action)
            .expect("action in range, episode live");
        tracker.record(result.reward);
        let phi_next = linear_features(env.page(), env.request());
        // Step size anneals to a tenth so the weights settle instead of
        // oscillating around the greedy decision boundary.
        let progress = step as f64 / cfg.total_timesteps as f64;
        let alpha = cfg.learning_rate * (1.0 - 0.9 * progress);
        linear_q_update(
            &mut weights,
            &phi,
            action,
            result.reward,
            &phi_next,
            result.terminated,
            alpha,
            cfg.discount,
        );
    }

    let policy = Policy {
        behavior: Behavior::LinearQ { weights },
        action_mode: ActionMode::HighLevel,
        epsilon: 0.0,
    };
    Ok((policy, tracker.log))
}
