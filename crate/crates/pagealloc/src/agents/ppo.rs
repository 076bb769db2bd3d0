//! PPO with a clipped surrogate objective, GAE advantages and separate
//! actor/critic networks, for the low-level placement action space.

use rand::seq::SliceRandom;

use crate::env::{ActionMode, Env};
use crate::nn::{clip_global_norm, Activation, Adam, DenseNet, Gradients};
use crate::seeding;

use super::rollout::{normalize, Boundary, RolloutBuffer};
use super::{
    log_softmax, sample_categorical, AgentError, Behavior, EpisodeTracker, Policy, TrainConfig,
    TrainLog,
};

/// Hidden layout of both actor and critic.
const HIDDEN: [usize; 2] = [64, 64];

/// The clipped surrogate objective for one sample. With a ratio of exactly 1
/// this reduces to the advantage itself.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    unclipped.min(clipped)
}

fn scale_output_head(net: &mut DenseNet, factor: f64) {
    if let Some(last) = net.layers_mut().last_mut() {
        for w in &mut last.weights {
            *w *= factor;
        }
    }
}

/// Train a PPO policy on a low-level environment: fixed-horizon rollouts,
/// GAE(lambda), then `ppo_epochs` passes of minibatch updates ascending the
/// clipped surrogate, descending the value loss, plus an optional entropy
/// bonus.
pub fn ppo_train(env: &mut Env, cfg: &TrainConfig) -> Result<(Policy, TrainLog), AgentError> {
    cfg.validate().map_err(AgentError::Config)?;
    if env.config().action_mode != ActionMode::LowLevel {
        return Err(AgentError::WrongActionMode {
            agent: "ppo",
            mode: "low_level",
        });
    }
    let obs_len = env.config().observation_len();
    let n_actions = env.config().page_size;
    let mut rng = seeding::rng(cfg.seed, seeding::STREAM_AGENT);
    let acts = [Activation::Tanh, Activation::Tanh, Activation::Identity];
    let mut actor = DenseNet::init(&[obs_len, HIDDEN[0], HIDDEN[1], n_actions], &acts, &mut rng);
    scale_output_head(&mut actor, 0.01); // near-uniform initial policy
    let mut critic = DenseNet::init(&[obs_len, HIDDEN[0], HIDDEN[1], 1], &acts, &mut rng);
    let mut adam_actor = Adam::new(&actor, cfg.ppo_learning_rate);
    let mut adam_critic = Adam::new(&critic, cfg.ppo_learning_rate);
    adam_actor.epsilon = 1e-5;
    adam_critic.epsilon = 1e-5;

    let mut tracker = EpisodeTracker::new();
    let mut episode = 0u64;
    let mut obs = env
        .reset(seeding::episode_seed(cfg.seed, episode))
        .to_scaled_vec();
    let mut buffer = RolloutBuffer::with_capacity(cfg.ppo_horizon);
    let mut steps_done = 0usize;

    while steps_done < cfg.total_timesteps {
        // Linear learning-rate anneal over the run, the usual PPO stabilizer.
        let remaining = 1.0 - steps_done as f64 / cfg.total_timesteps as f64;
        adam_actor.learning_rate = cfg.ppo_learning_rate * remaining;
        adam_critic.learning_rate = cfg.ppo_learning_rate * remaining;
        buffer.clear();
        let horizon = cfg.ppo_horizon.min(cfg.total_timesteps - steps_done);
        for _ in 0..horizon {
            if env.is_done() {
                tracker.finish_episode();
                episode += 1;
                obs = env
                    .reset(seeding::episode_seed(cfg.seed, episode))
                    .to_scaled_vec();
            }
            let logits = actor.predict(&obs).expect("obs length fixed per config");
            let log_probs = log_softmax(&logits);
            let action = sample_categorical(&log_probs, &mut rng);
            let value = critic.predict(&obs).expect("obs length fixed")[0];
            let result = env.step_low(action).expect("action in range, episode live");
            tracker.record(result.reward);
            let next_obs = result.observation.to_scaled_vec();
            let boundary = if result.terminated {
                Boundary::Terminated
            } else if result.truncated {
                Boundary::Truncated {
                    bootstrap_value: critic.predict(&next_obs).expect("shape fixed")[0],
                }
            } else {
                Boundary::Continue
            };
            buffer.push(
                std::mem::replace(&mut obs, next_obs),
                action,
                log_probs[action],
                result.reward,
                value,
                boundary,
            );
            steps_done += 1;
        }
        let final_value = if env.is_done() {
            0.0
        } else {
            critic.predict(&obs).expect("shape fixed")[0]
        };
        let (advantages, returns) = buffer.compute_gae(cfg.discount, cfg.gae_lambda, final_value);

        let mut order: Vec<usize> = (0..buffer.len()).collect();
        for _ in 0..cfg.ppo_epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.ppo_batch_size) {
                let raw: Vec<f64> = chunk.iter().map(|&i| advantages[i]).collect();
                let adv = normalize(&raw);
                let mut actor_grads = Gradients::zeros_like(&actor);
                let mut critic_grads = Gradients::zeros_like(&critic);
                let inv = 1.0 / chunk.len() as f64;
                for (j, &i) in chunk.iter().enumerate() {
                    let x = &buffer.observations[i];
                    let (logits, cache) = actor.forward(x).expect("shape fixed");
                    let log_probs = log_softmax(&logits);
                    let a = buffer.actions[i];
                    let ratio = (log_probs[a] - buffer.log_probs[i]).exp();
                    let unclipped = ratio * adv[j];
                    let clipped = ratio.clamp(1.0 - cfg.ppo_clip, 1.0 + cfg.ppo_clip) * adv[j];
                    // loss = -min(unclipped, clipped); gradient flows only
                    // through the active unclipped branch.
                    let grad_lp = if unclipped <= clipped {
                        -adv[j] * ratio
                    } else {
                        0.0
                    };
                    let probs: Vec<f64> = log_probs.iter().map(|l| l.exp()).collect();
                    let mut dlogits: Vec<f64> = probs.iter().map(|&p| -grad_lp * p).collect();
                    dlogits[a] += grad_lp;
                    if cfg.entropy_coef != 0.0 {
                        let entropy: f64 = -probs
                            .iter()
                            .zip(&log_probs)
                            .map(|(p, l)| p * l)
                            .sum::<f64>();
                        for (k, d) in dlogits.iter_mut().enumerate() {
                            *d += cfg.entropy_coef * probs[k] * (log_probs[k] + entropy);
                        }
                    }
                    for d in &mut dlogits {
                        *d *= inv;
                    }
                    actor_grads.accumulate(&actor.backward(&cache, &dlogits).expect("cache"));

                    let (v, vcache) = critic.forward(x).expect("shape fixed");
                    let dv = cfg.value_coef * 2.0 * (v[0] - returns[i]) * inv;
                    critic_grads.accumulate(&critic.backward(&vcache, &[dv]).expect("cache"));
                }
                clip_global_norm(&mut [&mut actor_grads, &mut critic_grads], 0.5);
                adam_actor.step(&mut actor, &actor_grads);
                adam_critic.step(&mut critic, &critic_grads);
            }
        }
    }

    let policy = Policy {
        behavior: Behavior::Ppo { actor, critic },
        action_mode: ActionMode::LowLevel,
        epsilon: 0.0,
    };
    Ok((policy, tracker.log))
}
