//! DQN with a replay buffer and a hard-synced target network.

use rand::Rng;

use crate::env::{ActionMode, Env};
use crate::nn::{Activation, Adam, DenseNet, Gradients};
use crate::seeding;

use super::replay::{ReplayBuffer, Transition};
use super::{argmax, AgentError, Behavior, EpisodeTracker, Policy, TrainConfig, TrainLog};

/// Hidden layout of the Q-network.
const HIDDEN: [usize; 2] = [32, 32];

/// Derivative of the Huber loss (delta = 1) with respect to the error.
fn huber_grad(error: f64) -> f64 {
    error.clamp(-1.0, 1.0)
}

/// Train a DQN policy. High-level actions only: epsilon-greedy acting, every
/// `train_freq` steps one minibatch descent on the Huber TD error against
/// the frozen target network, hard target sync at the configured interval.
pub fn dqn_train(env: &mut Env, cfg: &TrainConfig) -> Result<(Policy, TrainLog), AgentError> {
    cfg.validate().map_err(AgentError::Config)?;
    if env.config().action_mode != ActionMode::HighLevel {
        return Err(AgentError::WrongActionMode {
            agent: "dqn",
            mode: "high_level",
        });
    }
    let obs_len = env.config().observation_len();
    let mut rng = seeding::rng(cfg.seed, seeding::STREAM_AGENT);
    let dims = [obs_len, HIDDEN[0], HIDDEN[1], 3];
    let activations = [Activation::Relu, Activation::Relu, Activation::Identity];
    let mut net = DenseNet::init(&dims, &activations, &mut rng);
    // Near-zero initial Q-values: argmax starts unbiased and the first
    // target syncs do not chase init noise.
    if let Some(head) = net.layers_mut().last_mut() {
        for w in &mut head.weights {
            *w *= 0.01;
        }
    }
    let mut target = net.clone();
    let mut adam = Adam::new(&net, cfg.learning_rate);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut tracker = EpisodeTracker::new();
    let mut episode = 0u64;

    let mut obs = env
        .reset(seeding::episode_seed(cfg.seed, episode))
        .to_scaled_vec();
    for step in 0..cfg.total_timesteps {
        if env.is_done() {
            tracker.finish_episode();
            episode += 1;
            obs = env
                .reset(seeding::episode_seed(cfg.seed, episode))
                .to_scaled_vec();
        }
        let epsilon = cfg.epsilon_at(step);
        let action = if step < cfg.warmup_steps || rng.random::<f64>() < epsilon {
            rng.random_range(0..3)
        } else {
            let q = net.predict(&obs).expect("obs length fixed per config");
            argmax(&q)
        };
        let result = env
            .step_high(action)
            .expect("action in range, episode live");
        tracker.record(result.reward);
        let next_obs = result.observation.to_scaled_vec();
        buffer.push(Transition {
            obs: std::mem::replace(&mut obs, next_obs.clone()),
            action,
            reward: result.reward,
            next_obs,
            terminated: result.terminated,
        });

        if step >= cfg.warmup_steps && step % cfg.train_freq == 0 && buffer.len() >= cfg.batch_size
        {
            let indices = buffer.sample_indices(&mut rng, cfg.batch_size);
            let mut grads = Gradients::zeros_like(&net);
            let inv_batch = 1.0 / cfg.batch_size as f64;
            for i in indices {
                let t = buffer.get(i);
                let target_q = if t.terminated {
                    t.reward
                } else {
                    let next_q = target.predict(&t.next_obs).expect("shape fixed");
                    t.reward + cfg.discount * next_q[argmax(&next_q)]
                };
                let (q, cache) = net.forward(&t.obs).expect("shape fixed");
                let error = q[t.action] - target_q;
                let mut out_grad = vec![0.0; 3];
                out_grad[t.action] = huber_grad(error) * inv_batch;
                let g = net.backward(&cache, &out_grad).expect("matching cache");
                grads.accumulate(&g);
            }
            adam.step(&mut net, &grads);
        }

        if (step + 1) % cfg.target_sync_interval == 0 {
            target = net.clone();
        }
    }

    let policy = Policy {
        behavior: Behavior::Dqn { net, target },
        action_mode: ActionMode::HighLevel,
        epsilon: 0.0,
    };
    Ok((policy, tracker.log))
}
