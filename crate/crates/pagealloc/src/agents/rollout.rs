//! Fixed-horizon rollout storage and generalized advantage estimation.

/// How a step related to the episode boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// The episode continued.
    Continue,
    /// True terminal state: no bootstrap.
    Terminated,
    /// Step-budget timeout: bootstrap with the value of the next state.
    Truncated { bootstrap_value: f64 },
}

/// On-policy rollout buffer for PPO.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub boundaries: Vec<Boundary>,
}

impl RolloutBuffer {
    pub fn with_capacity(horizon: usize) -> Self {
        Self {
            observations: Vec::with_capacity(horizon),
            actions: Vec::with_capacity(horizon),
            log_probs: Vec::with_capacity(horizon),
            rewards: Vec::with_capacity(horizon),
            values: Vec::with_capacity(horizon),
            boundaries: Vec::with_capacity(horizon),
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn clear(&mut self) {
        self.observations.clear();
        self.actions.clear();
        self.log_probs.clear();
        self.rewards.clear();
        self.values.clear();
        self.boundaries.clear();
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        obs: Vec<f64>,
        action: usize,
        log_prob: f64,
        reward: f64,
        value: f64,
        boundary: Boundary,
    ) {
        self.observations.push(obs);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.rewards.push(reward);
        self.values.push(value);
        self.boundaries.push(boundary);
    }

    /// GAE(lambda) advantages and value targets. `final_value` is the critic
    /// estimate for the state after the last stored step, used when the
    /// rollout was cut mid-episode.
    pub fn compute_gae(&self, gamma: f64, lambda: f64, final_value: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut advantages = vec![0.0; n];
        let mut last_gae = 0.0;
        for t in (0..n).rev() {
            let (next_value, continuing) = match self.boundaries[t] {
                Boundary::Terminated => (0.0, 0.0),
                Boundary::Truncated { bootstrap_value } => (bootstrap_value, 0.0),
                Boundary::Continue => {
                    if t + 1 == n {
                        (final_value, 1.0)
                    } else {
                        (self.values[t + 1], 1.0)
                    }
                }
            };
            let delta = self.rewards[t] + gamma * next_value - self.values[t];
            last_gae = delta + gamma * lambda * continuing * last_gae;
            advantages[t] = last_gae;
        }
        let returns = advantages
            .iter()
            .zip(&self.values)
            .map(|(a, v)| a + v)
            .collect();
        (advantages, returns)
    }
}

/// Normalize to zero mean and unit variance (sample std). Used per update
/// minibatch.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    if values.len() < 2 {
        return values.to_vec();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    values.iter().map(|v| (v - mean) / (std + 1e-8)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gae_with_lambda_one_gamma_one_is_return_minus_value() {
        // Hand-built 3-step episode ending in a true terminal.
        let mut buf = RolloutBuffer::with_capacity(3);
        let rewards = [1.0, -2.0, 3.0];
        let values = [0.5, 0.25, -0.5];
        for t in 0..3 {
            let boundary = if t == 2 {
                Boundary::Terminated
            } else {
                Boundary::Continue
            };
            buf.push(vec![0.0], 0, 0.0, rewards[t], values[t], boundary);
        }
        let (adv, ret) = buf.compute_gae(1.0, 1.0, 999.0);
        // Undiscounted returns-to-go: 2.0, 1.0, 3.0
        assert!((adv[0] - (2.0 - 0.5)).abs() < 1e-12);
        assert!((adv[1] - (1.0 - 0.25)).abs() < 1e-12);
        assert!((adv[2] - (3.0 + 0.5)).abs() < 1e-12);
        for t in 0..3 {
            assert!((ret[t] - (adv[t] + values[t])).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_bootstraps_and_cuts_the_chain() {
        let mut buf = RolloutBuffer::with_capacity(2);
        buf.push(vec![0.0], 0, 0.0, 1.0, 0.0, Boundary::Continue);
        buf.push(
            vec![0.0],
            0,
            0.0,
            1.0,
            0.0,
            Boundary::Truncated {
                bootstrap_value: 5.0,
            },
        );
        let (adv, _) = buf.compute_gae(1.0, 1.0, 777.0);
        // Step 1: delta = 1 + 5 - 0 = 6, chain cut afterwards.
        assert!((adv[1] - 6.0).abs() < 1e-12);
        // Step 0 chains through: delta0 = 1 + v1 - v0 = 1; adv = 1 + adv1 = 7.
        assert!((adv[0] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_zero_mean_unit_variance() {
        let v = normalize(&[1.0, 2.0, 3.0, 4.0, 5.0, 9.0]);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() - 1) as f64;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-6);
    }
}
