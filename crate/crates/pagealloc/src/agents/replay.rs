//! Uniform replay buffer for DQN.

use rand_chacha::ChaCha8Rng;

/// One stored transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    /// True terminal only; timeouts are not stored as terminal.
    pub terminated: bool,
}

/// Fixed-capacity ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    data: Vec<Transition>,
    insert_pos: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        Self {
            capacity,
            data: Vec::with_capacity(capacity.min(4096)),
            insert_pos: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, transition: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(transition);
        } else {
            self.data[self.insert_pos] = transition;
            self.insert_pos = (self.insert_pos + 1) % self.capacity;
        }
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.data[index]
    }

    /// Uniform sample of `batch` distinct indices.
    pub fn sample_indices(&self, rng: &mut ChaCha8Rng, batch: usize) -> Vec<usize> {
        assert!(batch <= self.data.len(), "batch larger than buffer");
        rand::seq::index::sample(rng, self.data.len(), batch).into_vec()
    }
}
