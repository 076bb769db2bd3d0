//! Minimal dense network: forward pass, hand-derived backpropagation and an
//! Adam optimizer. Everything is `f64`; the architectures here are tiny and
//! the gradient checks want the precision.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NnError {
    #[error("input length {got} does not match the layer's input dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("cache does not match this network")]
    StaleCache,
    #[error("network needs at least one layer")]
    Empty,
}

/// One affine layer with an activation. Weights are row-major `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

/// A dense feed-forward network.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

/// Activations cached by a forward pass, consumed by `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer (post-activation of the previous one).
    inputs: Vec<Vec<f64>>,
    /// Pre-activation values of each layer.
    pre_activations: Vec<Vec<f64>>,
}

/// Parameter gradients, shape-congruent with the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weights: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.weights.len()])
                .collect(),
            biases: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.biases.len()])
                .collect(),
            input: vec![0.0; net.layers[0].in_dim],
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for x in layer {
                *x *= factor;
            }
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .flat_map(|layer| layer.iter())
            .map(|g| g * g)
            .sum()
    }
}

/// Scale gradient sets so their joint global norm stays within `max_norm`.
pub fn clip_global_norm(grads: &mut [&mut Gradients], max_norm: f64) {
    let norm = grads.iter().map(|g| g.squared_norm()).sum::<f64>().sqrt();
    if norm > max_norm {
        let factor = max_norm / norm;
        for g in grads {
            g.scale(factor);
        }
    }
}

impl DenseNet {
    /// Build a network from layer dimensions, e.g. `[267, 32, 32, 3]` with
    /// one activation per layer. Weights draw uniformly from
    /// `±sqrt(6 / (fan_in + fan_out))`, biases start at zero.
    pub fn init(dims: &[usize], activations: &[Activation], rng: &mut ChaCha8Rng) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        assert_eq!(
            activations.len(),
            dims.len() - 1,
            "one activation per layer"
        );
        let layers = dims
            .windows(2)
            .zip(activations)
            .map(|(pair, &activation)| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..=bound))
                    .collect();
                Layer {
                    in_dim: fan_in,
                    out_dim: fan_out,
                    weights,
                    biases: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        Self { layers }
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, NnError> {
        if layers.is_empty() {
            return Err(NnError::Empty);
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(NnError::DimensionMismatch {
                    got: pair[1].in_dim,
                    want: pair[0].out_dim,
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].in_dim];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub fn activations(&self) -> Vec<Activation> {
        self.layers.iter().map(|l| l.activation).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Forward pass returning the output and the cache for `backward`.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache), NnError> {
        if input.len() != self.input_dim() {
            return Err(NnError::DimensionMismatch {
                got: input.len(),
                want: self.input_dim(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut current = input.to_vec();
        for layer in &self.layers {
            let mut z = layer.biases.clone();
            for (row, z_row) in z.iter_mut().enumerate() {
                let w = &layer.weights[row * layer.in_dim..(row + 1) * layer.in_dim];
                let mut acc = 0.0;
                for (wi, xi) in w.iter().zip(&current) {
                    acc += wi * xi;
                }
                *z_row += acc;
            }
            let activated: Vec<f64> = z.iter().map(|&v| layer.activation.apply(v)).collect();
            inputs.push(std::mem::replace(&mut current, activated));
            pre_activations.push(z);
        }
        Ok((
            current,
            ForwardCache {
                inputs,
                pre_activations,
            },
        ))
    }

    /// Output without a cache.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        self.forward(input).map(|(out, _)| out)
    }

    /// Exact reverse-mode gradients of the scalar loss whose gradient with
    /// respect to the network output is `output_grad`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
    ) -> Result<Gradients, NnError> {
        if cache.inputs.len() != self.layers.len() || output_grad.len() != self.output_dim() {
            return Err(NnError::StaleCache);
        }
        let mut grads = Gradients::zeros_like(self);
        let mut upstream = output_grad.to_vec();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let z = &cache.pre_activations[idx];
            let x = &cache.inputs[idx];
            if z.len() != layer.out_dim || x.len() != layer.in_dim {
                return Err(NnError::StaleCache);
            }
            let dz: Vec<f64> = upstream
                .iter()
                .zip(z)
                .map(|(&g, &zv)| g * layer.activation.derivative(zv))
                .collect();
            let dw = &mut grads.weights[idx];
            for (row, &dz_row) in dz.iter().enumerate() {
                let offset = row * layer.in_dim;
                for (col, &xv) in x.iter().enumerate() {
                    dw[offset + col] = dz_row * xv;
                }
            }
            grads.biases[idx].copy_from_slice(&dz);
            let mut downstream = vec![0.0; layer.in_dim];
            for (row, &dz_row) in dz.iter().enumerate() {
                let w = &layer.weights[row * layer.in_dim..(row + 1) * layer.in_dim];
                for (col, &wv) in w.iter().enumerate() {
                    downstream[col] += wv * dz_row;
                }
            }
            upstream = downstream;
        }
        grads.input = upstream;
        Ok(grads)
    }
}

/// Adam optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_biases: Vec<Vec<f64>>,
    v_biases: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(net: &DenseNet, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m_weights: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.weights.len()])
                .collect(),
            v_weights: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.weights.len()])
                .collect(),
            m_biases: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.biases.len()])
                .collect(),
            v_biases: net
                .layers
                .iter()
                .map(|l| vec![0.0; l.biases.len()])
                .collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One Adam update with bias correction.
    pub fn step(&mut self, net: &mut DenseNet, grads: &Gradients) {
        self.step += 1;
        let t = self.step as f64;
        let bias1 = 1.0 - self.beta1.powf(t);
        let bias2 = 1.0 - self.beta2.powf(t);
        for (idx, layer) in net.layers.iter_mut().enumerate() {
            Self::update_slice(
                &mut layer.weights,
                &grads.weights[idx],
                &mut self.m_weights[idx],
                &mut self.v_weights[idx],
                self.learning_rate,
                self.beta1,
                self.beta2,
                self.epsilon,
                bias1,
                bias2,
            );
            Self::update_slice(
                &mut layer.biases,
                &grads.biases[idx],
                &mut self.m_biases[idx],
                &mut self.v_biases[idx],
                self.learning_rate,
                self.beta1,
                self.beta2,
                self.epsilon,
                bias1,
                bias2,
            );
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn update_slice(
        params: &mut [f64],
        grads: &[f64],
        m: &mut [f64],
        v: &mut [f64],
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        bias1: f64,
        bias2: f64,
    ) {
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
