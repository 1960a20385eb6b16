//! Feed-forward network over acoustic features: ReLU hidden layers with
//! inverted dropout, a sigmoid output unit, binary cross-entropy loss.

use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dropout_mask, glorot_uniform, he_uniform, Adam, Mode};
use crate::linear::{FeatureMatrix, ModelError};
use crate::math;

/// Fully connected network; parameters live in one flat vector laid out
/// layer by layer as weights (out x in, row-major) then biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// Layer widths, input first, final entry 1.
    pub sizes: Vec<usize>,
    pub dropout: f64,
    pub theta: Vec<f64>,
    pub init_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpTrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpTrainConfig {
    fn default() -> Self {
        MlpTrainConfig { batch_size: 50, epochs: 200, seed: 0 }
    }
}

/// The published hidden-layer layout for a given input width.
pub fn paper_sizes(input_dim: usize) -> Vec<usize> {
    vec![input_dim, 150, 75, 1]
}

impl Mlp {
    pub fn param_count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|pair| pair[0] * pair[1] + pair[1]).sum()
    }

    /// Seeded initialization: He-uniform hidden layers, Glorot-uniform
    /// output layer, zero biases.
    pub fn init(sizes: Vec<usize>, dropout: f64, seed: u64) -> Result<Self, ModelError> {
        if sizes.len() < 2 {
            return Err(ModelError::InvalidParameter("need input and output layers".into()));
        }
        if *sizes.last().unwrap() != 1 {
            return Err(ModelError::InvalidParameter("output layer must hold one unit".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(ModelError::InvalidParameter("layer widths must be positive".into()));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(ModelError::InvalidParameter("dropout must lie in [0, 1)".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut theta = vec![0.0; Self::param_count(&sizes)];
        let layers = sizes.len() - 1;
        let mut offset = 0;
        for l in 0..layers {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let weights = &mut theta[offset..offset + fan_in * fan_out];
            if l + 1 == layers {
                glorot_uniform(&mut rng, weights, fan_in, fan_out);
            } else {
                he_uniform(&mut rng, weights, fan_in);
            }
            offset += fan_in * fan_out + fan_out; // biases stay zero
        }
        Ok(Mlp { sizes, dropout, theta, init_seed: seed })
    }

    fn layer_offsets(&self, layer: usize) -> (usize, usize) {
        let mut offset = 0;
        for l in 0..layer {
            offset += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }
        let weight_len = self.sizes[layer] * self.sizes[layer + 1];
        (offset, offset + weight_len)
    }

    fn hidden_layers(&self) -> usize {
        self.sizes.len() - 2
    }

    /// One inverted-dropout mask per hidden layer.
    pub fn sample_masks(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        (0..self.hidden_layers()).map(|l| dropout_mask(rng, self.sizes[l + 1], self.dropout)).collect()
    }

    /// Post-activation values per layer plus the output logit.
    fn forward_cached(&self, x: &[f64], masks: Option<&[Vec<f64>]>) -> (Vec<Vec<f64>>, f64) {
        let layers = self.sizes.len() - 1;
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(layers);
        let mut current: &[f64] = x;
        let mut logit = 0.0;
        for l in 0..layers {
            let (w_off, b_off) = self.layer_offsets(l);
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let mut next = vec![0.0; fan_out];
            for j in 0..fan_out {
                let row = &self.theta[w_off + j * fan_in..w_off + (j + 1) * fan_in];
                let mut acc = self.theta[b_off + j];
                for (w, v) in row.iter().zip(current.iter()) {
                    acc += w * v;
                }
                next[j] = acc;
            }
            if l + 1 == layers {
                logit = next[0];
            } else {
                for v in next.iter_mut() {
                    *v = v.max(0.0);
                }
                if let Some(masks) = masks {
                    for (v, m) in next.iter_mut().zip(masks[l].iter()) {
                        *v *= m;
                    }
                }
            }
            activations.push(next);
            current = activations.last().unwrap();
        }
        (activations, logit)
    }

    /// P(good | x). Training mode draws fresh dropout masks.
    pub fn forward(&self, x: &[f64], mode: Mode) -> f64 {
        let logit = match mode {
            Mode::Infer => self.forward_cached(x, None).1,
            Mode::Train { rng } => {
                let masks = self.sample_masks(rng);
                self.forward_cached(x, Some(&masks)).1
            }
        };
        math::sigmoid(logit)
    }

    /// Deterministic inference-mode probability.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.forward(x, Mode::Infer)
    }

    /// BCE loss and the full flat gradient for one sample under the given
    /// masks (None = inference path). Public so gradient calculations can
    /// be verified against finite differences from outside the crate.
    pub fn loss_and_gradient(
        &self,
        x: &[f64],
        label: u8,
        masks: Option<&[Vec<f64>]>,
    ) -> (f64, Vec<f64>) {
        let (activations, logit) = self.forward_cached(x, masks);
        let target = label as f64;
        let loss = math::softplus(logit) - target * logit;

        let layers = self.sizes.len() - 1;
        let mut grad = vec![0.0; self.theta.len()];

        // delta starts as dL/dz of the sigmoid + BCE head.
        let mut delta = vec![math::sigmoid(logit) - target];
        for l in (0..layers).rev() {
            let (w_off, b_off) = self.layer_offsets(l);
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let input: &[f64] = if l == 0 { x } else { &activations[l - 1] };

            for j in 0..fan_out {
                let d = delta[j];
                grad[b_off + j] += d;
                let row = &mut grad[w_off + j * fan_in..w_off + (j + 1) * fan_in];
                for (g, v) in row.iter_mut().zip(input.iter()) {
                    *g += d * v;
                }
            }

            if l > 0 {
                let mut prev_delta = vec![0.0; fan_in];
                for j in 0..fan_out {
                    let d = delta[j];
                    let row = &self.theta[w_off + j * fan_in..w_off + (j + 1) * fan_in];
                    for (p, w) in prev_delta.iter_mut().zip(row.iter()) {
                        *p += d * w;
                    }
                }
                // Through the previous layer's dropout mask and ReLU gate.
                let post = &activations[l - 1];
                for (i, p) in prev_delta.iter_mut().enumerate() {
                    if let Some(masks) = masks {
                        *p *= masks[l - 1][i];
                    }
                    if post[i] <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev_delta;
            }
        }
        (loss, grad)
    }

    /// Minibatch Adam training with seeded per-epoch shuffling and
    /// per-sample dropout masks. Returns the per-epoch mean training
    /// loss trace.
    pub fn train(
        &mut self,
        x: &FeatureMatrix,
        labels: &[u8],
        config: &MlpTrainConfig,
    ) -> Result<Vec<f64>, ModelError> {
        if x.rows != labels.len() {
            return Err(ModelError::ShapeMismatch("one label per row required".into()));
        }
        if x.cols != self.sizes[0] {
            return Err(ModelError::ShapeMismatch(alloc::format!(
                "matrix has {} columns, network expects {}",
                x.cols,
                self.sizes[0]
            )));
        }
        if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l == 1) {
            return Err(ModelError::SingleClass);
        }
        if config.batch_size == 0 || config.epochs == 0 {
            return Err(ModelError::InvalidParameter("batch_size and epochs must be positive".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut adam = Adam::new(self.theta.len());
        let mut order: Vec<usize> = (0..x.rows).collect();
        let mut trace = Vec::with_capacity(config.epochs);

        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(config.batch_size) {
                let mut grad_sum = vec![0.0; self.theta.len()];
                let mut batch_loss = 0.0;
                for &i in batch {
                    let masks = self.sample_masks(&mut rng);
                    let (loss, grad) = self.loss_and_gradient(x.row(i), labels[i], Some(&masks));
                    batch_loss += loss;
                    for (s, g) in grad_sum.iter_mut().zip(grad.iter()) {
                        *s += g;
                    }
                }
                let scale = 1.0 / batch.len() as f64;
                for g in grad_sum.iter_mut() {
                    *g *= scale;
                }
                adam.step(&mut self.theta, &grad_sum);
                epoch_loss += batch_loss;
            }
            trace.push(epoch_loss / x.rows as f64);
        }
        Ok(trace)
    }
}
