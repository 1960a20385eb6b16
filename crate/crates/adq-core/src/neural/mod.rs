//! Neural models with hand-rolled backpropagation: a feed-forward MLP
//! over acoustic features and a 1-D convolutional network over log-CQT
//! spectrograms, both trained with [`adam::Adam`].

pub mod adam;
pub mod cnn;
pub mod mlp;

pub use adam::Adam;
pub use cnn::{cqt_patch_sample, Cnn, CnnConfig, CnnTrainConfig, ConvLayerSpec, SpectrogramPatch, PATCH_FRAMES};
pub use mlp::{Mlp, MlpTrainConfig};

use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::math;

/// Forward-pass mode: inference applies no dropout; training draws
/// inverted-dropout masks from the supplied stream.
pub enum Mode<'a> {
    Infer,
    Train { rng: &'a mut ChaCha8Rng },
}

/// He-uniform fill for a ReLU layer's weights.
pub(crate) fn he_uniform(rng: &mut ChaCha8Rng, slots: &mut [f64], fan_in: usize) {
    let limit = math::sqrt(6.0 / fan_in as f64);
    for slot in slots {
        *slot = rng.gen_range(-limit..limit);
    }
}

/// Glorot-uniform fill for an output layer's weights.
pub(crate) fn glorot_uniform(rng: &mut ChaCha8Rng, slots: &mut [f64], fan_in: usize, fan_out: usize) {
    let limit = math::sqrt(6.0 / (fan_in + fan_out) as f64);
    for slot in slots {
        *slot = rng.gen_range(-limit..limit);
    }
}

/// Inverted-dropout mask: kept units carry 1/(1-rate) so inference needs
/// no rescaling; rate 0 yields all ones.
pub(crate) fn dropout_mask(rng: &mut ChaCha8Rng, len: usize, rate: f64) -> Vec<f64> {
    if rate <= 0.0 {
        return alloc::vec![1.0; len];
    }
    let keep = 1.0 - rate;
    (0..len)
        .map(|_| if rng.gen_range(0.0..1.0) < keep { 1.0 / keep } else { 0.0 })
        .collect()
}
