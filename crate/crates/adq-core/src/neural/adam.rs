//! Adam over a flat parameter vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Adaptive-moment optimizer with bias correction. The defaults are the
/// published ones: alpha 0.001, beta1 0.9, beta2 0.999, epsilon 1e-8.
#[derive(Debug, Clone)]
pub struct Adam {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
}

impl Adam {
    pub fn new(param_count: usize) -> Self {
        Adam {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            step_count: 0,
        }
    }

    /// One update: params -= alpha * m_hat / (sqrt(v_hat) + epsilon).
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), grads.len());
        assert_eq!(params.len(), self.first_moment.len());
        self.step_count += 1;
        let bias1 = 1.0 - math::powf(self.beta1, self.step_count as f64);
        let bias2 = 1.0 - math::powf(self.beta2, self.step_count as f64);
        for i in 0..params.len() {
            let g = grads[i];
            self.first_moment[i] = self.beta1 * self.first_moment[i] + (1.0 - self.beta1) * g;
            self.second_moment[i] = self.beta2 * self.second_moment[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.first_moment[i] / bias1;
            let v_hat = self.second_moment[i] / bias2;
            params[i] -= self.alpha * m_hat / (math::sqrt(v_hat) + self.epsilon);
        }
    }
}
