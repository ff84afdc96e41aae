//! Adam with bias correction over flat parameter/gradient slice lists.

use crate::error::{Error, Result};

/// Step-size schedule constants; the paper-default learning rate is 1e-2.
#[derive(Debug, Clone, Copy)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper { lr: 1e-2, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First/second moment accumulators, flattened across all parameter
/// tensors in a fixed slice order.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub hyper: AdamHyper,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(param_count: usize, hyper: AdamHyper) -> Self {
        AdamState { hyper, step: 0, m: vec![0.0; param_count], v: vec![0.0; param_count] }
    }

    /// One bias-corrected update. `params` and `grads` must list the same
    /// tensors in the same order on every call; non-finite gradients abort
    /// (surfaced by training as divergence).
    pub fn step_slices(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        let total: usize = params.iter().map(|p| p.len()).sum();
        if total != self.m.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameters", self.m.len()),
                got: format!("{total}"),
            });
        }
        if params.len() != grads.len()
            || params.iter().zip(grads).any(|(p, g)| p.len() != g.len())
        {
            return Err(Error::ShapeMismatch {
                expected: "gradient slices matching parameter slices".into(),
                got: "mismatched slice list".into(),
            });
        }
        if grads.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged("non-finite gradient in Adam step".into()));
        }

        self.step += 1;
        let t = self.step as i32;
        let h = self.hyper;
        let bc1 = 1.0 - h.beta1.powi(t);
        let bc2 = 1.0 - h.beta2.powi(t);

        let mut offset = 0;
        for (p, g) in params.iter_mut().zip(grads) {
            for (k, (pv, gv)) in p.iter_mut().zip(g.iter()).enumerate() {
                let i = offset + k;
                self.m[i] = h.beta1 * self.m[i] + (1.0 - h.beta1) * gv;
                self.v[i] = h.beta2 * self.v[i] + (1.0 - h.beta2) * gv * gv;
                let m_hat = self.m[i] / bc1;
                let v_hat = self.v[i] / bc2;
                *pv -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
            }
            offset += p.len();
        }
        Ok(())
    }
}
