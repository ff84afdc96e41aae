//! Alternating training loop: Adam on the weighted supervised loss over
//! mini-batches, then per-sequence hard-EM self-training steps.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::loss::{eval_cross_entropy, loss_ssl, loss_wsl};
use super::model::CrfModel;
use crate::error::{Error, Result};
use crate::nn::{AdamHyper, AdamState};
use crate::rng::{stream_rng, Stream};

/// Training knobs. The paper pins only the optimiser (Adam, lr 1e-2) and
/// the network shape; epochs, batch size and the SSL schedule are
/// config-exposed defaults, not claims.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Relative weight of the SSL term in the combined objective.
    pub ssl_weight: f64,
    /// First epoch (0-based) at which SSL steps run; earlier epochs are
    /// supervised warm-up so self-training starts from sane decodes.
    pub ssl_start_epoch: usize,
    /// Fraction of supervised windows held out for early stopping.
    pub holdout_fraction: f64,
    /// Early-stop patience in epochs; `None` disables early stopping.
    pub patience: Option<usize>,
    /// Row-chunk size for bounded-memory SSL backprop.
    pub ssl_chunk: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 64,
            lr: 1e-2,
            ssl_weight: 1.0,
            ssl_start_epoch: 2,
            holdout_fraction: 0.2,
            patience: Some(20),
            ssl_chunk: 8192,
            seed: 0,
        }
    }
}

/// Supervised pool: scaled features, labels, importance weights
/// (walkthrough windows carry KMM weights, pseudo-labels carry 1).
#[derive(Debug, Clone)]
pub struct Supervised {
    pub x: Array2<f64>,
    pub y: Vec<usize>,
    pub beta: Array1<f64>,
}

/// An unlabeled free-living sequence: scaled features plus activity.
#[derive(Debug, Clone)]
pub struct UnlabeledSequence {
    pub x: Array2<f64>,
    pub alphas: Vec<f64>,
}

/// Per-epoch loss record.
#[derive(Debug, Clone, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub wsl: f64,
    pub ssl: f64,
    pub total: f64,
    pub holdout_nll: Option<f64>,
}

/// Trains `model` in place and returns the loss trace. Deterministic
/// given the config seed; aborts with [`Error::Diverged`] on a non-finite
/// loss or gradient.
pub fn train(
    model: &mut CrfModel,
    sup: &Supervised,
    sequences: &[UnlabeledSequence],
    cfg: &TrainConfig,
) -> Result<Vec<EpochStats>> {
    let n = sup.x.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("supervised training pool"));
    }
    if sup.y.len() != n || sup.beta.len() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n} labels and weights"),
            got: format!("{} labels, {} weights", sup.y.len(), sup.beta.len()),
        });
    }
    if sup.x.ncols() != model.emission.input_dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} feature columns", model.emission.input_dim()),
            got: format!("{}", sup.x.ncols()),
        });
    }

    let mut rng = stream_rng(cfg.seed, Stream::Shuffle);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let holdout_len = ((n as f64) * cfg.holdout_fraction).floor() as usize;
    // Keep at least 2 training windows so TRAIN-mode batches exist.
    let holdout_len = holdout_len.min(n.saturating_sub(2));
    let (holdout_idx, train_idx) = indices.split_at(holdout_len);
    let mut train_idx = train_idx.to_vec();
    let holdout_x = sup.x.select(ndarray::Axis(0), holdout_idx);
    let holdout_y: Vec<usize> = holdout_idx.iter().map(|&i| sup.y[i]).collect();

    let hyper = AdamHyper { lr: cfg.lr, ..AdamHyper::default() };
    let mut adam_mlp = AdamState::new(model.emission.param_count(), hyper);
    let mut adam_tau = AdamState::new(model.log_tau.len(), hyper);

    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut best_nll = f64::INFINITY;
    let mut best_state: Option<(CrfModel, usize)> = None;
    let mut since_best = 0usize;

    for epoch in 0..cfg.epochs {
        train_idx.shuffle(&mut rng);

        // Supervised phase over mini-batches.
        let mut wsl_weighted = 0.0;
        let mut wsl_mass = 0.0;
        for chunk in train_idx.chunks(cfg.batch_size.max(2)) {
            if chunk.len() < 2 {
                continue; // batch-norm needs two rows; the leftover window returns next epoch
            }
            let batch = sup.x.select(ndarray::Axis(0), chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| sup.y[i]).collect();
            let beta: Vec<f64> = chunk.iter().map(|&i| sup.beta[i]).collect();
            if beta.iter().sum::<f64>() <= 0.0 {
                continue; // all-zero importance mass carries no signal
            }
            let (loss, mass, grads) = loss_wsl(&mut model.emission, batch.view(), &labels, &beta)?;
            adam_mlp.step_slices(&mut model.emission.param_slices_mut(), &grads.slices())?;
            wsl_weighted += loss * mass;
            wsl_mass += mass;
        }
        let wsl = if wsl_mass > 0.0 { wsl_weighted / wsl_mass } else { 0.0 };

        // Self-training phase, one decode-and-fit step per sequence.
        let mut ssl_total = 0.0;
        let mut ssl_count = 0usize;
        if cfg.ssl_weight > 0.0 && epoch >= cfg.ssl_start_epoch {
            for seq in sequences {
                let step = loss_ssl(model, seq.x.view(), &seq.alphas, cfg.ssl_chunk)?;
                let mlp_grads = step.mlp_grads.scaled(cfg.ssl_weight);
                let tau_grads = step.tau_grads.mapv(|v| v * cfg.ssl_weight);
                adam_mlp.step_slices(&mut model.emission.param_slices_mut(), &mlp_grads.slices())?;
                adam_tau.step_slices(
                    &mut [model.log_tau.as_slice_mut().expect("standard layout")],
                    &[tau_grads.as_slice().expect("standard layout")],
                )?;
                ssl_total += step.loss;
                ssl_count += 1;
            }
        }
        let ssl = if ssl_count > 0 { ssl_total / ssl_count as f64 } else { 0.0 };

        let total = wsl + cfg.ssl_weight * ssl;
        if !total.is_finite() {
            return Err(Error::Diverged(format!("epoch {epoch}: loss {total}")));
        }

        let holdout_nll = if holdout_y.is_empty() {
            None
        } else {
            Some(eval_cross_entropy(&model.emission, holdout_x.view(), &holdout_y)?)
        };
        trace.push(EpochStats { epoch, wsl, ssl, total, holdout_nll });

        if let (Some(patience), Some(nll)) = (cfg.patience, holdout_nll) {
            if nll < best_nll - 1e-12 {
                best_nll = nll;
                best_state = Some((model.clone(), epoch));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    break;
                }
            }
        }
    }

    if let Some((best, _)) = best_state {
        *model = best;
    }
    Ok(trace)
}
