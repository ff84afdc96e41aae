//! CRF model state: neural emissions, transition log-potentials and the
//! activity gate, plus the on-disk checkpoint format.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{Scaler, WindowSpec};
use crate::nn::Mlp;

/// Finite stand-in for -inf in log space; keeps all arithmetic finite.
pub const NEG_INF: f64 = -1e9;

/// Linear-chain CRF over room labels.
///
/// `log_tau[prev][next]` is the learned transition log-potential; when the
/// activity level falls below `eps_prime` the transition matrix is
/// replaced by the forced-self-transition indicator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrfModel {
    pub emission: Mlp,
    pub log_tau: Array2<f64>,
    pub eps_prime: f64,
}

impl CrfModel {
    /// Fresh model: seeded emission net, zero transition potentials.
    pub fn new(input_dim: usize, classes: usize, eps_prime: f64, seed: u64) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidConfig(format!(
                "CRF needs at least 2 classes, got {classes}"
            )));
        }
        Ok(CrfModel {
            emission: Mlp::new(input_dim, classes, seed),
            log_tau: Array2::zeros((classes, classes)),
            eps_prime,
        })
    }

    pub fn classes(&self) -> usize {
        self.log_tau.nrows()
    }

    /// Is the activity gate open (learned transitions in effect) at this
    /// activity level? The comparison is `alpha >= eps_prime`, so a zero
    /// threshold never closes the gate.
    pub fn gate_open(&self, alpha: f64) -> bool {
        gate_open(alpha, self.eps_prime)
    }
}

pub(crate) fn gate_open(alpha: f64, eps_prime: f64) -> bool {
    alpha >= eps_prime
}

/// Effective log-transition matrix for one step: the learned potentials
/// when the gate is open, otherwise the stay matrix (0 on the diagonal,
/// a large negative constant off it), i.e. the indicator `y_t = y_{t-1}`
/// in log space.
pub fn gated_transition(log_tau: &Array2<f64>, alpha: f64, eps_prime: f64) -> Array2<f64> {
    if gate_open(alpha, eps_prime) {
        log_tau.clone()
    } else {
        let c = log_tau.nrows();
        Array2::from_shape_fn((c, c), |(i, j)| if i == j { 0.0 } else { NEG_INF })
    }
}

/// Default movement threshold: the 10th percentile of walkthrough
/// activity levels.
pub fn default_eps_prime(walkthrough_alphas: &[f64]) -> f64 {
    if walkthrough_alphas.is_empty() {
        return 0.0;
    }
    let mut sorted = walkthrough_alphas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite alphas"));
    let idx = ((sorted.len() as f64) * 0.1).floor() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Self-describing model file: format tag, room names, window geometry,
/// the feature scaler and all model parameters (running stats included).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub rooms: Vec<String>,
    pub gateways: usize,
    pub window: WindowSpec,
    pub scaler: Scaler,
    pub model: CrfModel,
}

/// Current checkpoint format tag.
pub const CHECKPOINT_FORMAT: &str = "roomsense-model-v1";

impl Checkpoint {
    pub fn new(
        rooms: Vec<String>,
        gateways: usize,
        window: WindowSpec,
        scaler: Scaler,
        model: CrfModel,
    ) -> Self {
        Checkpoint { format: CHECKPOINT_FORMAT.into(), rooms, gateways, window, scaler, model }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let ckpt: Checkpoint = serde_json::from_reader(std::io::BufReader::new(file))?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::ModelMismatch(format!(
                "checkpoint format '{}' (expected '{CHECKPOINT_FORMAT}')",
                ckpt.format
            )));
        }
        if ckpt.model.classes() != ckpt.rooms.len() {
            return Err(Error::ModelMismatch(format!(
                "{} rooms but {} model classes",
                ckpt.rooms.len(),
                ckpt.model.classes()
            )));
        }
        Ok(ckpt)
    }

    /// Rejects feature sets the model was not trained for.
    pub fn check_compatible(&self, gateways: usize, dim: usize) -> Result<()> {
        if gateways != self.gateways {
            return Err(Error::ModelMismatch(format!(
                "trace has {gateways} gateways, model expects {}",
                self.gateways
            )));
        }
        if dim != self.scaler.dim() || dim != self.model.emission.input_dim() {
            return Err(Error::ModelMismatch(format!(
                "feature dimension {dim}, model expects {}",
                self.model.emission.input_dim()
            )));
        }
        Ok(())
    }
}
