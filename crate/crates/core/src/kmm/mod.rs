//! Kernel mean matching: importance weights `beta ~ P_te(x) / P_tr(x)`
//! from a box-and-band-constrained quadratic program over an RBF Gram
//! matrix, solved by projected gradient descent.

pub mod kernel;
pub mod problem;
pub mod solver;

use ndarray::ArrayView2;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::Result;
use crate::rng::{stream_rng, Stream};
pub use kernel::{median_bandwidth, RbfKernel};
pub use problem::{build_problem, KmmProblem};
pub use solver::{project_feasible, solve, SolveOptions, WeightVector};

/// End-to-end weight estimation settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct KmmConfig {
    /// RBF bandwidth; `None` selects the median heuristic over the pooled
    /// train + (subsampled) test points.
    pub bandwidth: Option<f64>,
    /// Upper box bound B.
    pub box_bound: f64,
    /// Sum-band half width; `None` selects `(sqrt(n) - 1) / sqrt(n)`.
    pub epsilon: Option<f64>,
    /// Cap on test windows entering kappa (uniform subsample).
    pub max_test_points: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for KmmConfig {
    fn default() -> Self {
        KmmConfig {
            bandwidth: None,
            box_bound: 1000.0,
            epsilon: None,
            max_test_points: 2000,
            max_iter: 2000,
            tol: 1e-7,
            seed: 0,
        }
    }
}

impl KmmConfig {
    pub fn effective_epsilon(&self, n_train: usize) -> f64 {
        self.epsilon.unwrap_or_else(|| {
            let s = (n_train as f64).sqrt();
            (s - 1.0) / s
        })
    }
}

/// Median bandwidth -> problem assembly -> solve, with the test set
/// subsampled uniformly at random (seeded) to `max_test_points`.
pub fn estimate_weights(
    train: ArrayView2<'_, f64>,
    test: ArrayView2<'_, f64>,
    cfg: &KmmConfig,
) -> Result<WeightVector> {
    let test_sub = if test.nrows() > cfg.max_test_points {
        let mut rng = stream_rng(cfg.seed, Stream::Subsample);
        let mut idx: Vec<usize> =
            sample(&mut rng, test.nrows(), cfg.max_test_points).into_iter().collect();
        idx.sort_unstable();
        test.select(ndarray::Axis(0), &idx)
    } else {
        test.to_owned()
    };

    let gamma = match cfg.bandwidth {
        Some(g) => g,
        None => {
            let pooled = ndarray::concatenate(
                ndarray::Axis(0),
                &[train.view(), test_sub.view()],
            )
            .expect("same feature width");
            median_bandwidth(pooled.view())?
        }
    };

    let epsilon = cfg.effective_epsilon(train.nrows());
    let problem = build_problem(train, test_sub.view(), gamma, cfg.box_bound, epsilon)?;
    solve(&problem, SolveOptions { max_iter: cfg.max_iter, tol: cfg.tol })
}

/// Persists weights next to their window starts for audit.
pub fn write_weights_csv(path: &Path, starts: &[f64], weights: &WeightVector) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["window_start", "beta"])?;
    for (s, b) in starts.iter().zip(weights.beta.iter()) {
        w.write_record([
            crate::features::csvio::format_f64(*s),
            crate::features::csvio::format_f64(*b),
        ])?;
    }
    w.flush()?;
    Ok(())
}
