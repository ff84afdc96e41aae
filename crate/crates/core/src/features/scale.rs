//! Per-dimension z-scoring fit on training data only.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Train-set feature statistics. Zero-variance dimensions are flagged by
/// `std == 0` and map to 0 when applied.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Fits per-dimension mean and (population) std.
    pub fn fit(train: ArrayView2<'_, f64>) -> Result<Self> {
        if train.nrows() == 0 {
            return Err(Error::EmptyInput("scaler training set"));
        }
        let n = train.nrows() as f64;
        let d = train.ncols();
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        for j in 0..d {
            let col = train.column(j);
            let mu = col.sum() / n;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            mean[j] = mu;
            std[j] = var.sqrt();
        }
        Ok(Scaler { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Applies `(x - mean) / std` per dimension; zero-variance dimensions
    /// become 0.
    pub fn transform(&self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} columns", self.dim()),
                got: format!("{} columns", data.ncols()),
            });
        }
        let mut out = data.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if self.std[j] > 0.0 { (*v - self.mean[j]) / self.std[j] } else { 0.0 };
            }
        }
        Ok(out)
    }
}

/// Fits on `train`, applies to both sets, and returns the fitted scaler
/// for later reuse (it is stored in model checkpoints).
pub fn standardize(
    train: ArrayView2<'_, f64>,
    other: ArrayView2<'_, f64>,
) -> Result<(Array2<f64>, Array2<f64>, Scaler)> {
    let scaler = Scaler::fit(train)?;
    Ok((scaler.transform(train)?, scaler.transform(other)?, scaler))
}
