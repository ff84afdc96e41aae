//! RBF kernel and the median-distance bandwidth heuristic.

use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// Gaussian RBF: `k(x, x') = exp(-||x - x'||^2 / (2 gamma^2))`.
#[derive(Debug, Clone, Copy)]
pub struct RbfKernel {
    pub gamma: f64,
}

impl RbfKernel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::InvalidConfig(format!("RBF bandwidth must be > 0, got {gamma}")));
        }
        Ok(RbfKernel { gamma })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (-sq / (2.0 * self.gamma * self.gamma)).exp()
    }
}

/// Cap on the points entering the pairwise-distance median.
const MEDIAN_SUBSAMPLE: usize = 1000;

/// Median pairwise Euclidean distance over a deterministic subsample of at
/// most 1000 points (evenly strided); falls back to 1 when the median is 0.
pub fn median_bandwidth(points: ArrayView2<'_, f64>) -> Result<f64> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::EmptyInput("median bandwidth needs at least 2 points"));
    }
    let stride = n.div_ceil(MEDIAN_SUBSAMPLE);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let mut dists = Vec::with_capacity(idx.len() * (idx.len() - 1) / 2);
    for (i, &a) in idx.iter().enumerate() {
        for &b in &idx[i + 1..] {
            let ra = points.row(a);
            let rb = points.row(b);
            let sq: f64 = ra.iter().zip(rb.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            dists.push(sq.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    Ok(if median > 0.0 { median } else { 1.0 })
}
