//! The emission network: input -> 3 x (linear -> batch-norm -> ReLU) at
//! width 20 -> linear output, one logit per room.
//!
//! "4-layer" counts the three hidden blocks plus the final linear map
//! whose column y gives the emission potential u(x, y). Forward and backward
//! passes are written out by hand; there is no autodiff anywhere.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Width of every hidden layer.
pub const HIDDEN_WIDTH: usize = 20;
/// Number of hidden (linear + batch-norm + ReLU) blocks.
pub const HIDDEN_BLOCKS: usize = 3;
/// Batch-norm variance stabiliser.
pub const BN_EPS: f64 = 1e-5;
/// Running statistics keep this fraction of their previous value.
pub const BN_MOMENTUM: f64 = 0.9;

/// One hidden block: affine map, then batch-norm (scale/shift plus running
/// statistics), then ReLU applied by the caller.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HiddenLayer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub bn_scale: Array1<f64>,
    pub bn_shift: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

/// Full parameter set of the emission network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    pub hidden: Vec<HiddenLayer>,
    pub out_weight: Array2<f64>,
    pub out_bias: Array1<f64>,
}

/// Whether batch statistics (TRAIN) or running statistics (EVAL) normalise
/// each hidden activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Per-layer intermediates kept for the backward pass.
#[derive(Debug, Clone)]
struct LayerCache {
    input: Array2<f64>,
    centred: Array2<f64>,
    inv_std: Array1<f64>,
    normed: Array2<f64>,
    mask: Array2<f64>,
}

/// Forward-pass intermediates; records which mode produced them.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    mode: Mode,
    layers: Vec<LayerCache>,
    last_hidden: Array2<f64>,
}

/// Gradients mirroring [`Mlp`]'s learnable parameters (running statistics
/// are not learnable and carry no gradient).
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub hidden: Vec<HiddenGrads>,
    pub out_weight: Array2<f64>,
    pub out_bias: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct HiddenGrads {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub bn_scale: Array1<f64>,
    pub bn_shift: Array1<f64>,
}

impl Mlp {
    /// He fan-in initialisation with zero biases, unit batch-norm scale and
    /// unit running variance, seeded.
    pub fn new(input_dim: usize, classes: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::Init);
        let mut layer = |fan_in: usize, fan_out: usize| -> Array2<f64> {
            let std = (2.0 / fan_in as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("positive std");
            Array2::from_shape_fn((fan_in, fan_out), |_| normal.sample(&mut rng))
        };
        let mut hidden = Vec::with_capacity(HIDDEN_BLOCKS);
        let mut fan_in = input_dim;
        for _ in 0..HIDDEN_BLOCKS {
            hidden.push(HiddenLayer {
                weight: layer(fan_in, HIDDEN_WIDTH),
                bias: Array1::zeros(HIDDEN_WIDTH),
                bn_scale: Array1::ones(HIDDEN_WIDTH),
                bn_shift: Array1::zeros(HIDDEN_WIDTH),
                running_mean: Array1::zeros(HIDDEN_WIDTH),
                running_var: Array1::ones(HIDDEN_WIDTH),
            });
            fan_in = HIDDEN_WIDTH;
        }
        let out_weight = layer(HIDDEN_WIDTH, classes);
        Mlp { hidden, out_weight, out_bias: Array1::zeros(classes) }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden[0].weight.nrows()
    }

    pub fn classes(&self) -> usize {
        self.out_weight.ncols()
    }

    /// Emissions for `batch` (rows are windows). TRAIN mode normalises by
    /// batch statistics and updates the running statistics in place; EVAL
    /// mode uses the stored running statistics and never mutates.
    pub fn forward(&mut self, batch: ArrayView2<'_, f64>, mode: Mode) -> Result<(Array2<f64>, ForwardCache)> {
        if batch.nrows() == 0 {
            return Err(Error::EmptyInput("MLP batch"));
        }
        if mode == Mode::Train && batch.nrows() < 2 {
            return Err(Error::InvalidConfig(
                "TRAIN forward needs batch size >= 2 for batch statistics".into(),
            ));
        }
        if batch.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} input columns", self.input_dim()),
                got: format!("{}", batch.ncols()),
            });
        }

        let m = batch.nrows() as f64;
        let mut x = batch.to_owned();
        let mut layers = Vec::with_capacity(self.hidden.len());
        for layer in &mut self.hidden {
            let z = x.dot(&layer.weight) + &layer.bias;
            let (mean, var) = match mode {
                Mode::Train => {
                    let mean = z.sum_axis(Axis(0)) / m;
                    let centred = &z - &mean;
                    let var = centred.mapv(|v| v * v).sum_axis(Axis(0)) / m;
                    layer.running_mean =
                        BN_MOMENTUM * &layer.running_mean + (1.0 - BN_MOMENTUM) * &mean;
                    layer.running_var =
                        BN_MOMENTUM * &layer.running_var + (1.0 - BN_MOMENTUM) * &var;
                    (mean, var)
                }
                Mode::Eval => (layer.running_mean.clone(), layer.running_var.clone()),
            };
            let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
            let centred = &z - &mean;
            let normed = &centred * &inv_std;
            let affine = &normed * &layer.bn_scale + &layer.bn_shift;
            let mask = affine.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            let activated = &affine * &mask;
            layers.push(LayerCache { input: x, centred, inv_std, normed, mask });
            x = activated;
        }
        let emissions = x.dot(&self.out_weight) + &self.out_bias;
        if emissions.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged("non-finite emissions".into()));
        }
        Ok((emissions, ForwardCache { mode, layers, last_hidden: x }))
    }

    /// EVAL-mode emissions without touching any state.
    pub fn infer(&self, batch: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let mut copy = self.clone();
        let (emissions, _) = copy.forward(batch, Mode::Eval)?;
        Ok(emissions)
    }

    /// Exact gradients of whatever scalar loss produced `grad_emissions`.
    /// TRAIN-mode caches differentiate through the batch statistics;
    /// EVAL-mode caches treat the running statistics as constants.
    pub fn backward(&self, cache: &ForwardCache, grad_emissions: ArrayView2<'_, f64>) -> Result<MlpGrads> {
        let n = cache.last_hidden.nrows();
        if grad_emissions.nrows() != n || grad_emissions.ncols() != self.classes() {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{} emission gradient", self.classes()),
                got: format!("{}x{}", grad_emissions.nrows(), grad_emissions.ncols()),
            });
        }
        let m = n as f64;

        let out_weight_grad = cache.last_hidden.t().dot(&grad_emissions);
        let out_bias_grad = grad_emissions.sum_axis(Axis(0));
        let mut upstream = grad_emissions.dot(&self.out_weight.t());

        let mut hidden = Vec::with_capacity(self.hidden.len());
        for (layer, lc) in self.hidden.iter().zip(&cache.layers).rev() {
            // Through ReLU.
            let d_affine = &upstream * &lc.mask;
            // Batch-norm scale/shift.
            let scale_grad = (&d_affine * &lc.normed).sum_axis(Axis(0));
            let shift_grad = d_affine.sum_axis(Axis(0));
            let d_normed = &d_affine * &layer.bn_scale;

            let dz = match cache.mode {
                Mode::Train => {
                    // Differentiate through the batch mean and variance.
                    let inv3 = lc.inv_std.mapv(|v| v * v * v);
                    let d_var = (&d_normed * &lc.centred).sum_axis(Axis(0)) * -0.5 * &inv3;
                    let d_mean = -(&d_normed * &lc.inv_std).sum_axis(Axis(0))
                        - &d_var * (2.0 / m) * lc.centred.sum_axis(Axis(0));
                    &d_normed * &lc.inv_std
                        + &lc.centred * &(2.0 / m * &d_var)
                        + &d_mean / m
                }
                Mode::Eval => &d_normed * &lc.inv_std,
            };

            let weight_grad = lc.input.t().dot(&dz);
            let bias_grad = dz.sum_axis(Axis(0));
            upstream = dz.dot(&layer.weight.t());
            hidden.push(HiddenGrads {
                weight: weight_grad,
                bias: bias_grad,
                bn_scale: scale_grad,
                bn_shift: shift_grad,
            });
        }
        hidden.reverse();
        Ok(MlpGrads { hidden, out_weight: out_weight_grad, out_bias: out_bias_grad })
    }

    /// Learnable parameters as mutable slices, in a fixed order shared with
    /// [`MlpGrads::slices`].
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.hidden {
            out.push(layer.weight.as_slice_mut().expect("standard layout"));
            out.push(layer.bias.as_slice_mut().expect("standard layout"));
            out.push(layer.bn_scale.as_slice_mut().expect("standard layout"));
            out.push(layer.bn_shift.as_slice_mut().expect("standard layout"));
        }
        out.push(self.out_weight.as_slice_mut().expect("standard layout"));
        out.push(self.out_bias.as_slice_mut().expect("standard layout"));
        out
    }

    /// Total learnable parameter count.
    pub fn param_count(&self) -> usize {
        let mut n = 0;
        for layer in &self.hidden {
            n += layer.weight.len() + layer.bias.len() + layer.bn_scale.len() + layer.bn_shift.len();
        }
        n + self.out_weight.len() + self.out_bias.len()
    }
}

impl MlpGrads {
    /// Gradient slices in the order of [`Mlp::param_slices_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for g in &self.hidden {
            out.push(g.weight.as_slice().expect("standard layout"));
            out.push(g.bias.as_slice().expect("standard layout"));
            out.push(g.bn_scale.as_slice().expect("standard layout"));
            out.push(g.bn_shift.as_slice().expect("standard layout"));
        }
        out.push(self.out_weight.as_slice().expect("standard layout"));
        out.push(self.out_bias.as_slice().expect("standard layout"));
        out
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for g in &mut self.hidden {
            g.weight *= factor;
            g.bias *= factor;
            g.bn_scale *= factor;
            g.bn_shift *= factor;
        }
        self.out_weight *= factor;
        self.out_bias *= factor;
        self
    }

    pub fn add(&mut self, other: &MlpGrads) {
        for (a, b) in self.hidden.iter_mut().zip(&other.hidden) {
            a.weight += &b.weight;
            a.bias += &b.bias;
            a.bn_scale += &b.bn_scale;
            a.bn_shift += &b.bn_shift;
        }
        self.out_weight += &other.out_weight;
        self.out_bias += &other.out_bias;
    }

    pub fn zeros_like(mlp: &Mlp) -> Self {
        MlpGrads {
            hidden: mlp
                .hidden
                .iter()
                .map(|l| HiddenGrads {
                    weight: Array2::zeros(l.weight.dim()),
                    bias: Array1::zeros(l.bias.len()),
                    bn_scale: Array1::zeros(l.bn_scale.len()),
                    bn_shift: Array1::zeros(l.bn_shift.len()),
                })
                .collect(),
            out_weight: Array2::zeros(mlp.out_weight.dim()),
            out_bias: Array1::zeros(mlp.out_bias.len()),
        }
    }
}
