//! Per-window feature extraction: six summary statistics per gateway plus
//! the activity level.

use super::window::{Window, WindowSpec};
use crate::sim::{AccelSample, RSSI_FLOOR, RSSI_HZ};

/// Features per gateway, in column order: mean, std, max, min, diff,
/// missing_count.
pub const FEATS_PER_GATEWAY: usize = 6;

/// Column suffixes matching the per-gateway feature order.
pub const FEATURE_NAMES: [&str; FEATS_PER_GATEWAY] = ["mean", "std", "max", "min", "diff", "missing"];

/// One windowed feature row: `values.len() = 6 * gateways`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub window_start: f64,
    pub values: Vec<f64>,
}

/// Running statistics for one gateway within one window.
///
/// `diff` (the mean of first-order differences of present values)
/// telescopes to `(last - first) / (m - 1)`, so only the endpoints are
/// kept; this is what makes the feature order-sensitive while the other
/// five statistics are permutation-invariant.
#[derive(Debug, Clone)]
pub struct GatewayAccum {
    m: u32,
    sum: f64,
    sumsq: f64,
    max: f64,
    min: f64,
    first: f64,
    last: f64,
    occupied: Vec<bool>,
}

impl GatewayAccum {
    pub fn new(slot_count: usize) -> Self {
        GatewayAccum {
            m: 0,
            sum: 0.0,
            sumsq: 0.0,
            max: f64::NEG_INFINITY,
            min: f64::INFINITY,
            first: 0.0,
            last: 0.0,
            occupied: vec![false; slot_count],
        }
    }

    /// Feeds one sample; `slot` is its snapped position on the nominal
    /// grid, `value` is `None` for a dropped packet.
    pub fn push(&mut self, slot: Option<usize>, value: Option<f64>) {
        let Some(v) = value else { return };
        if self.m == 0 {
            self.first = v;
        }
        self.last = v;
        self.m += 1;
        self.sum += v;
        self.sumsq += v * v;
        self.max = self.max.max(v);
        self.min = self.min.min(v);
        if let Some(s) = slot {
            if s < self.occupied.len() {
                self.occupied[s] = true;
            }
        }
    }

    /// The six features. An all-missing gateway collapses to the
    /// documented sentinel: mean/max/min at the -120 dBm floor, std and
    /// diff zero, missing count at the full slot count.
    pub fn finalize(&self) -> [f64; FEATS_PER_GATEWAY] {
        let slots = self.occupied.len();
        let present = self.occupied.iter().filter(|&&o| o).count();
        let missing = (slots - present) as f64;
        if self.m == 0 {
            return [RSSI_FLOOR, 0.0, RSSI_FLOOR, RSSI_FLOOR, 0.0, slots as f64];
        }
        let m = self.m as f64;
        let mean = self.sum / m;
        let var = (self.sumsq / m - mean * mean).max(0.0);
        let diff = if self.m >= 2 { (self.last - self.first) / (m - 1.0) } else { 0.0 };
        [mean, var.sqrt(), self.max, self.min, diff, missing]
    }
}

/// Extracts the `6 * gateways` feature vector from a materialised window.
/// Statistics run over non-missing values only; the missing count is taken
/// against the nominal 5 Hz slot grid.
pub fn extract_features(window: &Window, gateways: usize, spec: &WindowSpec) -> FeatureVector {
    let slots = spec.slot_count(window.start, RSSI_HZ);
    let mut accums: Vec<GatewayAccum> = (0..gateways).map(|_| GatewayAccum::new(slots)).collect();
    for s in &window.rssi {
        if s.gateway < gateways {
            let slot = spec.slot_of(window.start, s.t, RSSI_HZ);
            accums[s.gateway].push(slot, s.value);
        }
    }
    let mut values = Vec::with_capacity(gateways * FEATS_PER_GATEWAY);
    for a in &accums {
        values.extend_from_slice(&a.finalize());
    }
    FeatureVector { window_start: window.start, values }
}

/// Running mean absolute first difference per axis.
#[derive(Debug, Clone, Default)]
pub struct JerkAccum {
    prev: Option<(f64, f64, f64)>,
    sum_abs: [f64; 3],
    n: u32,
}

impl JerkAccum {
    pub fn push(&mut self, x: f64, y: f64, z: f64) {
        if let Some((px, py, pz)) = self.prev {
            self.sum_abs[0] += (x - px).abs();
            self.sum_abs[1] += (y - py).abs();
            self.sum_abs[2] += (z - pz).abs();
            self.n += 1;
        }
        self.prev = Some((x, y, z));
    }

    /// Activity level: the tri-axial mean absolute jerk, zero when fewer
    /// than two samples arrived.
    pub fn finalize(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        (self.sum_abs[0] / n + self.sum_abs[1] / n + self.sum_abs[2] / n) / 3.0
    }
}

/// Activity level of one accelerometer window.
pub fn activity_level(accel: &[AccelSample]) -> f64 {
    let mut acc = JerkAccum::default();
    for s in accel {
        acc.push(s.x, s.y, s.z);
    }
    acc.finalize()
}
