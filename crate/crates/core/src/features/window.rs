//! Sliding-window segmentation shared by both sensor streams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{AccelSample, RssiSample};

/// Window geometry: 5 s windows overlapping by 2.5 s unless configured
/// otherwise. RSSI and accelerometer use the same boundaries so activity
/// levels align index-for-index with feature vectors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Window length in seconds.
    pub length: f64,
    /// Overlap between consecutive windows in seconds.
    pub overlap: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { length: 5.0, overlap: 2.5 }
    }
}

/// Slack for float comparisons on window boundaries.
const EDGE_EPS: f64 = 1e-9;

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.overlap >= 0.0 && self.overlap < self.length) {
            return Err(Error::InvalidConfig(format!(
                "window overlap {} must lie in [0, length {})",
                self.overlap, self.length
            )));
        }
        Ok(())
    }

    /// Stride between window starts.
    pub fn hop(&self) -> f64 {
        self.length - self.overlap
    }

    /// Start times of every complete window in a stream of `duration`
    /// seconds; truncated windows at the end are dropped.
    pub fn starts(&self, duration: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let start = k as f64 * self.hop();
            if start + self.length > duration + EDGE_EPS {
                break;
            }
            out.push(start);
            k += 1;
        }
        out
    }

    /// Start of window `k`.
    pub fn start_of(&self, k: usize) -> f64 {
        k as f64 * self.hop()
    }

    /// Does `[start, start+length)` contain `t`?
    pub fn contains(&self, start: f64, t: f64) -> bool {
        t >= start - EDGE_EPS && t < start + self.length - EDGE_EPS
    }

    /// Number of nominal sample slots of a `hz` stream inside one window
    /// starting at `start`: grid points `k / hz` with `start <= k/hz <
    /// start + length`.
    pub fn slot_count(&self, start: f64, hz: f64) -> usize {
        let lo = (start * hz - EDGE_EPS).ceil() as i64;
        let hi = ((start + self.length) * hz - EDGE_EPS).ceil() as i64 - 1;
        (hi - lo + 1).max(0) as usize
    }

    /// Nearest nominal slot of `t` relative to a window starting at
    /// `start`, or `None` if it falls outside the window's slot grid.
    pub fn slot_of(&self, start: f64, t: f64, hz: f64) -> Option<usize> {
        let lo = (start * hz - EDGE_EPS).ceil() as i64;
        let k = (t * hz).round() as i64;
        let idx = k - lo;
        if idx >= 0 && (idx as usize) < self.slot_count(start, hz) {
            Some(idx as usize)
        } else {
            None
        }
    }
}

/// One materialised window of raw samples (small-scale/batch path; the
/// streaming featurizer never builds these).
#[derive(Debug, Clone)]
pub struct Window {
    pub start: f64,
    pub rssi: Vec<RssiSample>,
    pub accel: Vec<AccelSample>,
}

/// Cuts both time-sorted streams into complete windows of `spec` geometry.
/// An empty stream (duration 0) yields no windows.
pub fn window_stream(
    rssi: &[RssiSample],
    accel: &[AccelSample],
    duration: f64,
    spec: &WindowSpec,
) -> Result<Vec<Window>> {
    spec.validate()?;
    let starts = spec.starts(duration);
    let mut windows: Vec<Window> = starts
        .iter()
        .map(|&start| Window { start, rssi: Vec::new(), accel: Vec::new() })
        .collect();
    let hop = spec.hop();
    // Each sample lands in at most ceil(length/hop) consecutive windows.
    let span = (spec.length / hop).ceil() as usize + 1;
    let count = windows.len();
    let assign = move |t: f64| -> std::ops::Range<usize> {
        if count == 0 {
            return 0..0;
        }
        let last = ((t / hop).floor() as usize).min(count - 1);
        let first = last.saturating_sub(span - 1);
        first..(last + 1)
    };
    for s in rssi {
        for k in assign(s.t) {
            if spec.contains(windows[k].start, s.t) {
                windows[k].rssi.push(*s);
            }
        }
    }
    for s in accel {
        for k in assign(s.t) {
            if spec.contains(windows[k].start, s.t) {
                windows[k].accel.push(*s);
            }
        }
    }
    Ok(windows)
}
