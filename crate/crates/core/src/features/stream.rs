//! Constant-memory featurization and the feature-matrix container.
//!
//! Multi-day traces run to tens of millions of samples, so the pipeline
//! never materialises windows: samples are pushed through a ring of (at
//! most `ceil(length/hop)`) open windows backed by the same accumulators
//! the batch path uses, making both paths bit-identical.

use ndarray::Array2;
use std::collections::VecDeque;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::extract::{GatewayAccum, JerkAccum, FEATS_PER_GATEWAY};
use super::window::WindowSpec;
use crate::error::{Error, Result};
use crate::sim::{GroundTruthTrace, LabelTimeline, RSSI_HZ};

/// Collected windowed features for one trace, rows aligned with
/// `starts`/`alphas`/`labels` index-for-index.
#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub starts: Vec<f64>,
    /// `n x (6 * gateways)` raw (unscaled) feature matrix.
    pub features: Array2<f64>,
    /// Activity level per window.
    pub alphas: Vec<f64>,
    /// Ground-truth room per window when known (from simulation).
    pub labels: Vec<Option<usize>>,
    pub gateways: usize,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.gateways * FEATS_PER_GATEWAY
    }
}

struct OpenWindow {
    start: f64,
    gateways: Vec<GatewayAccum>,
    jerk: JerkAccum,
}

/// Incremental featurizer; feed time-ordered samples, then `finish`.
pub struct StreamFeaturizer {
    spec: WindowSpec,
    gateways: usize,
    open: VecDeque<OpenWindow>,
    next_window: usize,
    rows: Vec<f64>,
    starts: Vec<f64>,
    alphas: Vec<f64>,
    last_t: f64,
}

impl StreamFeaturizer {
    pub fn new(spec: WindowSpec, gateways: usize) -> Result<Self> {
        spec.validate()?;
        if gateways == 0 {
            return Err(Error::InvalidConfig("gateway count must be >= 1".into()));
        }
        Ok(StreamFeaturizer {
            spec,
            gateways,
            open: VecDeque::new(),
            next_window: 0,
            rows: Vec::new(),
            starts: Vec::new(),
            alphas: Vec::new(),
            last_t: 0.0,
        })
    }

    /// Opens windows whose span has begun and closes those fully behind
    /// `t`, emitting their feature rows.
    fn advance_to(&mut self, t: f64) {
        self.last_t = self.last_t.max(t);
        while self.spec.start_of(self.next_window) <= t {
            let start = self.spec.start_of(self.next_window);
            let slots = self.spec.slot_count(start, RSSI_HZ);
            self.open.push_back(OpenWindow {
                start,
                gateways: (0..self.gateways).map(|_| GatewayAccum::new(slots)).collect(),
                jerk: JerkAccum::default(),
            });
            self.next_window += 1;
        }
        while let Some(front) = self.open.front() {
            if front.start + self.spec.length <= t {
                let w = self.open.pop_front().unwrap();
                self.emit(w);
            } else {
                break;
            }
        }
    }

    fn emit(&mut self, w: OpenWindow) {
        self.starts.push(w.start);
        for g in &w.gateways {
            self.rows.extend_from_slice(&g.finalize());
        }
        self.alphas.push(w.jerk.finalize());
    }

    pub fn push_rssi(&mut self, t: f64, gateway: usize, value: Option<f64>) -> Result<()> {
        if gateway >= self.gateways {
            return Err(Error::Parse(format!(
                "gateway {gateway} out of range (layout has {})",
                self.gateways
            )));
        }
        self.advance_to(t);
        for w in self.open.iter_mut() {
            if self.spec.contains(w.start, t) {
                let slot = self.spec.slot_of(w.start, t, RSSI_HZ);
                w.gateways[gateway].push(slot, value);
            }
        }
        Ok(())
    }

    pub fn push_accel(&mut self, t: f64, x: f64, y: f64, z: f64) {
        self.advance_to(t);
        for w in self.open.iter_mut() {
            if self.spec.contains(w.start, t) {
                w.jerk.push(x, y, z);
            }
        }
    }

    /// Closes every window that completes within `duration` and returns
    /// the collected rows (labels all unknown; attach them separately).
    pub fn finish(mut self, duration: f64) -> FeatureSet {
        // Windows that received no samples at all still exist.
        if let Some(&last_start) = self.spec.starts(duration).last() {
            self.advance_to(last_start);
        }
        while let Some(front) = self.open.front() {
            if front.start + self.spec.length <= duration + 1e-9 {
                let w = self.open.pop_front().unwrap();
                self.emit(w);
            } else {
                break;
            }
        }
        let n = self.starts.len();
        let d = self.gateways * FEATS_PER_GATEWAY;
        let features = Array2::from_shape_vec((n, d), self.rows).expect("row width fixed");
        FeatureSet {
            starts: self.starts,
            features,
            alphas: self.alphas,
            labels: vec![None; n],
            gateways: self.gateways,
        }
    }
}

/// Featurizes an in-memory trace; ground-truth labels are attached from
/// the trace timeline at each window's centre.
pub fn featurize_trace(
    trace: &GroundTruthTrace,
    spec: &WindowSpec,
    gateways: usize,
) -> Result<FeatureSet> {
    let mut f = StreamFeaturizer::new(*spec, gateways)?;
    let mut ri = 0;
    let mut ai = 0;
    while ri < trace.rssi.len() || ai < trace.accel.len() {
        let take_rssi = match (trace.rssi.get(ri), trace.accel.get(ai)) {
            (Some(r), Some(a)) => r.t <= a.t,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if take_rssi {
            let s = &trace.rssi[ri];
            f.push_rssi(s.t, s.gateway, s.value)?;
            ri += 1;
        } else {
            let s = &trace.accel[ai];
            f.push_accel(s.t, s.x, s.y, s.z);
            ai += 1;
        }
    }
    let mut set = f.finish(trace.duration);
    attach_labels(&mut set, &trace.labels, spec);
    Ok(set)
}

/// Window label = room occupied at the window centre.
pub fn attach_labels(set: &mut FeatureSet, timeline: &LabelTimeline, spec: &WindowSpec) {
    for (i, &start) in set.starts.iter().enumerate() {
        set.labels[i] = Some(timeline.room_at(start + spec.length / 2.0));
    }
}

/// Featurizes a JSONL trace file without loading it into memory. Labels
/// come from the records themselves; `rooms` fixes the label indexing.
pub fn featurize_jsonl(path: &Path, spec: &WindowSpec, rooms: &[String]) -> Result<FeatureSet> {
    #[derive(serde::Deserialize)]
    struct Rec {
        t: f64,
        kind: String,
        gateway: Option<usize>,
        axis: Option<String>,
        value: Option<f64>,
        label: String,
    }

    // Two passes: a cheap line scan finds the gateway count (ids are dense
    // from 0), then the real pass featurizes without buffering the file.
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut max_gateway = 0usize;
    let mut segments: Vec<(f64, usize)> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(idx) = line.find("\"gateway\":") {
            let rest = &line[idx + 10..];
            let end = rest.find([',', '}']).unwrap_or(rest.len());
            if let Ok(g) = rest[..end].trim().parse::<usize>() {
                max_gateway = max_gateway.max(g);
            }
        }
    }

    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut f = StreamFeaturizer::new(*spec, max_gateway + 1)?;
    let mut pending_accel: Option<(f64, f64, f64, f64, u8)> = None;
    let mut last_rssi_t = f64::NEG_INFINITY;
    let mut last_accel_t = f64::NEG_INFINITY;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Rec = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        let room = rooms
            .iter()
            .position(|r| *r == rec.label)
            .ok_or_else(|| Error::Parse(format!("line {}: label '{}' not in layout", lineno + 1, rec.label)))?;
        match segments.last() {
            Some(&(_, r)) if r == room => {}
            _ => segments.push((rec.t, room)),
        }
        match rec.kind.as_str() {
            "rssi" => {
                let gw = rec
                    .gateway
                    .ok_or_else(|| Error::Parse(format!("line {}: rssi without gateway", lineno + 1)))?;
                f.push_rssi(rec.t, gw, rec.value)?;
                last_rssi_t = rec.t;
            }
            "accel" => {
                let v = rec
                    .value
                    .ok_or_else(|| Error::Parse(format!("line {}: accel without value", lineno + 1)))?;
                let axis = match rec.axis.as_deref() {
                    Some("x") => 0u8,
                    Some("y") => 1,
                    Some("z") => 2,
                    other => {
                        return Err(Error::Parse(format!(
                            "line {}: bad accel axis {other:?}",
                            lineno + 1
                        )))
                    }
                };
                let (t, mut x, mut y, mut z, mut seen) =
                    pending_accel.take().filter(|p| p.0 == rec.t).unwrap_or((rec.t, 0.0, 0.0, 0.0, 0));
                match axis {
                    0 => x = v,
                    1 => y = v,
                    _ => z = v,
                }
                seen |= 1 << axis;
                if seen == 0b111 {
                    f.push_accel(t, x, y, z);
                    last_accel_t = t;
                } else {
                    pending_accel = Some((t, x, y, z, seen));
                }
            }
            other => {
                return Err(Error::Parse(format!("line {}: unknown kind '{other}'", lineno + 1)))
            }
        }
    }

    let duration = {
        let r = if last_rssi_t.is_finite() { last_rssi_t + 1.0 / RSSI_HZ } else { 0.0 };
        let a = if last_accel_t.is_finite() { last_accel_t + 0.05 } else { 0.0 };
        r.max(a)
    };
    let mut set = f.finish(duration);
    attach_labels(&mut set, &LabelTimeline { segments }, spec);
    Ok(set)
}
