//! Raw sensor traces with ground truth, and their JSON-lines form.
//!
//! One record per sample: RSSI records carry a gateway id and a dBm value
//! (or `null` for a dropped packet); accelerometer records carry an axis
//! name and a g-unit value. Every record repeats the ground-truth room
//! label and the persona so a trace file is self-describing.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::config::{Persona, ACCEL_HZ, RSSI_HZ};
use crate::error::{Error, Result};

/// One RSSI observation: `value` is `None` when the packet was dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssiSample {
    pub t: f64,
    pub gateway: usize,
    pub value: Option<f64>,
}

/// One tri-axial accelerometer observation in g-units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Room occupancy as a step function of time: `(start_time, room)` pairs in
/// increasing time order; each segment lasts until the next start (or the
/// trace end).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelTimeline {
    pub segments: Vec<(f64, usize)>,
}

impl LabelTimeline {
    /// Room occupied at time `t` (last segment whose start is <= t).
    pub fn room_at(&self, t: f64) -> usize {
        match self.segments.iter().rposition(|&(start, _)| start <= t) {
            Some(i) => self.segments[i].1,
            None => self.segments.first().map(|&(_, r)| r).unwrap_or(0),
        }
    }

    /// Every distinct room that appears.
    pub fn rooms_covered(&self) -> Vec<usize> {
        let mut rooms: Vec<usize> = self.segments.iter().map(|&(_, r)| r).collect();
        rooms.sort_unstable();
        rooms.dedup();
        rooms
    }
}

/// A full simulated trace: both sensor streams, the ground-truth timeline,
/// the persona, and the nominal duration in seconds.
#[derive(Debug, Clone)]
pub struct GroundTruthTrace {
    pub rssi: Vec<RssiSample>,
    pub accel: Vec<AccelSample>,
    pub labels: LabelTimeline,
    pub persona: Persona,
    pub duration: f64,
    pub rooms: Vec<String>,
}

/// Serialised form of one JSONL record.
#[derive(Debug, Serialize, Deserialize)]
struct Record<'a> {
    t: f64,
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    gateway: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<&'a str>,
    value: Option<f64>,
    label: &'a str,
    persona: &'a str,
}

#[derive(Debug, Deserialize)]
struct OwnedRecord {
    t: f64,
    kind: String,
    gateway: Option<usize>,
    axis: Option<String>,
    value: Option<f64>,
    label: String,
    persona: String,
}

impl GroundTruthTrace {
    /// Duration inferred from nominal sample grids: the latest sample time
    /// plus one nominal period of its stream.
    pub fn nominal_duration(rssi: &[RssiSample], accel: &[AccelSample]) -> f64 {
        let r = rssi.last().map(|s| s.t + 1.0 / RSSI_HZ).unwrap_or(0.0);
        let a = accel.last().map(|s| s.t + 1.0 / ACCEL_HZ).unwrap_or(0.0);
        r.max(a)
    }

    /// Writes the trace as JSON lines, RSSI and accelerometer records
    /// interleaved in time order (RSSI first on ties, gateways ascending).
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        let persona = self.persona.as_str();
        let mut ri = 0;
        let mut ai = 0;
        while ri < self.rssi.len() || ai < self.accel.len() {
            let take_rssi = match (self.rssi.get(ri), self.accel.get(ai)) {
                (Some(r), Some(a)) => r.t <= a.t,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if take_rssi {
                let s = &self.rssi[ri];
                let room = &self.rooms[self.labels.room_at(s.t)];
                let rec = Record {
                    t: s.t,
                    kind: "rssi",
                    gateway: Some(s.gateway),
                    axis: None,
                    value: s.value,
                    label: room,
                    persona,
                };
                serde_json::to_writer(&mut w, &rec)?;
                w.write_all(b"\n")?;
                ri += 1;
            } else {
                let s = &self.accel[ai];
                let room = &self.rooms[self.labels.room_at(s.t)];
                for (axis, v) in [("x", s.x), ("y", s.y), ("z", s.z)] {
                    let rec = Record {
                        t: s.t,
                        kind: "accel",
                        gateway: None,
                        axis: Some(axis),
                        value: Some(v),
                        label: room,
                        persona,
                    };
                    serde_json::to_writer(&mut w, &rec)?;
                    w.write_all(b"\n")?;
                }
                ai += 1;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a trace back from JSON lines. The room name set is rebuilt from
    /// the labels encountered unless `rooms` is given (which also fixes the
    /// label indexing).
    pub fn read_jsonl(path: &Path, rooms: Option<&[String]>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let reader = BufReader::new(file);
        let mut rssi = Vec::new();
        let mut accel_parts: Vec<(f64, String, f64)> = Vec::new();
        let mut room_names: Vec<String> = rooms.map(|r| r.to_vec()).unwrap_or_default();
        let fixed_rooms = rooms.is_some();
        let mut segments: Vec<(f64, usize)> = Vec::new();
        let mut persona = Persona::ResidentA;
        let mut saw_persona = false;

        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: OwnedRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if !saw_persona {
                persona = match rec.persona.as_str() {
                    "technician_walkthrough" => Persona::TechnicianWalkthrough,
                    "resident_a" => Persona::ResidentA,
                    "resident_b" => Persona::ResidentB,
                    other => return Err(Error::Parse(format!("unknown persona '{other}'"))),
                };
                saw_persona = true;
            }
            let room = match room_names.iter().position(|r| *r == rec.label) {
                Some(i) => i,
                None if fixed_rooms => {
                    return Err(Error::Parse(format!(
                        "line {}: label '{}' not in layout",
                        lineno + 1,
                        rec.label
                    )))
                }
                None => {
                    room_names.push(rec.label.clone());
                    room_names.len() - 1
                }
            };
            match segments.last() {
                Some(&(_, last)) if last == room => {}
                _ => segments.push((rec.t, room)),
            }
            match rec.kind.as_str() {
                "rssi" => {
                    let gateway = rec.gateway.ok_or_else(|| {
                        Error::Parse(format!("line {}: rssi record without gateway", lineno + 1))
                    })?;
                    rssi.push(RssiSample {
                        t: rec.t,
                        gateway,
                        value: rec.value,
                    });
                }
                "accel" => {
                    let axis = rec.axis.ok_or_else(|| {
                        Error::Parse(format!("line {}: accel record without axis", lineno + 1))
                    })?;
                    let value = rec.value.ok_or_else(|| {
                        Error::Parse(format!("line {}: accel record without value", lineno + 1))
                    })?;
                    accel_parts.push((rec.t, axis, value));
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown record kind '{other}'",
                        lineno + 1
                    )))
                }
            }
        }

        // Reassemble x/y/z triples that share a timestamp.
        let mut accel = Vec::with_capacity(accel_parts.len() / 3);
        let mut i = 0;
        while i < accel_parts.len() {
            let t = accel_parts[i].0;
            let mut sample = AccelSample { t, x: 0.0, y: 0.0, z: 0.0 };
            while i < accel_parts.len() && accel_parts[i].0 == t {
                let (_, ref axis, v) = accel_parts[i];
                match axis.as_str() {
                    "x" => sample.x = v,
                    "y" => sample.y = v,
                    "z" => sample.z = v,
                    other => return Err(Error::Parse(format!("unknown axis '{other}'"))),
                }
                i += 1;
            }
            accel.push(sample);
        }

        let duration = Self::nominal_duration(&rssi, &accel);
        Ok(GroundTruthTrace {
            rssi,
            accel,
            labels: LabelTimeline { segments },
            persona,
            duration,
            rooms: room_names,
        })
    }
}
