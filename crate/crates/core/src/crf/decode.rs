//! Decoded-sequence CSV: one row per window with the posterior marginal
//! probability of the decoded label as a confidence score.

use std::path::Path;

use crate::error::{Error, Result};
use crate::features::csvio::format_f64;

/// A decoded trace ready for the behavioural analyses.
#[derive(Debug, Clone)]
pub struct DecodedSequence {
    pub starts: Vec<f64>,
    pub labels: Vec<usize>,
    pub scores: Vec<f64>,
    /// Activity level per window, carried along for the analyses.
    pub alphas: Vec<f64>,
}

pub fn write_decode_csv(
    path: &Path,
    decoded: &DecodedSequence,
    rooms: &[String],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["window_start", "label", "score", "alpha"])?;
    for i in 0..decoded.starts.len() {
        let room = decoded.labels[i];
        w.write_record([
            format_f64(decoded.starts[i]),
            rooms.get(room).cloned().unwrap_or_else(|| room.to_string()),
            format_f64(decoded.scores[i]),
            format_f64(decoded.alphas[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_decode_csv(path: &Path, rooms: &[String]) -> Result<DecodedSequence> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out =
        DecodedSequence { starts: Vec::new(), labels: Vec::new(), scores: Vec::new(), alphas: Vec::new() };
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() < 4 {
            return Err(Error::Parse(format!("decode CSV row {} too short", i + 1)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))
        };
        out.starts.push(parse(&rec[0])?);
        let room = rooms
            .iter()
            .position(|r| r == &rec[1])
            .ok_or_else(|| Error::Parse(format!("row {}: unknown room '{}'", i + 1, &rec[1])))?;
        out.labels.push(room);
        out.scores.push(parse(&rec[2])?);
        out.alphas.push(parse(&rec[3])?);
    }
    Ok(out)
}
