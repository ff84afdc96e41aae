//! Feature-matrix CSV format: header row of `window_start`, the
//! per-gateway feature columns, `alpha`, and an optional `label` column.

use ndarray::Array2;
use std::path::Path;

use super::extract::{FEATS_PER_GATEWAY, FEATURE_NAMES};
use super::stream::FeatureSet;
use crate::error::{Error, Result};

/// Writes a feature set; `rooms` maps label indices to names. The label
/// column is present only when every window has one.
pub fn write_features_csv(path: &Path, set: &FeatureSet, rooms: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let with_labels = !set.labels.is_empty() && set.labels.iter().all(|l| l.is_some());
    let mut header = vec!["window_start".to_string()];
    for g in 0..set.gateways {
        for name in FEATURE_NAMES {
            header.push(format!("g{g}_{name}"));
        }
    }
    header.push("alpha".into());
    if with_labels {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for i in 0..set.len() {
        let mut rec = vec![format_f64(set.starts[i])];
        for v in set.features.row(i) {
            rec.push(format_f64(*v));
        }
        rec.push(format_f64(set.alphas[i]));
        if with_labels {
            let room = set.labels[i].expect("checked above");
            rec.push(rooms.get(room).cloned().unwrap_or_else(|| room.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest-roundtrip decimal form; reparses to the identical f64.
pub fn format_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Reads a feature CSV back. Labels are resolved against `rooms` when the
/// column is present.
pub fn read_features_csv(path: &Path, rooms: &[String]) -> Result<FeatureSet> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let cols = headers.len();
    let has_label = headers.iter().last() == Some("label");
    let feat_cols = cols - 2 - usize::from(has_label);
    if feat_cols == 0 || feat_cols % FEATS_PER_GATEWAY != 0 {
        return Err(Error::Parse(format!(
            "feature CSV has {feat_cols} feature columns, not a multiple of {FEATS_PER_GATEWAY}"
        )));
    }
    let gateways = feat_cols / FEATS_PER_GATEWAY;

    let mut starts = Vec::new();
    let mut rows = Vec::new();
    let mut alphas = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))
        };
        starts.push(parse(&rec[0])?);
        for j in 0..feat_cols {
            rows.push(parse(&rec[1 + j])?);
        }
        alphas.push(parse(&rec[1 + feat_cols])?);
        if has_label {
            let name = &rec[2 + feat_cols];
            let room = rooms
                .iter()
                .position(|r| r == name)
                .ok_or_else(|| Error::Parse(format!("row {}: unknown room '{name}'", i + 1)))?;
            labels.push(Some(room));
        } else {
            labels.push(None);
        }
    }
    let n = starts.len();
    let features = Array2::from_shape_vec((n, feat_cols), rows).expect("fixed width");
    Ok(FeatureSet { starts, features, alphas, labels, gateways })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::stream::featurize_trace;
    use crate::features::window::WindowSpec;
    use crate::sim::{simulate_walkthrough, HouseLayout, SimConfig};

    #[test]
    fn csv_round_trip_is_exact() {
        let layout = HouseLayout::demo();
        let cfg = SimConfig { seed: 21, walkthrough_minutes: 1.0, ..SimConfig::default() };
        let trace = simulate_walkthrough(&layout, &cfg).unwrap();
        let set = featurize_trace(&trace, &WindowSpec::default(), layout.gateway_count()).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        write_features_csv(&path, &set, &layout.rooms).unwrap();
        let back = read_features_csv(&path, &layout.rooms).unwrap();

        assert_eq!(back.starts, set.starts);
        assert_eq!(back.features, set.features);
        assert_eq!(back.alphas, set.alphas);
        assert_eq!(back.labels, set.labels);
        assert_eq!(back.gateways, set.gateways);
    }
}
