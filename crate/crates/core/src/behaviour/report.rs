//! Assembles the behavioural analyses from decoded sequences and writes
//! the CSV + SVG bundle.

use std::collections::BTreeMap;
use std::path::Path;

use super::activity::{activity_totals, ActivityByDay};
use super::lz::lz76_complexity;
use super::mi::{mutual_information_counts, Dayparts, OccupancyPair, MIN_BUCKET_WINDOWS};
use super::sleep::{sleep_disturbance, SleepReport};
use super::svg::{line_chart, Series};
use crate::crf::{DecodedSequence, NightSpan};
use crate::error::{Error, Result};
use crate::features::csvio::format_f64;
use crate::sim::DAY_S;

/// Analysis settings shared by the report and the CLI.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub dayparts: Dayparts,
    pub night: NightSpan,
    /// Shadowing lag in windows applied to resident B.
    pub lag: usize,
    pub bedroom: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            dayparts: Dayparts::default(),
            night: NightSpan::default(),
            lag: 0,
            bedroom: 0,
        }
    }
}

/// Everything the figures need: MI per (day, daypart), LZ complexity per
/// resident per day, activity split by room, and the sleep summaries.
#[derive(Debug, Clone)]
pub struct BehaviourReport {
    /// `(day, daypart) -> (bits, windows)`; `None` without a second resident.
    pub mi_by_daypart: Option<BTreeMap<(usize, usize), (f64, usize)>>,
    /// One entry per resident: complexity per day.
    pub lz_by_day: Vec<Vec<usize>>,
    /// One entry per resident.
    pub activity: Vec<Vec<ActivityByDay>>,
    /// One entry per resident.
    pub sleep: Vec<SleepReport>,
    pub resident_names: Vec<String>,
    pub rooms: Vec<String>,
}

/// Splits a decoded sequence into per-day label slices.
fn labels_by_day(decoded: &DecodedSequence) -> Vec<Vec<usize>> {
    let mut days: Vec<Vec<usize>> = Vec::new();
    for (&start, &label) in decoded.starts.iter().zip(&decoded.labels) {
        let day = (start / DAY_S).floor() as usize;
        while days.len() <= day {
            days.push(Vec::new());
        }
        days[day].push(label);
    }
    days
}

/// MI per (day, daypart) with resident B lagged; buckets under the minimum
/// window count are absent.
fn mi_per_day_and_part(
    pair: &OccupancyPair,
    dayparts: Dayparts,
    lag: usize,
) -> Result<BTreeMap<(usize, usize), (f64, usize)>> {
    let mut buckets: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for t in 0..pair.len().saturating_sub(lag) {
        let start = pair.starts[t];
        let day = (start / DAY_S).floor() as usize;
        let part = dayparts.of(start.rem_euclid(DAY_S));
        buckets.entry((day, part)).or_default().push((pair.room_a[t], pair.room_b[t + lag]));
    }
    let mut out = BTreeMap::new();
    for (key, pairs) in buckets {
        if pairs.len() >= MIN_BUCKET_WINDOWS {
            let n = pairs.len();
            out.insert(key, (mutual_information_counts(pairs)?, n));
        }
    }
    Ok(out)
}

/// Runs every analysis that the available decodes support. Two decodes
/// must share identical window starts; MI is skipped with only one.
pub fn analyse(
    decodes: &[(&str, &DecodedSequence)],
    rooms: &[String],
    cfg: &AnalysisConfig,
) -> Result<BehaviourReport> {
    if decodes.is_empty() {
        return Err(Error::EmptyInput("no decoded sequences to analyse"));
    }
    for (name, d) in decodes {
        if d.starts.is_empty() {
            return Err(Error::EmptyInput("empty decode: no windows"));
        }
        let _ = name;
    }

    let mi_by_daypart = if decodes.len() >= 2 {
        let (_, a) = decodes[0];
        let (_, b) = decodes[1];
        if a.starts.len() != b.starts.len()
            || a.starts.iter().zip(&b.starts).any(|(x, y)| x != y)
        {
            return Err(Error::Misaligned(
                "resident decodes do not share window starts".into(),
            ));
        }
        let pair = OccupancyPair::new(a.starts.clone(), a.labels.clone(), b.labels.clone())?;
        Some(mi_per_day_and_part(&pair, cfg.dayparts, cfg.lag)?)
    } else {
        None
    };

    let mut lz_by_day = Vec::new();
    let mut activity = Vec::new();
    let mut sleep = Vec::new();
    let mut resident_names = Vec::new();
    for (name, d) in decodes {
        resident_names.push(name.to_string());
        let mut lz_days = Vec::new();
        for day_labels in labels_by_day(d) {
            if day_labels.is_empty() {
                lz_days.push(0);
            } else {
                lz_days.push(lz76_complexity(&day_labels)?);
            }
        }
        lz_by_day.push(lz_days);
        activity.push(activity_totals(&d.starts, &d.alphas, &d.labels, rooms.len())?);
        sleep.push(sleep_disturbance(&d.starts, &d.alphas, &d.labels, cfg.night, cfg.bedroom)?);
    }

    Ok(BehaviourReport {
        mi_by_daypart,
        lz_by_day,
        activity,
        sleep,
        resident_names,
        rooms: rooms.to_vec(),
    })
}

impl BehaviourReport {
    /// Writes the CSV bundle and the three figure analogues into `dir`.
    /// Returns the file names written.
    pub fn write_bundle(&self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();

        if let Some(mi) = &self.mi_by_daypart {
            let path = dir.join("mi_by_daypart.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["day", "daypart", "mi_bits", "windows"])?;
            for (&(day, part), &(bits, n)) in mi {
                w.write_record([
                    day.to_string(),
                    part.to_string(),
                    format_f64(bits),
                    n.to_string(),
                ])?;
            }
            w.flush()?;
            written.push("mi_by_daypart.csv".to_string());

            let mut series: BTreeMap<usize, Series> = BTreeMap::new();
            for (&(day, part), &(bits, _)) in mi {
                series
                    .entry(part)
                    .or_insert_with(|| Series {
                        name: format!("{:02}:00-{:02}:00", part * 6, (part + 1) * 6),
                        points: Vec::new(),
                    })
                    .points
                    .push((day as f64, bits));
            }
            let chart = line_chart(
                "Shadowing: location MI by daypart",
                "day",
                "MI (bits)",
                &series.into_values().collect::<Vec<_>>(),
            );
            std::fs::write(dir.join("mi_by_daypart.svg"), chart)?;
            written.push("mi_by_daypart.svg".to_string());
        }

        {
            let path = dir.join("lz_by_day.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["resident", "day", "lz76"])?;
            for (name, days) in self.resident_names.iter().zip(&self.lz_by_day) {
                for (day, c) in days.iter().enumerate() {
                    w.write_record([name.clone(), day.to_string(), c.to_string()])?;
                }
            }
            w.flush()?;
            written.push("lz_by_day.csv".to_string());

            let series: Vec<Series> = self
                .resident_names
                .iter()
                .zip(&self.lz_by_day)
                .map(|(name, days)| Series {
                    name: name.clone(),
                    points: days.iter().enumerate().map(|(d, &c)| (d as f64, c as f64)).collect(),
                })
                .collect();
            let chart = line_chart(
                "Wandering: localisation complexity by day",
                "day",
                "LZ76 phrase count",
                &series,
            );
            std::fs::write(dir.join("complexity_by_day.svg"), chart)?;
            written.push("complexity_by_day.svg".to_string());
        }

        {
            let path = dir.join("activity_by_room.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["resident", "day", "room", "total_alpha"])?;
            for (name, days) in self.resident_names.iter().zip(&self.activity) {
                for d in days {
                    for (room, &total) in d.per_room.iter().enumerate() {
                        w.write_record([
                            name.clone(),
                            d.day.to_string(),
                            self.rooms[room].clone(),
                            format_f64(total),
                        ])?;
                    }
                    w.write_record([
                        name.clone(),
                        d.day.to_string(),
                        "__day_total__".to_string(),
                        format_f64(d.total),
                    ])?;
                }
            }
            w.flush()?;
            written.push("activity_by_room.csv".to_string());

            // Figure analogue: per-room lines for the first resident.
            if let Some(days) = self.activity.first() {
                let mut series = Vec::new();
                for (room, room_name) in self.rooms.iter().enumerate() {
                    series.push(Series {
                        name: room_name.clone(),
                        points: days
                            .iter()
                            .map(|d| (d.day as f64, d.per_room[room]))
                            .collect(),
                    });
                }
                series.push(Series {
                    name: "day total".into(),
                    points: days.iter().map(|d| (d.day as f64, d.total)).collect(),
                });
                let chart = line_chart(
                    &format!("Activity by room ({})", self.resident_names[0]),
                    "day",
                    "summed activity",
                    &series,
                );
                std::fs::write(dir.join("activity_by_room.svg"), chart)?;
                written.push("activity_by_room.svg".to_string());
            }
        }

        {
            let path = dir.join("sleep.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record([
                "resident",
                "day",
                "mean_alpha",
                "var_alpha",
                "frac_outside_bedroom",
                "bedroom_exits",
                "windows",
            ])?;
            for (name, report) in self.resident_names.iter().zip(&self.sleep) {
                for d in &report.days {
                    w.write_record([
                        name.clone(),
                        d.day.to_string(),
                        format_f64(d.mean_alpha),
                        format_f64(d.var_alpha),
                        format_f64(d.frac_outside_bedroom),
                        d.bedroom_exits.to_string(),
                        d.windows.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            written.push("sleep.csv".to_string());

            let path = dir.join("sleep_skipped_days.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["resident", "day"])?;
            for (name, report) in self.resident_names.iter().zip(&self.sleep) {
                for day in &report.skipped_days {
                    w.write_record([name.clone(), day.to_string()])?;
                }
            }
            w.flush()?;
            written.push("sleep_skipped_days.csv".to_string());
        }

        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use rand::Rng;

    fn fake_decode(seed: u64, n: usize, rooms: usize) -> DecodedSequence {
        let mut rng = stream_rng(seed, Stream::Test);
        DecodedSequence {
            starts: (0..n).map(|k| k as f64 * 2.5).collect(),
            labels: (0..n).map(|_| rng.gen_range(0..rooms)).collect(),
            scores: vec![1.0; n],
            alphas: (0..n).map(|_| rng.gen_range(0.0..0.2)).collect(),
        }
    }

    #[test]
    fn two_residents_produce_all_sections() {
        let rooms: Vec<String> = ["hall", "kitchen", "bedroom"].iter().map(|s| s.to_string()).collect();
        let a = fake_decode(1, 40_000, 3);
        let b = fake_decode(2, 40_000, 3);
        let cfg = AnalysisConfig { bedroom: 2, ..AnalysisConfig::default() };
        let report = analyse(&[("resident_a", &a), ("resident_b", &b)], &rooms, &cfg).unwrap();
        assert!(report.mi_by_daypart.is_some());
        assert_eq!(report.lz_by_day.len(), 2);
        assert_eq!(report.activity.len(), 2);
        assert_eq!(report.sleep.len(), 2);

        let dir = tempfile::tempdir().unwrap();
        let files = report.write_bundle(dir.path()).unwrap();
        for f in [
            "mi_by_daypart.csv",
            "mi_by_daypart.svg",
            "lz_by_day.csv",
            "complexity_by_day.svg",
            "activity_by_room.csv",
            "activity_by_room.svg",
            "sleep.csv",
            "sleep_skipped_days.csv",
        ] {
            assert!(files.contains(&f.to_string()), "missing {f}");
            assert!(dir.path().join(f).exists());
        }
    }

    #[test]
    fn single_resident_drops_only_mi() {
        let rooms: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let d = fake_decode(3, 5000, 2);
        let report = analyse(&[("solo", &d)], &rooms, &AnalysisConfig::default()).unwrap();
        assert!(report.mi_by_daypart.is_none());
        assert_eq!(report.lz_by_day.len(), 1);
        let dir = tempfile::tempdir().unwrap();
        let files = report.write_bundle(dir.path()).unwrap();
        assert!(!files.contains(&"mi_by_daypart.csv".to_string()));
        assert!(files.contains(&"lz_by_day.csv".to_string()));
    }

    #[test]
    fn misaligned_decodes_are_rejected() {
        let rooms: Vec<String> = vec!["a".into(), "b".into()];
        let a = fake_decode(4, 100, 2);
        let mut b = fake_decode(5, 100, 2);
        b.starts[50] += 0.1;
        let err = analyse(&[("a", &a), ("b", &b)], &rooms, &AnalysisConfig::default());
        assert!(matches!(err, Err(Error::Misaligned(_))));
    }

    #[test]
    fn empty_decode_is_rejected() {
        let rooms: Vec<String> = vec!["a".into(), "b".into()];
        let empty = DecodedSequence {
            starts: vec![],
            labels: vec![],
            scores: vec![],
            alphas: vec![],
        };
        assert!(analyse(&[("x", &empty)], &rooms, &AnalysisConfig::default()).is_err());
    }
}
