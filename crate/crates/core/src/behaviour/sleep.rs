//! Night-time activity summaries per day: how restless, how often out of
//! the bedroom.

use crate::crf::NightSpan;
use crate::error::{Error, Result};
use crate::sim::DAY_S;

/// One day's sleep window statistics.
#[derive(Debug, Clone)]
pub struct SleepSummary {
    pub day: usize,
    pub mean_alpha: f64,
    pub var_alpha: f64,
    /// Fraction of night windows decoded outside the bedroom.
    pub frac_outside_bedroom: f64,
    /// Bedroom -> elsewhere transitions between consecutive night windows.
    pub bedroom_exits: usize,
    pub windows: usize,
}

/// Summaries for days with night data plus the list of days without any.
#[derive(Debug, Clone)]
pub struct SleepReport {
    pub days: Vec<SleepSummary>,
    pub skipped_days: Vec<usize>,
}

pub fn sleep_disturbance(
    starts: &[f64],
    alphas: &[f64],
    labels: &[usize],
    night: NightSpan,
    bedroom: usize,
) -> Result<SleepReport> {
    if starts.len() != alphas.len() || starts.len() != labels.len() {
        return Err(Error::Misaligned(format!(
            "{} starts, {} alphas, {} labels",
            starts.len(),
            alphas.len(),
            labels.len()
        )));
    }
    let total_days = starts
        .iter()
        .map(|&s| (s / DAY_S).floor() as usize + 1)
        .max()
        .unwrap_or(0);

    let mut days = Vec::new();
    let mut skipped = Vec::new();
    for day in 0..total_days {
        let idx: Vec<usize> = (0..starts.len())
            .filter(|&i| {
                let s = starts[i];
                (s / DAY_S).floor() as usize == day && night.contains(s.rem_euclid(DAY_S))
            })
            .collect();
        if idx.is_empty() {
            skipped.push(day);
            continue;
        }
        let n = idx.len() as f64;
        let mean = idx.iter().map(|&i| alphas[i]).sum::<f64>() / n;
        let var = idx.iter().map(|&i| (alphas[i] - mean).powi(2)).sum::<f64>() / n;
        let outside = idx.iter().filter(|&&i| labels[i] != bedroom).count();
        let mut exits = 0usize;
        for w in idx.windows(2) {
            if labels[w[0]] == bedroom && labels[w[1]] != bedroom {
                exits += 1;
            }
        }
        days.push(SleepSummary {
            day,
            mean_alpha: mean,
            var_alpha: var,
            frac_outside_bedroom: outside as f64 / n,
            bedroom_exits: exits,
            windows: idx.len(),
        });
    }
    Ok(SleepReport { days, skipped_days: skipped })
}
