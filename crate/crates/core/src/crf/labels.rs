//! Domain-knowledge label complementing: residents sleep in their bedroom
//! at night, so quiet night windows can join the supervised pool as
//! pseudo-labels. Windows whose activity sits below the wear floor are
//! skipped entirely (an unworn wearable produces near-zero jerk, and its
//! location says nothing about the resident).

use crate::sim::DAY_S;

/// Night span within a day, seconds since midnight: `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NightSpan {
    pub start: f64,
    pub end: f64,
}

impl Default for NightSpan {
    fn default() -> Self {
        NightSpan { start: 0.0, end: 6.0 * 3600.0 }
    }
}

impl NightSpan {
    pub fn contains(&self, time_of_day: f64) -> bool {
        time_of_day >= self.start && time_of_day < self.end
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Indices of windows eligible for a PSEUDO bedroom label: window start
/// inside the night span (traces begin at midnight, so time-of-day is
/// `start mod 86400`) and activity strictly above `wear_floor`.
pub fn complement_labels(
    starts: &[f64],
    alphas: &[f64],
    night: NightSpan,
    wear_floor: f64,
) -> Vec<usize> {
    starts
        .iter()
        .zip(alphas)
        .enumerate()
        .filter(|(_, (&start, &alpha))| {
            night.contains(start.rem_euclid(DAY_S)) && alpha > wear_floor
        })
        .map(|(i, _)| i)
        .collect()
}
