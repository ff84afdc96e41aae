//! Per-room activity totals by calendar day.

use crate::error::{Error, Result};
use crate::sim::DAY_S;

/// One day's activity split by decoded room. The day total is defined as
/// the sum of the room totals, so the partition identity is exact.
#[derive(Debug, Clone)]
pub struct ActivityByDay {
    pub day: usize,
    pub per_room: Vec<f64>,
    pub total: f64,
}

/// Sums window activity into (day, decoded room) cells.
pub fn activity_totals(
    starts: &[f64],
    alphas: &[f64],
    labels: &[usize],
    rooms: usize,
) -> Result<Vec<ActivityByDay>> {
    if starts.len() != alphas.len() || starts.len() != labels.len() {
        return Err(Error::Misaligned(format!(
            "{} starts, {} alphas, {} labels",
            starts.len(),
            alphas.len(),
            labels.len()
        )));
    }
    let mut days: Vec<ActivityByDay> = Vec::new();
    for ((&start, &alpha), &room) in starts.iter().zip(alphas).zip(labels) {
        if room >= rooms {
            return Err(Error::LabelOutOfRange { label: room, classes: rooms });
        }
        let day = (start / DAY_S).floor() as usize;
        while days.len() <= day {
            days.push(ActivityByDay { day: days.len(), per_room: vec![0.0; rooms], total: 0.0 });
        }
        days[day].per_room[room] += alpha;
    }
    for d in &mut days {
        d.total = d.per_room.iter().sum();
    }
    Ok(days)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use rand::Rng;

    #[test]
    fn zero_activity_gives_zero_totals() {
        let starts = vec![0.0, 2.5, 5.0];
        let out = activity_totals(&starts, &[0.0; 3], &[0, 1, 2], 3).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].per_room.iter().all(|&v| v == 0.0));
        assert_eq!(out[0].total, 0.0);
    }

    #[test]
    fn single_room_total_equals_day_total() {
        let starts = vec![0.0, 2.5, 5.0, 7.5];
        let alphas = vec![0.1, 0.3, 0.2, 0.15];
        let out = activity_totals(&starts, &alphas, &[1; 4], 3).unwrap();
        assert_eq!(out[0].per_room[1], out[0].total);
        assert_eq!(out[0].per_room[0], 0.0);
    }

    #[test]
    fn room_sums_partition_day_totals_exactly() {
        let mut rng = stream_rng(19, Stream::Test);
        let n = 5000;
        let starts: Vec<f64> = (0..n).map(|k| k as f64 * 60.0).collect(); // spans days
        let alphas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.5)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let out = activity_totals(&starts, &alphas, &labels, 4).unwrap();
        assert!(out.len() > 1);
        for day in &out {
            let sum: f64 = day.per_room.iter().sum();
            assert_eq!(sum, day.total, "day {}", day.day);
        }
    }

    #[test]
    fn misaligned_inputs_rejected() {
        assert!(activity_totals(&[0.0], &[0.0, 0.1], &[0], 2).is_err());
    }
}
