//! Plug-in mutual information between paired room-occupancy sequences,
//! optionally lagged and stratified by time of day.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sim::DAY_S;

/// Aligned room sequences for two residents with shared window starts.
#[derive(Debug, Clone)]
pub struct OccupancyPair {
    pub starts: Vec<f64>,
    pub room_a: Vec<usize>,
    pub room_b: Vec<usize>,
}

impl OccupancyPair {
    pub fn new(starts: Vec<f64>, room_a: Vec<usize>, room_b: Vec<usize>) -> Result<Self> {
        if starts.len() != room_a.len() || starts.len() != room_b.len() {
            return Err(Error::Misaligned(format!(
                "pair lengths differ: {} starts, {} vs {} rooms",
                starts.len(),
                room_a.len(),
                room_b.len()
            )));
        }
        Ok(OccupancyPair { starts, room_a, room_b })
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }
}

/// Plug-in entropy in bits over a bag of counts, summed in value-sorted
/// order so the result depends only on the count multiset.
fn entropy_of_counts(mut counts: Vec<f64>, n: f64) -> f64 {
    counts.sort_by(|a, b| a.partial_cmp(b).expect("finite counts"));
    counts
        .iter()
        .map(|&c| {
            let p = c / n;
            if p > 0.0 {
                -p * p.log2()
            } else {
                0.0 // the 0 log 0 = 0 convention
            }
        })
        .sum()
}

/// Plug-in MI in bits from empirical joint counts, computed as
/// `H(A) + H(B) - H(A, B)`. Because each entropy runs over a sorted count
/// multiset, swapping the two sequences gives a bit-identical result.
pub fn mutual_information_counts<I>(pairs: I) -> Result<f64>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut n = 0.0;
    for (a, b) in pairs {
        *joint.entry((a, b)).or_insert(0.0) += 1.0;
        n += 1.0;
    }
    if n == 0.0 {
        return Err(Error::EmptyInput("mutual information over no windows"));
    }
    let mut pa: BTreeMap<usize, f64> = BTreeMap::new();
    let mut pb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(a, b), &c) in &joint {
        *pa.entry(a).or_insert(0.0) += c;
        *pb.entry(b).or_insert(0.0) += c;
    }
    let h_a = entropy_of_counts(pa.into_values().collect(), n);
    let h_b = entropy_of_counts(pb.into_values().collect(), n);
    let h_ab = entropy_of_counts(joint.into_values().collect(), n);
    Ok((h_a + h_b - h_ab).max(0.0))
}

/// MI of the full pair at lag 0.
pub fn mutual_information(pair: &OccupancyPair) -> Result<f64> {
    mutual_information_counts(pair.room_a.iter().copied().zip(pair.room_b.iter().copied()))
}

/// Plug-in entropy (bits) of one sequence; the MI of a perfectly
/// shadowed pair equals this.
pub fn plug_in_entropy(labels: &[usize]) -> f64 {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0.0) += 1.0;
    }
    let n = labels.len() as f64;
    counts.values().map(|c| {
        let p = c / n;
        -p * p.log2()
    }).sum()
}

/// Daypart partition: `segments` equal divisions of the day starting at
/// midnight (4 segments = the 00/06/12/18 h boundaries).
#[derive(Debug, Clone, Copy)]
pub struct Dayparts {
    pub segments: usize,
}

impl Default for Dayparts {
    fn default() -> Self {
        Dayparts { segments: 4 }
    }
}

impl Dayparts {
    pub fn of(&self, time_of_day: f64) -> usize {
        let width = DAY_S / self.segments as f64;
        ((time_of_day / width).floor() as usize).min(self.segments - 1)
    }
}

/// Buckets with fewer windows than this are reported absent.
pub const MIN_BUCKET_WINDOWS: usize = 30;

/// MI per daypart with resident B shifted by `lag` windows: window `t` of A
/// pairs with window `t + lag` of B, bucketed by the daypart of A's
/// timestamp. Buckets under [`MIN_BUCKET_WINDOWS`] are omitted.
pub fn stratify_mi(
    pair: &OccupancyPair,
    dayparts: Dayparts,
    lag: usize,
) -> Result<BTreeMap<usize, f64>> {
    let n = pair.len();
    let mut buckets: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for t in 0..n.saturating_sub(lag) {
        let part = dayparts.of(pair.starts[t].rem_euclid(DAY_S));
        buckets.entry(part).or_default().push((pair.room_a[t], pair.room_b[t + lag]));
    }
    let mut out = BTreeMap::new();
    for (part, pairs) in buckets {
        if pairs.len() >= MIN_BUCKET_WINDOWS {
            out.insert(part, mutual_information_counts(pairs)?);
        }
    }
    Ok(out)
}
