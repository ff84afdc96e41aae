//! Room schedules: where the wearer is and whether they are moving.
//!
//! A schedule is a list of `(start, room, motion)` entries in time order;
//! consecutive entries may share a room (motion changes while dwelling).
//! All room changes follow the adjacency graph, so ground-truth labels only
//! ever step between adjacent rooms.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::{ActivityProfile, DAY_S, NIGHT_END_S};
use super::layout::HouseLayout;

/// Coarse motion state; drives the accelerometer jerk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    Walking,
    Idle,
    Sleeping,
}

/// One schedule segment, lasting until the next entry's start.
#[derive(Debug, Clone, Copy)]
pub struct ScheduleEntry {
    pub start: f64,
    pub room: usize,
    pub motion: Motion,
}

/// Room in effect at time `t`.
pub fn room_at(schedule: &[ScheduleEntry], t: f64) -> usize {
    match schedule.iter().rposition(|e| e.start <= t) {
        Some(i) => schedule[i].room,
        None => schedule.first().map(|e| e.room).unwrap_or(0),
    }
}

/// Residents head for bed at 23:30; the sleep window proper starts at 00:00.
const WIND_DOWN_S: f64 = 23.5 * 3600.0;

/// Seconds to cross one doorway.
fn hop_seconds(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(15.0..30.0)
}

/// Scripted technician tour: depth-first over the adjacency graph from room
/// 0, walking each edge there and back, dwelling in every room on first
/// visit. Dwells are scaled so the total duration is exactly
/// `minutes * 60`.
pub fn walkthrough_schedule(
    layout: &HouseLayout,
    minutes: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<ScheduleEntry> {
    let nb = layout.neighbours();
    // Depth-first route with explicit backtracking: every step is adjacent.
    let mut route = vec![0usize];
    let mut visited = vec![false; layout.room_count()];
    fn dfs(room: usize, nb: &[Vec<usize>], visited: &mut [bool], route: &mut Vec<usize>) {
        visited[room] = true;
        for &n in &nb[room] {
            if !visited[n] {
                route.push(n);
                dfs(n, nb, visited, route);
                route.push(room);
            }
        }
    }
    dfs(0, &nb, &mut visited, &mut route);

    let total = minutes * 60.0;
    let first_visits = layout.room_count() as f64;
    let transits = (route.len() as f64 - first_visits).max(0.0);
    // Short hop for revisits, the rest split evenly over first visits.
    let hop = (20.0_f64).min(total / (route.len() as f64 * 2.0));
    let dwell = (total - transits * hop) / first_visits;

    let mut seen = vec![false; layout.room_count()];
    let mut entries = Vec::with_capacity(route.len() * 2);
    let mut t = 0.0;
    for &room in &route {
        if !seen[room] {
            seen[room] = true;
            // Wander in for a moment, then stand and annotate.
            let walk = (dwell * 0.2).min(30.0);
            entries.push(ScheduleEntry { start: t, room, motion: Motion::Walking });
            entries.push(ScheduleEntry { start: t + walk, room, motion: Motion::Idle });
            t += dwell;
        } else {
            entries.push(ScheduleEntry { start: t, room, motion: Motion::Walking });
            t += hop;
        }
    }
    // Deterministic jitter of interior boundaries keeps dwell lengths from
    // being perfectly periodic without changing the total duration.
    for i in 1..entries.len() {
        let jitter = rng.gen_range(-2.0..2.0);
        let lo = entries[i - 1].start + 1.0;
        let hi = if i + 1 < entries.len() { entries[i + 1].start - 1.0 } else { total - 1.0 };
        if lo < hi {
            entries[i].start = (entries[i].start + jitter).clamp(lo, hi);
        }
    }
    entries
}

/// Free-living semi-Markov schedule over whole days.
///
/// Nights (00:00-06:00) are spent asleep in `bedroom` apart from
/// profile-driven excursions; days are random dwells of 10-45 minutes with
/// uniform moves to adjacent rooms; everyone heads back to the bedroom at
/// 23:30. The RNG draw sequence depends only on the schedule shape and
/// `night_exit_prob`, never on jerk magnitudes, so personas differing only
/// in jerk produce identical schedules from the same seed.
pub fn free_living_schedule(
    layout: &HouseLayout,
    days: u32,
    bedroom: usize,
    profile: &ActivityProfile,
    rng: &mut ChaCha8Rng,
) -> Vec<ScheduleEntry> {
    let total = days as f64 * DAY_S;
    let nb = layout.neighbours();
    // Night excursions go to the bathroom when the layout names one.
    let night_target = layout
        .room_index("bathroom")
        .filter(|&b| b != bedroom)
        .unwrap_or_else(|| nb[bedroom][0]);

    let mut entries = vec![ScheduleEntry { start: 0.0, room: bedroom, motion: Motion::Sleeping }];
    let mut t = 0.0;
    let mut room = bedroom;

    // Walks the shortest path to `target`, pushing one Walking entry per hop.
    let walk_to = |entries: &mut Vec<ScheduleEntry>,
                   t: &mut f64,
                   room: &mut usize,
                   target: usize,
                   rng: &mut ChaCha8Rng| {
        for &hop in layout.shortest_path(*room, target).iter().skip(1) {
            entries.push(ScheduleEntry { start: *t, room: hop, motion: Motion::Walking });
            *t += hop_seconds(rng);
        }
        *room = target;
    };

    while t < total {
        let day_start = (t / DAY_S).floor() * DAY_S;
        let tod = t - day_start;
        if tod < NIGHT_END_S {
            // Sleep in bouts; after each bout maybe get up briefly.
            let bout = rng.gen_range(1500.0..3300.0);
            let bout_end = (t + bout).min(day_start + NIGHT_END_S).min(total);
            t = bout_end;
            if t >= total || t - day_start >= NIGHT_END_S {
                continue;
            }
            if rng.gen::<f64>() < profile.night_exit_prob {
                walk_to(&mut entries, &mut t, &mut room, night_target, rng);
                entries.push(ScheduleEntry { start: t, room, motion: Motion::Idle });
                t += rng.gen_range(120.0..420.0);
                walk_to(&mut entries, &mut t, &mut room, bedroom, rng);
                entries.push(ScheduleEntry { start: t, room, motion: Motion::Sleeping });
            }
        } else if tod >= WIND_DOWN_S {
            // Head to bed and sleep through midnight.
            if room != bedroom {
                walk_to(&mut entries, &mut t, &mut room, bedroom, rng);
            }
            entries.push(ScheduleEntry { start: t, room, motion: Motion::Sleeping });
            t = day_start + DAY_S;
        } else {
            // Daytime: first get out of bed, then wander room to room.
            if tod < NIGHT_END_S + 1.0 && room == bedroom {
                entries.push(ScheduleEntry { start: t, room, motion: Motion::Idle });
                t += rng.gen_range(300.0..900.0);
            }
            let next = nb[room][rng.gen_range(0..nb[room].len())];
            walk_to(&mut entries, &mut t, &mut room, next, rng);
            entries.push(ScheduleEntry { start: t, room, motion: Motion::Idle });
            let dwell = rng.gen_range(600.0..2700.0);
            t = (t + dwell).min(day_start + WIND_DOWN_S).min(total);
        }
    }
    entries.retain(|e| e.start < total);
    entries
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use crate::sim::config::SimConfig;

    #[test]
    fn walkthrough_visits_every_room_and_lasts_exactly() {
        let layout = HouseLayout::demo();
        let mut rng = stream_rng(3, Stream::Schedule);
        let sched = walkthrough_schedule(&layout, 40.0, &mut rng);
        let mut rooms: Vec<usize> = sched.iter().map(|e| e.room).collect();
        rooms.sort_unstable();
        rooms.dedup();
        assert_eq!(rooms, vec![0, 1, 2, 3, 4]);
        assert!(sched.windows(2).all(|w| w[0].start < w[1].start));
        assert!(sched.last().unwrap().start < 2400.0);
    }

    #[test]
    fn schedule_moves_are_adjacent() {
        let layout = HouseLayout::demo();
        let nb = layout.neighbours();
        let cfg = SimConfig::default();
        let mut rng = stream_rng(11, Stream::Schedule);
        let sched = free_living_schedule(&layout, 2, 3, &cfg.resident_b_profile, &mut rng);
        for w in sched.windows(2) {
            let (a, b) = (w[0].room, w[1].room);
            assert!(a == b || nb[a].contains(&b), "jump {a} -> {b} not adjacent");
        }
    }

    #[test]
    fn nights_are_mostly_bedroom() {
        let layout = HouseLayout::demo();
        let cfg = SimConfig::default();
        let mut rng = stream_rng(5, Stream::Schedule);
        let sched = free_living_schedule(&layout, 1, 3, &cfg.resident_b_profile, &mut rng);
        let mut in_bed = 0usize;
        let mut night = 0usize;
        let mut t = 0.0;
        while t < DAY_S {
            if t % DAY_S < NIGHT_END_S {
                night += 1;
                if room_at(&sched, t) == 3 {
                    in_bed += 1;
                }
            }
            t += 10.0;
        }
        assert!(in_bed as f64 >= 0.7 * night as f64, "{in_bed}/{night}");
    }
}
