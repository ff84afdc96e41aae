//! Synthetic house, walkthrough and free-living trace generation.
//!
//! Stands in for a real sensor deployment: a log-distance radio channel
//! with Gaussian shadowing and distance-coupled packet drop produces RSSI
//! streams at 5 Hz per gateway, and a persona-driven jerk model produces
//! 20 Hz tri-axial accelerometer streams. Free-living traces start at
//! midnight, so time-of-day is `t mod 86400`.

pub mod channel;
pub mod config;
pub mod layout;
pub mod schedule;
pub mod trace;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
pub use channel::{clamp_rssi, rssi_from_position};
pub use config::{ActivityProfile, Persona, SimConfig, ACCEL_HZ, DAY_S, NIGHT_END_S, NIGHT_START_S, RSSI_CEIL, RSSI_FLOOR, RSSI_HZ};
pub use layout::{distance, HouseLayout, Point};
pub use schedule::{Motion, ScheduleEntry};
pub use trace::{AccelSample, GroundTruthTrace, LabelTimeline, RssiSample};

/// E[|N(0,1) - N(0,1)'|] = 2/sqrt(pi); dividing by it makes the mean
/// absolute first difference of the synthesised axes equal the profile's
/// jerk scale.
const JERK_TO_AXIS_STD: f64 = 0.886_226_925_452_758;

/// Scripted walkthrough trace: the technician tours every room for a total
/// of `cfg.walkthrough_minutes`, with the wearable in a backpack (low
/// jerk). No covariate shift is applied.
pub fn simulate_walkthrough(layout: &HouseLayout, cfg: &SimConfig) -> Result<GroundTruthTrace> {
    layout.validate_connectivity()?;
    cfg.validate()?;
    let cfg = cfg.clamped();
    let mut schedule_rng = stream_rng(cfg.seed, Stream::Schedule);
    let schedule = schedule::walkthrough_schedule(layout, cfg.walkthrough_minutes, &mut schedule_rng);
    let duration = cfg.walkthrough_minutes * 60.0;
    Ok(synthesise(
        layout,
        &cfg,
        &schedule,
        duration,
        Persona::TechnicianWalkthrough,
        0.0,
    ))
}

/// Free-living (test) trace for one resident over whole days, starting at
/// midnight. `cfg.shift_offset` dB is added to every emitted RSSI value,
/// and the persona's activity profile shapes both the accelerometer stream
/// and night-time restlessness.
pub fn simulate_free_living(
    layout: &HouseLayout,
    cfg: &SimConfig,
    days: u32,
    persona: Persona,
) -> Result<GroundTruthTrace> {
    if persona == Persona::TechnicianWalkthrough {
        return Err(Error::InvalidConfig(
            "free-living traces need a resident persona".into(),
        ));
    }
    if days == 0 {
        return Err(Error::InvalidConfig("days must be >= 1".into()));
    }
    layout.validate()?;
    cfg.validate()?;
    let cfg = cfg.clamped();
    let bedroom = layout.room_index("bedroom").unwrap_or(0);
    let profile = cfg.profile(persona);
    let mut schedule_rng = stream_rng(cfg.seed, Stream::Schedule);
    let schedule =
        schedule::free_living_schedule(layout, days, bedroom, &profile, &mut schedule_rng);
    let duration = days as f64 * DAY_S;
    Ok(synthesise(layout, &cfg, &schedule, duration, persona, cfg.shift_offset))
}

/// Renders a schedule into sensor streams.
///
/// The channel and accelerometer draw from separate RNG streams, and the
/// accelerometer consumes a fixed number of draws per sample, so traces
/// with identical schedules differ only where their jerk scales differ.
fn synthesise(
    layout: &HouseLayout,
    cfg: &SimConfig,
    schedule: &[ScheduleEntry],
    duration: f64,
    persona: Persona,
    shift_offset: f64,
) -> GroundTruthTrace {
    let mut channel_rng = stream_rng(cfg.seed, Stream::Channel);
    let mut accel_rng = stream_rng(cfg.seed, Stream::Accel);
    let profile = cfg.profile(persona);

    // The shift enters before clamping, identically to shifting the
    // reference power.
    let mut shifted = cfg.clone();
    shifted.ref_rssi_at_1m += shift_offset;

    let gateways = layout.gateway_positions.len();
    let rssi_slots = (duration * RSSI_HZ).round() as usize;
    let mut rssi = Vec::with_capacity(rssi_slots * gateways);
    let mut cursor = 0usize;
    for k in 0..rssi_slots {
        let t = k as f64 / RSSI_HZ;
        while cursor + 1 < schedule.len() && schedule[cursor + 1].start <= t {
            cursor += 1;
        }
        let pos = layout.room_positions[schedule[cursor].room];
        for (gw, &gw_pos) in layout.gateway_positions.iter().enumerate() {
            let value = rssi_from_position(pos, gw_pos, &shifted, &mut channel_rng);
            rssi.push(RssiSample { t, gateway: gw, value });
        }
    }

    let accel_slots = (duration * ACCEL_HZ).round() as usize;
    let mut accel = Vec::with_capacity(accel_slots);
    cursor = 0;
    for k in 0..accel_slots {
        let t = k as f64 / ACCEL_HZ;
        while cursor + 1 < schedule.len() && schedule[cursor + 1].start <= t {
            cursor += 1;
        }
        let jerk = match schedule[cursor].motion {
            Motion::Walking => profile.moving_jerk,
            Motion::Idle => profile.idle_jerk,
            Motion::Sleeping => profile.night_jerk,
        };
        let std = jerk * JERK_TO_AXIS_STD;
        let nx: f64 = accel_rng.sample(StandardNormal);
        let ny: f64 = accel_rng.sample(StandardNormal);
        let nz: f64 = accel_rng.sample(StandardNormal);
        accel.push(AccelSample {
            t,
            x: std * nx,
            y: std * ny,
            z: 1.0 + std * nz,
        });
    }

    let mut segments: Vec<(f64, usize)> = Vec::new();
    for e in schedule {
        match segments.last() {
            Some(&(_, room)) if room == e.room => {}
            _ => segments.push((e.start, e.room)),
        }
    }

    GroundTruthTrace {
        rssi,
        accel,
        labels: LabelTimeline { segments },
        persona,
        duration,
        rooms: layout.rooms.clone(),
    }
}
