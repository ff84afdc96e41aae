//! Simulation configuration and persona activity profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Who is carrying the wearable in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Persona {
    /// Installation technician performing the scripted walkthrough.
    TechnicianWalkthrough,
    /// First resident (sound sleeper by default).
    ResidentA,
    /// Second resident (disturbed sleeper by default).
    ResidentB,
}

impl Persona {
    pub fn as_str(&self) -> &'static str {
        match self {
            Persona::TechnicianWalkthrough => "technician_walkthrough",
            Persona::ResidentA => "resident_a",
            Persona::ResidentB => "resident_b",
        }
    }
}

/// Accelerometer texture for one persona: baseline jerk magnitudes (g-units)
/// while moving and while at rest, plus how restless their nights are.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ActivityProfile {
    /// Jerk scale while walking between or around rooms.
    pub moving_jerk: f64,
    /// Jerk scale while stationary during the day.
    pub idle_jerk: f64,
    /// Jerk scale while in bed at night.
    pub night_jerk: f64,
    /// Per-transition-opportunity probability of leaving the bedroom at night.
    pub night_exit_prob: f64,
}

/// All knobs of the synthetic data generator.
///
/// Defaults give a plausible desk-scale house; none of the channel numbers
/// are calibrated against real hardware.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub seed: u64,
    /// Log-distance path-loss exponent.
    pub path_loss_exponent: f64,
    /// RSSI at 1 m from a gateway, dBm.
    pub ref_rssi_at_1m: f64,
    /// Gaussian shadowing std, dB.
    pub noise_std: f64,
    /// Distance-independent packet-drop probability.
    pub drop_base_prob: f64,
    /// Additional drop probability per metre of transmitter-gateway distance.
    pub drop_distance_coeff: f64,
    /// Scripted walkthrough duration, minutes.
    pub walkthrough_minutes: f64,
    /// Constant dB offset added to free-living (test) RSSI only.
    pub shift_offset: f64,
    /// Jerk/restlessness profile per persona.
    pub technician_profile: ActivityProfile,
    pub resident_a_profile: ActivityProfile,
    pub resident_b_profile: ActivityProfile,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            path_loss_exponent: 2.2,
            ref_rssi_at_1m: -40.0,
            noise_std: 2.5,
            drop_base_prob: 0.05,
            drop_distance_coeff: 0.02,
            walkthrough_minutes: 40.0,
            shift_offset: 0.0,
            // Technician keeps the wearable in a backpack: low jerk throughout.
            technician_profile: ActivityProfile {
                moving_jerk: 0.015,
                idle_jerk: 0.004,
                night_jerk: 0.002,
                night_exit_prob: 0.0,
            },
            resident_a_profile: ActivityProfile {
                moving_jerk: 0.06,
                idle_jerk: 0.012,
                night_jerk: 0.002,
                night_exit_prob: 0.02,
            },
            resident_b_profile: ActivityProfile {
                moving_jerk: 0.06,
                idle_jerk: 0.012,
                night_jerk: 0.02,
                night_exit_prob: 0.25,
            },
        }
    }
}

impl SimConfig {
    pub fn profile(&self, persona: Persona) -> ActivityProfile {
        match persona {
            Persona::TechnicianWalkthrough => self.technician_profile,
            Persona::ResidentA => self.resident_a_profile,
            Persona::ResidentB => self.resident_b_profile,
        }
    }

    /// Clamps probabilities into [0, 1] and rejects negative spreads.
    pub fn validate(&self) -> Result<()> {
        if self.noise_std < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        if self.walkthrough_minutes <= 0.0 {
            return Err(Error::InvalidConfig("walkthrough_minutes must be > 0".into()));
        }
        Ok(())
    }

    /// Copy with probabilities clamped into [0, 1].
    pub fn clamped(&self) -> SimConfig {
        let mut cfg = self.clone();
        cfg.drop_base_prob = cfg.drop_base_prob.clamp(0.0, 1.0);
        cfg.drop_distance_coeff = cfg.drop_distance_coeff.max(0.0);
        cfg
    }
}

/// Nominal wearable sampling rates.
pub const RSSI_HZ: f64 = 5.0;
pub const ACCEL_HZ: f64 = 20.0;

/// Valid RSSI values live strictly inside this open interval (dBm).
pub const RSSI_FLOOR: f64 = -120.0;
pub const RSSI_CEIL: f64 = 0.0;

/// Night window used for bedroom heuristics and sleep analysis: [0h, 6h).
pub const NIGHT_START_S: f64 = 0.0;
pub const NIGHT_END_S: f64 = 6.0 * 3600.0;

/// Seconds per day.
pub const DAY_S: f64 = 86_400.0;
