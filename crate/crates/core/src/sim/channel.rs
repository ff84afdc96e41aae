//! Log-distance radio channel with Gaussian shadowing and distance-coupled
//! packet loss.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::{SimConfig, RSSI_CEIL, RSSI_FLOOR};
use super::layout::{distance, Point};

/// Margin keeping clamped values strictly inside the open (-120, 0) range.
const CLAMP_MARGIN: f64 = 0.01;

/// One received sample at a gateway: a dBm value or a dropped packet.
///
/// The drop decision is drawn before the shadowing noise, so a dropped
/// sample consumes exactly one uniform draw from the channel stream.
pub fn rssi_from_position<R: Rng>(
    pos: Point,
    gateway: Point,
    cfg: &SimConfig,
    rng: &mut R,
) -> Option<f64> {
    let d = distance(pos, gateway).max(1e-3);
    let p_drop = (cfg.drop_base_prob + cfg.drop_distance_coeff * d).clamp(0.0, 1.0);
    if rng.gen::<f64>() < p_drop {
        return None;
    }
    let mut value = cfg.ref_rssi_at_1m - 10.0 * cfg.path_loss_exponent * d.log10();
    if cfg.noise_std > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_std).expect("noise_std validated >= 0");
        value += normal.sample(rng);
    }
    Some(clamp_rssi(value))
}

/// Clamp a dBm value strictly inside the open interval (-120, 0).
pub fn clamp_rssi(value: f64) -> f64 {
    value.clamp(RSSI_FLOOR + CLAMP_MARGIN, RSSI_CEIL - CLAMP_MARGIN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    fn quiet_cfg() -> SimConfig {
        SimConfig {
            noise_std: 0.0,
            drop_base_prob: 0.0,
            drop_distance_coeff: 0.0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn one_metre_gives_reference_rssi() {
        let cfg = quiet_cfg();
        let mut rng = stream_rng(1, Stream::Channel);
        let v = rssi_from_position([0.0, 0.0], [1.0, 0.0], &cfg, &mut rng).unwrap();
        assert_eq!(v, cfg.ref_rssi_at_1m);
    }

    #[test]
    fn ten_metres_exponent_two_drops_twenty_db() {
        // Hand evaluation: -40 - 10*2*log10(10) = -60.
        let cfg = SimConfig {
            path_loss_exponent: 2.0,
            ref_rssi_at_1m: -40.0,
            ..quiet_cfg()
        };
        let mut rng = stream_rng(1, Stream::Channel);
        let v = rssi_from_position([0.0, 0.0], [10.0, 0.0], &cfg, &mut rng).unwrap();
        assert!((v - (-60.0)).abs() < 1e-12);
    }

    #[test]
    fn saturated_drop_probability_always_misses() {
        let cfg = SimConfig {
            drop_base_prob: 1.0,
            ..SimConfig::default()
        };
        let mut rng = stream_rng(1, Stream::Channel);
        for _ in 0..100 {
            assert!(rssi_from_position([0.0, 0.0], [3.0, 4.0], &cfg, &mut rng).is_none());
        }
    }

    #[test]
    fn values_stay_strictly_inside_open_interval() {
        let cfg = SimConfig {
            noise_std: 40.0,
            drop_base_prob: 0.0,
            drop_distance_coeff: 0.0,
            ..SimConfig::default()
        };
        let mut rng = stream_rng(7, Stream::Channel);
        for _ in 0..2000 {
            let v = rssi_from_position([0.0, 0.0], [30.0, 0.0], &cfg, &mut rng).unwrap();
            assert!(v > RSSI_FLOOR && v < RSSI_CEIL, "value {v} escaped range");
        }
    }
}
