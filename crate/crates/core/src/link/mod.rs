//! Command-and-control link models.
//!
//! * amplifier back-off shrinks the usable cell radius by `10^(dB/20)`
//!   under free-space (path-loss exponent 2) propagation;
//! * propagation delay is distance over the speed of light, per hop;
//! * independent parallel links combine as `1 − Π(1 − A_i)`;
//! * the fading envelope is Ricean with unit mean power, Rayleigh at `K = 0`;
//! * outages come from a two-state blockage chain plus an instantaneous fade
//!   margin test, calibrated to a target availability.

mod fading;
mod outage;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fading::{ricean_power_cdf, sample_fading, ChannelModel, FadingSampler};
pub use outage::{link_outage_process, LinkClass, LinkProcess, LinkState, OutageModel};

pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Lowest elevation angle assumed for satellite and HAPS geometry.
pub const MIN_ELEVATION_DEG: f64 = 10.0;
/// Required availability of a C2 link.
pub const C2_AVAILABILITY_REQUIREMENT: f64 = 0.99999;
/// C2 data rates must stay strictly below this.
pub const C2_MAX_RATE_KBPS: f64 = 300.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkError {
    #[error("invalid distance: {0}")]
    InvalidDistance(String),
    #[error("availability list is empty")]
    EmptyList,
    #[error("availability {0} is outside (0, 1)")]
    InvalidAvailability(f64),
    #[error("invalid link technology {name}: {reason}")]
    InvalidTechnology { name: String, reason: String },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("availability {target} cannot be reached: the channel allows [{low}, {high}]")]
    CalibrationInfeasible { target: f64, low: f64, high: f64 },
}

/// Range reduction factor of a back-off under free-space loss.
pub fn range_factor(backoff_db: f64) -> f64 {
    range_factor_with_exponent(backoff_db, 2.0)
}

/// Range reduction factor `10^(dB / (10·n))` for path-loss exponent `n`.
pub fn range_factor_with_exponent(backoff_db: f64, path_loss_exponent: f64) -> f64 {
    10f64.powf(backoff_db / (10.0 * path_loss_exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Terrestrial,
    Haps,
    Leo,
    Meo,
    Geo,
}

impl Platform {
    pub const ALL: [Platform; 5] = [Self::Terrestrial, Self::Haps, Self::Leo, Self::Meo, Self::Geo];

    /// Default platform altitude in km; terrestrial stations have none.
    pub fn default_altitude_km(self) -> Option<f64> {
        match self {
            Self::Terrestrial => None,
            Self::Haps => Some(20.0),
            Self::Leo => Some(600.0),
            Self::Meo => Some(10_000.0),
            Self::Geo => Some(36_000.0),
        }
    }

    pub fn is_relay(self) -> bool {
        self != Self::Terrestrial
    }

    pub fn is_geostationary(self) -> bool {
        self == Self::Geo
    }
}

/// Ground-to-platform distance for a platform at `altitude_km` seen at
/// `elevation_deg` above the horizon of a spherical Earth.
pub fn slant_range_km(altitude_km: f64, elevation_deg: f64) -> f64 {
    let r = EARTH_RADIUS_KM;
    let e = elevation_deg.to_radians();
    ((r + altitude_km).powi(2) - (r * e.cos()).powi(2)).sqrt() - r * e.sin()
}

/// Slant range at [`MIN_ELEVATION_DEG`], the longest hop the platform serves.
pub fn worst_case_slant_km(platform: Platform) -> Option<f64> {
    platform
        .default_altitude_km()
        .map(|h| slant_range_km(h, MIN_ELEVATION_DEG))
}

fn hop_km(platform: Platform, slant_km: Option<f64>) -> Result<f64, LinkError> {
    match slant_km {
        Some(d) if d.is_finite() && d > 0.0 => Ok(d),
        Some(d) => Err(LinkError::InvalidDistance(format!("slant range {d} km must be > 0"))),
        None => platform.default_altitude_km().ok_or_else(|| {
            LinkError::InvalidDistance("terrestrial links need an explicit distance".into())
        }),
    }
}

/// One-hop propagation delay in ms over `slant_km`, or over the platform's
/// nadir altitude when no distance is given.
pub fn propagation_delay(platform: Platform, slant_km: Option<f64>) -> Result<f64, LinkError> {
    Ok(hop_km(platform, slant_km)? / SPEED_OF_LIGHT_KM_S * 1e3)
}

/// Ground → platform → ground delay in ms through a bent-pipe relay (two
/// hops of `slant_km`, no inter-satellite links).
pub fn bent_pipe_delay(platform: Platform, slant_km: Option<f64>) -> Result<f64, LinkError> {
    Ok(2.0 * propagation_delay(platform, slant_km)?)
}

/// A C2 link technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkTechnology {
    pub name: String,
    pub base_cell_range_km: f64,
    #[serde(default)]
    pub backoff_db: f64,
    pub data_rate_kbps: f64,
    pub platform: Platform,
    pub per_link_availability: f64,
}

impl LinkTechnology {
    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |reason: &str| {
            Err(LinkError::InvalidTechnology {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if !(self.base_cell_range_km > 0.0 && self.base_cell_range_km.is_finite()) {
            return bad("base_cell_range_km must be > 0");
        }
        if !(self.backoff_db >= 0.0 && self.backoff_db.is_finite()) {
            return bad("backoff_db must be >= 0");
        }
        if !(self.data_rate_kbps > 0.0 && self.data_rate_kbps.is_finite()) {
            return bad("data_rate_kbps must be > 0");
        }
        if !(self.per_link_availability > 0.0 && self.per_link_availability < 1.0) {
            return bad("per_link_availability must be in (0, 1)");
        }
        Ok(())
    }

    /// One-way delay the link adds: cell-edge distance for terrestrial
    /// cells, a nadir bent-pipe relay otherwise.
    pub fn one_way_delay_ms(&self) -> f64 {
        let delay = match self.platform {
            Platform::Terrestrial => propagation_delay(self.platform, Some(effective_cell_range(self))),
            p => bent_pipe_delay(p, None),
        };
        delay.expect("validated technology has a positive distance")
    }
}

/// Cell radius left after the amplifier back-off, km.
pub fn effective_cell_range(tech: &LinkTechnology) -> f64 {
    tech.base_cell_range_km / range_factor(tech.backoff_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiLinkAvailability {
    pub availability: f64,
    pub meets_c2: bool,
}

/// Availability of independent parallel links, `1 − Π(1 − A_i)`.
pub fn multi_link_availability(links: &[f64]) -> Result<MultiLinkAvailability, LinkError> {
    if links.is_empty() {
        return Err(LinkError::EmptyList);
    }
    let mut unavailable = 1.0;
    for &a in links {
        if !(a > 0.0 && a < 1.0) {
            return Err(LinkError::InvalidAvailability(a));
        }
        unavailable *= 1.0 - a;
    }
    let availability = 1.0 - unavailable;
    Ok(MultiLinkAvailability {
        availability,
        meets_c2: availability >= C2_AVAILABILITY_REQUIREMENT,
    })
}

/// Whether a requested C2 rate is within the limit (strictly below 300 kbps).
pub fn c2_rate_check(requested_kbps: f64) -> bool {
    requested_kbps < C2_MAX_RATE_KBPS
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vdl(backoff_db: f64) -> LinkTechnology {
        LinkTechnology {
            name: "vdl".into(),
            base_cell_range_km: 300.0,
            backoff_db,
            data_rate_kbps: 31.5,
            platform: Platform::Terrestrial,
            per_link_availability: 0.999,
        }
    }

    #[test]
    fn backoff_range_factors() {
        assert_eq!(range_factor(0.0), 1.0);
        assert!((range_factor(12.0) - 3.98).abs() < 0.01);
        assert!((range_factor(18.0) - 7.94).abs() < 0.01);
        assert!((range_factor_with_exponent(12.0, 4.0) - 10f64.powf(0.3)).abs() < 1e-12);
    }

    #[test]
    fn effective_ranges() {
        assert!((effective_cell_range(&vdl(12.0)) - 75.4).abs() < 0.05);
        assert!((effective_cell_range(&vdl(18.0)) - 37.8).abs() < 0.05);
        assert_eq!(effective_cell_range(&vdl(0.0)), 300.0);
    }

    #[test]
    fn delays() {
        let leo = bent_pipe_delay(Platform::Leo, None).unwrap();
        assert!((leo - 4.003).abs() < 0.001, "{leo}");
        let haps = propagation_delay(Platform::Haps, None).unwrap();
        assert!((haps - 0.0667).abs() < 1e-4);
        assert!(haps < 1.6);
        let geo = bent_pipe_delay(Platform::Geo, worst_case_slant_km(Platform::Geo)).unwrap();
        assert!(geo <= 272.4, "{geo}");
        assert!(matches!(
            propagation_delay(Platform::Terrestrial, None),
            Err(LinkError::InvalidDistance(_))
        ));
        assert!(propagation_delay(Platform::Leo, Some(-1.0)).is_err());
        let d1 = propagation_delay(Platform::Meo, Some(1000.0)).unwrap();
        let d2 = propagation_delay(Platform::Meo, Some(2000.0)).unwrap();
        assert_eq!(2.0 * d1, d2);
    }

    #[test]
    fn ngso_lower_bound() {
        // 14.2 ms holds for the MEO default but not for a 600 km LEO, even
        // at the lowest usable elevation.
        assert!(bent_pipe_delay(Platform::Meo, None).unwrap() >= 14.2);
        let leo_worst = bent_pipe_delay(Platform::Leo, worst_case_slant_km(Platform::Leo)).unwrap();
        assert!(leo_worst < 14.2, "{leo_worst}");
    }

    #[test]
    fn slant_geometry() {
        assert!((slant_range_km(600.0, 90.0) - 600.0).abs() < 1e-9);
        assert!(slant_range_km(600.0, 10.0) > slant_range_km(600.0, 30.0));
    }

    #[test]
    fn availability_composition() {
        let one = multi_link_availability(&[0.999]).unwrap();
        assert_eq!(one.availability, 0.999);
        assert!(!one.meets_c2);
        let two = multi_link_availability(&[0.99, 0.99]).unwrap();
        assert!((two.availability - 0.9999).abs() < 1e-15);
        let three = multi_link_availability(&[0.999, 0.999, 0.999]).unwrap();
        assert!((three.availability - 0.999_999_999).abs() < 1e-15);
        assert!(three.meets_c2);
        assert_eq!(multi_link_availability(&[]).unwrap_err(), LinkError::EmptyList);
        assert!(multi_link_availability(&[1.0]).is_err());
    }

    #[test]
    fn rate_limit_is_strict() {
        assert!(c2_rate_check(0.0));
        assert!(c2_rate_check(299.0));
        assert!(!c2_rate_check(300.0));
    }

    #[test]
    fn technology_validation() {
        assert!(vdl(12.0).validate().is_ok());
        let mut t = vdl(12.0);
        t.per_link_availability = 1.0;
        assert!(t.validate().is_err());
        assert!((vdl(12.0).one_way_delay_ms() - 75.4 / SPEED_OF_LIGHT_KM_S * 1e3).abs() < 1e-3);
    }
}
