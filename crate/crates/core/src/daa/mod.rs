//! Detect and avoid.
//!
//! Conflict prediction runs every `detection_period_s` over a window of
//! `lookahead_s`, comparing every pair of [`FlightProfile4D`]s on a fixed
//! time grid. A pair is in conflict when its horizontal distance drops below
//! `separation_min_m + k·σ`, where `σ` combines both vehicles' positioning
//! error ([`PositioningMode`]) and the vertical gap is inside the configured
//! band. Resolution maneuvers only the unmanned aircraft of a pair and
//! escalates through speed reduction, a vectored detour and a lateral offset.

mod detect;
mod positioning;
mod profile;
mod resolve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use detect::{predict_conflicts, predict_pair, ConflictEvent};
pub use positioning::{sample_position_error, PositionSampler, PositioningMode, PositioningModel};
pub use profile::{FlightProfile4D, VehicleKind, Waypoint};
pub use resolve::{
    apply_lateral_offset, apply_speed_reduction, apply_vector, maneuvering_vehicle, resolve, Resolution,
    ResolutionAction, ResolutionStage, Side, StageParameters,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DaaError {
    #[error("time {t} is outside the profile of {vehicle} [{start}, {end}]")]
    OutOfSpan { vehicle: String, t: f64, start: f64, end: f64 },
    #[error("invalid flight profile: {0}")]
    InvalidProfile(String),
    #[error("invalid DAA configuration: {0}")]
    InvalidConfig(String),
    #[error("no conflict is pending between {0} and {1}")]
    NoConflictPending(String, String),
    #[error("profile {0} is not part of the conflict pair")]
    NotInConflict(String),
    #[error("{0} is manned; resolution maneuvers only apply to unmanned aircraft")]
    ManeuverOnManned(String),
    #[error("stages already tried must be a prefix of speed reduction, vector, lateral offset")]
    StageOrder,
    #[error("{stage:?} cannot be applied: {reason}")]
    StageNotApplicable { stage: ResolutionStage, reason: String },
    #[error("conflict between {0} and {1} could not be resolved by any stage")]
    Unresolvable(String, String, Vec<ResolutionAction>),
}

fn default_detection_period() -> f64 {
    120.0
}
fn default_lookahead() -> f64 {
    480.0
}
fn default_vertical_band() -> f64 {
    100.0
}
fn default_sample_step() -> f64 {
    1.0
}
fn default_speed_factor() -> f64 {
    0.8
}
fn default_vector_offset_factor() -> f64 {
    2.0
}
fn default_lateral_offset_factor() -> f64 {
    1.5
}
fn default_vector_half_window() -> f64 {
    120.0
}
fn default_offset_ramp() -> f64 {
    60.0
}

/// Detection cadence, lookahead, separation and maneuver tunables.
///
/// `separation_min_m` has no default and must always be supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaaConfig {
    #[serde(default = "default_detection_period")]
    pub detection_period_s: f64,
    #[serde(default = "default_lookahead")]
    pub lookahead_s: f64,
    pub separation_min_m: f64,
    /// Threshold inflation in units of the combined positioning σ.
    #[serde(default)]
    pub sigma_k: f64,
    /// Pairs whose vertical gap is at least this are never in conflict.
    #[serde(default = "default_vertical_band")]
    pub vertical_band_m: f64,
    #[serde(default = "default_sample_step")]
    pub sample_step_s: f64,
    #[serde(default = "default_speed_factor")]
    pub speed_factor: f64,
    /// Detour magnitude in multiples of `separation_min_m`.
    #[serde(default = "default_vector_offset_factor")]
    pub vector_offset_factor: f64,
    /// Lateral offset in multiples of `separation_min_m`.
    #[serde(default = "default_lateral_offset_factor")]
    pub lateral_offset_factor: f64,
    #[serde(default = "default_vector_half_window")]
    pub vector_half_window_s: f64,
    #[serde(default = "default_offset_ramp")]
    pub offset_ramp_s: f64,
}

impl DaaConfig {
    pub fn new(separation_min_m: f64) -> Result<Self, DaaError> {
        let c = Self {
            detection_period_s: default_detection_period(),
            lookahead_s: default_lookahead(),
            separation_min_m,
            sigma_k: 0.0,
            vertical_band_m: default_vertical_band(),
            sample_step_s: default_sample_step(),
            speed_factor: default_speed_factor(),
            vector_offset_factor: default_vector_offset_factor(),
            lateral_offset_factor: default_lateral_offset_factor(),
            vector_half_window_s: default_vector_half_window(),
            offset_ramp_s: default_offset_ramp(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), DaaError> {
        let bad = |m: &str| Err(DaaError::InvalidConfig(m.to_string()));
        let all = [
            self.detection_period_s,
            self.lookahead_s,
            self.separation_min_m,
            self.sigma_k,
            self.vertical_band_m,
            self.sample_step_s,
            self.speed_factor,
            self.vector_offset_factor,
            self.lateral_offset_factor,
            self.vector_half_window_s,
            self.offset_ramp_s,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all values must be finite");
        }
        if !(self.detection_period_s > 0.0) {
            return bad("detection_period_s must be > 0");
        }
        if !(self.lookahead_s > self.detection_period_s) {
            return bad("lookahead_s must exceed detection_period_s");
        }
        if !(self.separation_min_m > 0.0) {
            return bad("separation_min_m must be > 0");
        }
        if self.sigma_k < 0.0 {
            return bad("sigma_k must be >= 0");
        }
        if !(self.vertical_band_m > 0.0) {
            return bad("vertical_band_m must be > 0");
        }
        if !(self.sample_step_s > 0.0) {
            return bad("sample_step_s must be > 0");
        }
        if !(self.speed_factor > 0.0 && self.speed_factor < 1.0) {
            return bad("speed_factor must be in (0, 1)");
        }
        if !(self.vector_offset_factor > 0.0 && self.lateral_offset_factor > 0.0) {
            return bad("offset factors must be > 0");
        }
        if !(self.vector_half_window_s > 0.0 && self.offset_ramp_s > 0.0) {
            return bad("maneuver windows must be > 0");
        }
        Ok(())
    }

    /// Conflict threshold for a pair with combined positioning σ.
    pub fn threshold(&self, sigma_combined: f64) -> f64 {
        self.separation_min_m + self.sigma_k * sigma_combined
    }
}
