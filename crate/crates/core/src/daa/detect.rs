use serde::Serialize;

use super::{DaaConfig, FlightProfile4D, PositioningModel};

/// Predicted loss of separation between two vehicles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConflictEvent {
    /// Vehicle ids in ascending order.
    pub pair: (String, String),
    pub detected_at: f64,
    /// Time of closest approach inside the lookahead window.
    pub predicted_time: f64,
    /// First sampled time below the threshold.
    pub loss_of_separation_time: f64,
    pub min_distance_m: f64,
    pub threshold_m: f64,
}

impl ConflictEvent {
    pub fn involves(&self, vehicle: &str) -> bool {
        self.pair.0 == vehicle || self.pair.1 == vehicle
    }
}

/// Sample one pair over `[now, now + lookahead]` on the configured grid.
///
/// Only instants where both vehicles are airborne and their vertical gap is
/// inside the band count. Returns an event when the horizontal distance is
/// strictly below `threshold`; the event reports the earliest closest
/// approach.
pub fn predict_pair(
    a: &FlightProfile4D,
    b: &FlightProfile4D,
    config: &DaaConfig,
    now: f64,
    threshold: f64,
) -> Option<ConflictEvent> {
    let (a, b) = if a.vehicle_id() <= b.vehicle_id() { (a, b) } else { (b, a) };
    let steps = (config.lookahead_s / config.sample_step_s + 1e-9).floor() as u64;
    let mut closest: Option<(f64, f64)> = None;
    let mut first_loss = None;
    for k in 0..=steps {
        let t = now + k as f64 * config.sample_step_s;
        let (Ok(pa), Ok(pb)) = (a.position_at(t), b.position_at(t)) else {
            continue;
        };
        if (pa[2] - pb[2]).abs() >= config.vertical_band_m {
            continue;
        }
        let d = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
        if closest.is_none_or(|(best, _)| d < best) {
            closest = Some((d, t));
        }
        if first_loss.is_none() && d < threshold {
            first_loss = Some(t);
        }
    }
    let (min_distance_m, predicted_time) = closest?;
    let loss_of_separation_time = first_loss?;
    Some(ConflictEvent {
        pair: (a.vehicle_id().to_string(), b.vehicle_id().to_string()),
        detected_at: now,
        predicted_time,
        loss_of_separation_time,
        min_distance_m,
        threshold_m: threshold,
    })
}

/// Every pairwise conflict predicted at `now`, ordered by vehicle id pair.
///
/// The threshold is inflated by `sigma_k · √(σ₁² + σ₂²)` for the receivers
/// of `positioning`. Prediction itself is deterministic; measurement noise
/// enters through the profiles the caller passes in.
pub fn predict_conflicts(
    profiles: &[FlightProfile4D],
    config: &DaaConfig,
    now: f64,
    positioning: &PositioningModel,
) -> Vec<ConflictEvent> {
    let threshold = config.threshold(positioning.combined_sigma());
    let mut order: Vec<&FlightProfile4D> = profiles.iter().collect();
    order.sort_by(|x, y| x.vehicle_id().cmp(y.vehicle_id()));
    let mut events = Vec::new();
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            if let Some(e) = predict_pair(order[i], order[j], config, now, threshold) {
                events.push(e);
            }
        }
    }
    events
}
