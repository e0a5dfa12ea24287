use serde::{Deserialize, Serialize};

use super::DaaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VehicleKind {
    #[default]
    Uas,
    Manned,
}

/// Position in meters at time `t` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl Waypoint {
    pub fn new(x: f64, y: f64, z: f64, t: f64) -> Self {
        Self { x, y, z, t }
    }

    pub fn at(p: [f64; 3], t: f64) -> Self {
        Self::new(p[0], p[1], p[2], t)
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Piecewise-linear 4D trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlightProfile4D {
    vehicle_id: String,
    kind: VehicleKind,
    waypoints: Vec<Waypoint>,
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl FlightProfile4D {
    /// Checks that times strictly increase, coordinates are finite and every
    /// leg moves (speed `> 0`).
    pub fn new(vehicle_id: impl Into<String>, kind: VehicleKind, waypoints: Vec<Waypoint>) -> Result<Self, DaaError> {
        let vehicle_id = vehicle_id.into();
        if waypoints.is_empty() {
            return Err(DaaError::InvalidProfile(format!("{vehicle_id}: no waypoints")));
        }
        for (k, w) in waypoints.iter().enumerate() {
            if ![w.x, w.y, w.z, w.t].iter().all(|v| v.is_finite()) {
                return Err(DaaError::InvalidProfile(format!("{vehicle_id}: waypoint {k} is not finite")));
            }
        }
        for (k, pair) in waypoints.windows(2).enumerate() {
            if pair[1].t <= pair[0].t {
                return Err(DaaError::InvalidProfile(format!(
                    "{vehicle_id}: waypoint {} time {} does not follow {}",
                    k + 1,
                    pair[1].t,
                    pair[0].t
                )));
            }
            if dist3(pair[0].position(), pair[1].position()) <= 0.0 {
                return Err(DaaError::InvalidProfile(format!("{vehicle_id}: leg {k} has zero speed")));
            }
        }
        Ok(Self {
            vehicle_id,
            kind,
            waypoints,
        })
    }

    /// Constant-speed profile through `points`, departing at `departure`.
    /// Repeated consecutive points are dropped.
    pub fn from_points(
        vehicle_id: impl Into<String>,
        kind: VehicleKind,
        points: &[[f64; 3]],
        speed_mps: f64,
        departure: f64,
    ) -> Result<Self, DaaError> {
        let vehicle_id = vehicle_id.into();
        if !(speed_mps > 0.0 && speed_mps.is_finite()) {
            return Err(DaaError::InvalidProfile(format!("{vehicle_id}: speed must be > 0")));
        }
        let mut waypoints: Vec<Waypoint> = Vec::with_capacity(points.len());
        for &p in points {
            match waypoints.last() {
                None => waypoints.push(Waypoint::at(p, departure)),
                Some(last) => {
                    let d = dist3(last.position(), p);
                    if d > 0.0 {
                        waypoints.push(Waypoint::at(p, last.t + d / speed_mps));
                    }
                }
            }
        }
        Self::new(vehicle_id, kind, waypoints)
    }

    pub fn vehicle_id(&self) -> &str {
        &self.vehicle_id
    }

    pub fn kind(&self) -> VehicleKind {
        self.kind
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn start_time(&self) -> f64 {
        self.waypoints[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.waypoints[self.waypoints.len() - 1].t
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.start_time() && t <= self.end_time()
    }

    /// Speed of every leg, m/s.
    pub fn leg_speeds(&self) -> Vec<f64> {
        self.waypoints
            .windows(2)
            .map(|w| dist3(w[0].position(), w[1].position()) / (w[1].t - w[0].t))
            .collect()
    }

    /// Linear interpolation between the bracketing waypoints; exact at
    /// waypoint times.
    pub fn position_at(&self, t: f64) -> Result<[f64; 3], DaaError> {
        if !self.contains_time(t) {
            return Err(DaaError::OutOfSpan {
                vehicle: self.vehicle_id.clone(),
                t,
                start: self.start_time(),
                end: self.end_time(),
            });
        }
        let k = self.waypoints.partition_point(|w| w.t <= t);
        let a = self.waypoints[k - 1];
        if a.t == t || k == self.waypoints.len() {
            return Ok(a.position());
        }
        let b = self.waypoints[k];
        let f = (t - a.t) / (b.t - a.t);
        Ok([a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)])
    }

    /// Unit horizontal direction of travel at `t`, looking forward then
    /// backward past purely vertical legs. `None` if the profile never moves
    /// horizontally.
    pub fn horizontal_track(&self, t: f64) -> Option<[f64; 2]> {
        let k = self.waypoints.partition_point(|w| w.t <= t).clamp(1, self.waypoints.len());
        let legs = self.waypoints.len() - 1;
        let leg_dir = |i: usize| {
            let (a, b) = (self.waypoints[i], self.waypoints[i + 1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len = dx.hypot(dy);
            (len > 1e-9).then(|| [dx / len, dy / len])
        };
        let start = (k - 1).min(legs.saturating_sub(1));
        (start..legs).chain((0..start).rev()).find_map(leg_dir)
    }

    /// Same profile moved horizontally by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            vehicle_id: self.vehicle_id.clone(),
            kind: self.kind,
            waypoints: self
                .waypoints
                .iter()
                .map(|w| Waypoint::new(w.x + dx, w.y + dy, w.z, w.t))
                .collect(),
        }
    }

    pub(crate) fn with_waypoints(&self, waypoints: Vec<Waypoint>) -> Result<Self, DaaError> {
        Self::new(self.vehicle_id.clone(), self.kind, waypoints)
    }
}
