use serde::Serialize;

use super::{predict_pair, ConflictEvent, DaaConfig, DaaError, FlightProfile4D, PositioningModel, VehicleKind, Waypoint};

/// Resolution stages in escalation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionStage {
    SpeedReduction,
    Vector,
    LateralOffset,
}

impl ResolutionStage {
    pub const ORDER: [ResolutionStage; 3] = [Self::SpeedReduction, Self::Vector, Self::LateralOffset];
}

/// Side of the track, looking along the direction of travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn other(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Unit normal to `track` on this side.
    fn normal(self, track: [f64; 2]) -> [f64; 2] {
        match self {
            Side::Left => [-track[1], track[0]],
            Side::Right => [track[1], -track[0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageParameters {
    SpeedReduction { factor: f64 },
    Vector { offset_m: f64, side: Side, detour_time_s: f64 },
    LateralOffset { offset_m: f64, side: Side },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionAction {
    pub stage: ResolutionStage,
    pub applied_to: String,
    pub parameters: StageParameters,
    /// Whether re-prediction on the modified profile was clear.
    pub cleared: bool,
}

/// Outcome of [`resolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    /// Every stage attempted in this call, in order; the last one cleared.
    pub attempts: Vec<ResolutionAction>,
    pub profile: FlightProfile4D,
}

impl Resolution {
    pub fn action(&self) -> &ResolutionAction {
        self.attempts.last().expect("a resolution has at least one attempt")
    }
}

/// Which vehicle of a pair maneuvers: the unmanned one, or the one with the
/// larger id when both are unmanned. `None` when both are manned.
pub fn maneuvering_vehicle<'a>(a: &'a FlightProfile4D, b: &'a FlightProfile4D) -> Option<&'a FlightProfile4D> {
    match (a.kind(), b.kind()) {
        (VehicleKind::Manned, VehicleKind::Manned) => None,
        (VehicleKind::Uas, VehicleKind::Manned) => Some(a),
        (VehicleKind::Manned, VehicleKind::Uas) => Some(b),
        (VehicleKind::Uas, VehicleKind::Uas) => Some(if a.vehicle_id() > b.vehicle_id() { a } else { b }),
    }
}

/// Time from which a maneuver may change the profile.
fn pivot(profile: &FlightProfile4D, now: f64) -> f64 {
    now.max(profile.start_time())
}

/// Original waypoints strictly before `t`, then the interpolated point at `t`.
fn prefix_through(profile: &FlightProfile4D, t: f64) -> Vec<Waypoint> {
    let mut out: Vec<Waypoint> = profile.waypoints().iter().copied().filter(|w| w.t < t).collect();
    out.push(Waypoint::at(profile.position_at(t).expect("t inside span"), t));
    out
}

/// Fly the remainder of the profile after `now` at `factor` times the
/// planned speed. The path is unchanged; later waypoint times stretch by
/// `1/factor` about the pivot.
pub fn apply_speed_reduction(profile: &FlightProfile4D, now: f64, factor: f64) -> Result<FlightProfile4D, DaaError> {
    let not_applicable = |reason: &str| DaaError::StageNotApplicable {
        stage: ResolutionStage::SpeedReduction,
        reason: reason.to_string(),
    };
    if !(factor > 0.0 && factor < 1.0) {
        return Err(not_applicable("factor must be in (0, 1)"));
    }
    let p = pivot(profile, now);
    if p >= profile.end_time() {
        return Err(not_applicable("profile already complete"));
    }
    let mut wps = prefix_through(profile, p);
    wps.extend(
        profile
            .waypoints()
            .iter()
            .filter(|w| w.t > p)
            .map(|w| Waypoint::new(w.x, w.y, w.z, p + (w.t - p) / factor)),
    );
    profile.with_waypoints(wps)
}

/// Leave the profile at `t_c − h`, pass a detour point displaced by
/// `offset_m` normal to the track at `t_c`, and rejoin the original profile
/// at `t_c + h`, where `h` is `half_window` clipped to the remaining span.
pub fn apply_vector(
    profile: &FlightProfile4D,
    now: f64,
    conflict_time: f64,
    offset_m: f64,
    side: Side,
    half_window: f64,
) -> Result<FlightProfile4D, DaaError> {
    let not_applicable = |reason: &str| DaaError::StageNotApplicable {
        stage: ResolutionStage::Vector,
        reason: reason.to_string(),
    };
    let p = pivot(profile, now);
    let end = profile.end_time();
    let tc = conflict_time.clamp(p, end);
    let h = half_window.min(tc - p).min(end - tc);
    if !(h > 0.0) {
        return Err(not_applicable("no time left around the conflict to detour"));
    }
    let track = profile
        .horizontal_track(tc)
        .ok_or_else(|| not_applicable("profile has no horizontal track"))?;
    let n = side.normal(track);
    let (ta, tb) = (tc - h, tc + h);
    let c = profile.position_at(tc)?;
    let mut wps = prefix_through(profile, ta);
    wps.push(Waypoint::new(c[0] + n[0] * offset_m, c[1] + n[1] * offset_m, c[2], tc));
    wps.push(Waypoint::at(profile.position_at(tb)?, tb));
    wps.extend(profile.waypoints().iter().copied().filter(|w| w.t > tb));
    profile.with_waypoints(wps)
}

/// Shift the remainder of the profile by a constant `offset_m` normal to the
/// track at `conflict_time`, ramping out over `ramp` seconds after the pivot
/// and back onto the final waypoint over the last `ramp` seconds.
pub fn apply_lateral_offset(
    profile: &FlightProfile4D,
    now: f64,
    conflict_time: f64,
    offset_m: f64,
    side: Side,
    ramp: f64,
) -> Result<FlightProfile4D, DaaError> {
    let not_applicable = |reason: &str| DaaError::StageNotApplicable {
        stage: ResolutionStage::LateralOffset,
        reason: reason.to_string(),
    };
    let p = pivot(profile, now);
    let end = profile.end_time();
    let (t_in, t_out) = (p + ramp, end - ramp);
    if !(t_out > t_in) {
        return Err(not_applicable("remaining profile is shorter than the offset ramps"));
    }
    let track = profile
        .horizontal_track(conflict_time.clamp(p, end))
        .ok_or_else(|| not_applicable("profile has no horizontal track"))?;
    let n = side.normal(track);
    let (dx, dy) = (n[0] * offset_m, n[1] * offset_m);
    let shifted = |q: [f64; 3], t: f64| Waypoint::new(q[0] + dx, q[1] + dy, q[2], t);

    let mut wps = prefix_through(profile, p);
    wps.push(shifted(profile.position_at(t_in)?, t_in));
    wps.extend(
        profile
            .waypoints()
            .iter()
            .filter(|w| w.t > t_in && w.t < t_out)
            .map(|w| shifted(w.position(), w.t)),
    );
    wps.push(shifted(profile.position_at(t_out)?, t_out));
    wps.push(*profile.waypoints().last().expect("non-empty"));
    profile.with_waypoints(wps)
}

/// Side that moves the maneuvering vehicle away from the intruder: judged at
/// the conflict time, then at the detection time, defaulting to the right.
fn preferred_side(uas: &FlightProfile4D, intruder: &FlightProfile4D, conflict_time: f64, now: f64) -> Side {
    for t in [conflict_time, now] {
        let Some(track) = uas.horizontal_track(t) else {
            break;
        };
        let (Ok(u), Ok(i)) = (uas.position_at(t), intruder.position_at(t)) else {
            continue;
        };
        let rel = [u[0] - i[0], u[1] - i[1]];
        if rel[0].hypot(rel[1]) < 1.0 {
            continue;
        }
        let right = Side::Right.normal(track);
        return if rel[0] * right[0] + rel[1] * right[1] >= 0.0 {
            Side::Right
        } else {
            Side::Left
        };
    }
    Side::Right
}

/// Resolve a pending conflict by maneuvering `uas` only.
///
/// Starts at the lowest stage not in `tried` (which must be a prefix of
/// [`ResolutionStage::ORDER`]) and applies each stage to the original
/// profile in turn, re-predicting the pair after each one. Returns the first
/// stage whose modified profile clears the pair; the vector and offset
/// stages try the side away from the intruder first. When no stage clears,
/// [`DaaError::Unresolvable`] carries every attempt.
pub fn resolve(
    conflict: &ConflictEvent,
    uas: &FlightProfile4D,
    intruder: &FlightProfile4D,
    config: &DaaConfig,
    positioning: &PositioningModel,
    tried: &[ResolutionStage],
) -> Result<Resolution, DaaError> {
    for p in [uas, intruder] {
        if !conflict.involves(p.vehicle_id()) {
            return Err(DaaError::NotInConflict(p.vehicle_id().to_string()));
        }
    }
    if uas.vehicle_id() == intruder.vehicle_id() {
        return Err(DaaError::NotInConflict(intruder.vehicle_id().to_string()));
    }
    if uas.kind() == VehicleKind::Manned {
        return Err(DaaError::ManeuverOnManned(uas.vehicle_id().to_string()));
    }
    if tried.len() > ResolutionStage::ORDER.len() || tried != &ResolutionStage::ORDER[..tried.len()] {
        return Err(DaaError::StageOrder);
    }
    let now = conflict.detected_at;
    let threshold = config.threshold(positioning.combined_sigma());
    let Some(pending) = predict_pair(uas, intruder, config, now, threshold) else {
        return Err(DaaError::NoConflictPending(conflict.pair.0.clone(), conflict.pair.1.clone()));
    };
    let conflict_time = pending.predicted_time;
    let side = preferred_side(uas, intruder, conflict_time, now);
    let clears = |candidate: &FlightProfile4D| predict_pair(candidate, intruder, config, now, threshold).is_none();

    let mut attempts = Vec::new();
    for &stage in &ResolutionStage::ORDER[tried.len()..] {
        let candidates: Vec<(StageParameters, Result<FlightProfile4D, DaaError>)> = match stage {
            ResolutionStage::SpeedReduction => vec![(
                StageParameters::SpeedReduction {
                    factor: config.speed_factor,
                },
                apply_speed_reduction(uas, now, config.speed_factor),
            )],
            ResolutionStage::Vector => {
                let offset_m = config.vector_offset_factor * config.separation_min_m;
                [side, side.other()]
                    .into_iter()
                    .map(|s| {
                        (
                            StageParameters::Vector {
                                offset_m,
                                side: s,
                                detour_time_s: conflict_time,
                            },
                            apply_vector(uas, now, conflict_time, offset_m, s, config.vector_half_window_s),
                        )
                    })
                    .collect()
            }
            ResolutionStage::LateralOffset => {
                let offset_m = config.lateral_offset_factor * config.separation_min_m;
                [side, side.other()]
                    .into_iter()
                    .map(|s| {
                        (
                            StageParameters::LateralOffset { offset_m, side: s },
                            apply_lateral_offset(uas, now, conflict_time, offset_m, s, config.offset_ramp_s),
                        )
                    })
                    .collect()
            }
        };
        let mut stage_params = None;
        for (params, candidate) in candidates {
            stage_params.get_or_insert_with(|| params.clone());
            if let Ok(profile) = candidate {
                if clears(&profile) {
                    attempts.push(ResolutionAction {
                        stage,
                        applied_to: uas.vehicle_id().to_string(),
                        parameters: params,
                        cleared: true,
                    });
                    return Ok(Resolution { attempts, profile });
                }
            }
        }
        attempts.push(ResolutionAction {
            stage,
            applied_to: uas.vehicle_id().to_string(),
            parameters: stage_params.expect("each stage has a candidate"),
            cleared: false,
        });
    }
    Err(DaaError::Unresolvable(
        conflict.pair.0.clone(),
        conflict.pair.1.clone(),
        attempts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::daa::{predict_conflicts, PositioningMode};

    fn gps() -> PositioningModel {
        PositioningModel::new(PositioningMode::Gps, 0)
    }

    fn leg(id: &str, kind: VehicleKind, from: [f64; 2], to: [f64; 2], t0: f64, t1: f64) -> FlightProfile4D {
        FlightProfile4D::new(
            id,
            kind,
            vec![Waypoint::new(from[0], from[1], 300.0, t0), Waypoint::new(to[0], to[1], 300.0, t1)],
        )
        .unwrap()
    }

    /// UAS eastbound and manned northbound, both at 50 m/s, meeting at the
    /// origin at t = 600.
    fn crossing() -> (FlightProfile4D, FlightProfile4D) {
        (
            leg("uas", VehicleKind::Uas, [-30_000.0, 0.0], [30_000.0, 0.0], 0.0, 1200.0),
            leg("ga", VehicleKind::Manned, [0.0, -30_000.0], [0.0, 30_000.0], 0.0, 1200.0),
        )
    }

    #[test]
    fn crossing_is_solved_by_speed_reduction() {
        let c = DaaConfig::new(500.0).unwrap();
        let (uas, ga) = crossing();
        let events = predict_conflicts(&[uas.clone(), ga.clone()], &c, 120.0, &gps());
        assert_eq!(events.len(), 1);
        let r = resolve(&events[0], &uas, &ga, &c, &gps(), &[]).unwrap();
        assert_eq!(r.attempts.len(), 1);
        assert_eq!(r.action().stage, ResolutionStage::SpeedReduction);
        assert_eq!(r.action().applied_to, "uas");
        // Slowed to 40 m/s from x = −24000 at t = 120: at the origin at t = 720.
        let slowed = &r.profile;
        let at = slowed.position_at(720.0).unwrap();
        assert!(at[0].abs() < 1e-6, "{at:?}");
        // Closed-form closest approach of the slowed encounter, t* = 2652000/4100.
        let t_star = 2_652_000.0 / 4100.0;
        let u = slowed.position_at(t_star).unwrap();
        let g = ga.position_at(t_star).unwrap();
        let analytic = (40.0 * t_star - 28_800.0).hypot(50.0 * t_star - 30_000.0);
        assert!(((u[0] - g[0]).hypot(u[1] - g[1]) - analytic).abs() < 1e-6);
        assert!(analytic > 3700.0);
        assert!(predict_pair(slowed, &ga, &c, 120.0, c.threshold(gps().combined_sigma())).is_none());
    }

    #[test]
    fn reciprocal_tracks_escalate_to_vector() {
        let c = DaaConfig::new(500.0).unwrap();
        let uas = leg("uas", VehicleKind::Uas, [-30_000.0, 0.0], [30_000.0, 0.0], 0.0, 1200.0);
        let ga = leg("ga", VehicleKind::Manned, [30_000.0, 0.0], [-30_000.0, 0.0], 0.0, 1200.0);
        let events = predict_conflicts(&[uas.clone(), ga.clone()], &c, 240.0, &gps());
        assert_eq!(events.len(), 1);
        let r = resolve(&events[0], &uas, &ga, &c, &gps(), &[]).unwrap();
        let stages: Vec<_> = r.attempts.iter().map(|a| a.stage).collect();
        assert_eq!(stages, vec![ResolutionStage::SpeedReduction, ResolutionStage::Vector]);
        assert!(!r.attempts[0].cleared);
        assert!(r.attempts[1].cleared);
        // The intruder is untouched and the UAS rejoins its original path.
        assert_eq!(r.profile.waypoints().last(), uas.waypoints().last());
    }

    #[test]
    fn tried_prefix_is_respected() {
        let c = DaaConfig::new(500.0).unwrap();
        let (uas, ga) = crossing();
        let e = predict_conflicts(&[uas.clone(), ga.clone()], &c, 120.0, &gps()).remove(0);
        let r = resolve(&e, &uas, &ga, &c, &gps(), &[ResolutionStage::SpeedReduction]).unwrap();
        assert_eq!(r.attempts[0].stage, ResolutionStage::Vector);
        assert_eq!(
            resolve(&e, &uas, &ga, &c, &gps(), &[ResolutionStage::Vector]).unwrap_err(),
            DaaError::StageOrder
        );
    }

    #[test]
    fn misuse_is_rejected() {
        let c = DaaConfig::new(500.0).unwrap();
        let (uas, ga) = crossing();
        let e = predict_conflicts(&[uas.clone(), ga.clone()], &c, 120.0, &gps()).remove(0);
        // Manned aircraft never maneuver.
        assert!(matches!(
            resolve(&e, &ga, &uas, &c, &gps(), &[]),
            Err(DaaError::ManeuverOnManned(_))
        ));
        // Nothing pending once the geometry is clear.
        let far = leg("ga", VehicleKind::Manned, [0.0, 50_000.0], [1.0, 90_000.0], 0.0, 1200.0);
        assert!(matches!(
            resolve(&e, &uas, &far, &c, &gps(), &[]),
            Err(DaaError::NoConflictPending(..))
        ));
        let other = leg("zz", VehicleKind::Manned, [0.0, 0.0], [1.0, 0.0], 0.0, 10.0);
        assert!(matches!(resolve(&e, &uas, &other, &c, &gps(), &[]), Err(DaaError::NotInConflict(_))));
    }

    #[test]
    fn late_conflict_is_unresolvable() {
        // Head-on with the UAS already 40 s from the meeting point at the
        // end of its profile: no stage has room to act.
        let c = DaaConfig::new(500.0).unwrap();
        let uas = leg("uas", VehicleKind::Uas, [-2000.0, 0.0], [0.0, 0.0], 0.0, 40.0);
        let ga = leg("ga", VehicleKind::Manned, [2000.0, 0.0], [-2000.0, 0.0], 0.0, 80.0);
        let e = predict_conflicts(&[uas.clone(), ga.clone()], &c, 0.0, &gps()).remove(0);
        match resolve(&e, &uas, &ga, &c, &gps(), &[]) {
            Err(DaaError::Unresolvable(_, _, attempts)) => {
                let stages: Vec<_> = attempts.iter().map(|a| a.stage).collect();
                assert_eq!(stages, ResolutionStage::ORDER.to_vec());
            }
            other => panic!("expected unresolvable, got {other:?}"),
        }
    }

    fn close(a: [f64; 3], b: [f64; 3]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    #[test]
    fn stage_geometry() {
        let p = leg("uas", VehicleKind::Uas, [0.0, 0.0], [10_000.0, 0.0], 0.0, 200.0);
        let v = apply_vector(&p, 0.0, 100.0, 1000.0, Side::Left, 50.0).unwrap();
        assert!(close(v.position_at(100.0).unwrap(), [5000.0, 1000.0, 300.0]));
        assert!(close(v.position_at(150.0).unwrap(), p.position_at(150.0).unwrap()));
        assert!(close(v.position_at(40.0).unwrap(), p.position_at(40.0).unwrap()));

        let o = apply_lateral_offset(&p, 0.0, 100.0, 750.0, Side::Right, 60.0).unwrap();
        assert!(close(o.position_at(100.0).unwrap(), [5000.0, -750.0, 300.0]));
        assert!(close(o.position_at(200.0).unwrap(), [10_000.0, 0.0, 300.0]));

        let s = apply_speed_reduction(&p, 100.0, 0.5).unwrap();
        assert_eq!(s.end_time(), 300.0);
        assert!(close(s.position_at(100.0).unwrap(), p.position_at(100.0).unwrap()));
        assert!(apply_speed_reduction(&p, 200.0, 0.5).is_err());
    }

    #[test]
    fn maneuvering_vehicle_choice() {
        let (uas, ga) = crossing();
        assert_eq!(maneuvering_vehicle(&uas, &ga).unwrap().vehicle_id(), "uas");
        assert_eq!(maneuvering_vehicle(&ga, &uas).unwrap().vehicle_id(), "uas");
        assert!(maneuvering_vehicle(&ga, &ga).is_none());
        let u2 = leg("uav", VehicleKind::Uas, [0.0, 0.0], [1.0, 0.0], 0.0, 1.0);
        assert_eq!(maneuvering_vehicle(&uas, &u2).unwrap().vehicle_id(), "uav");
    }
}
