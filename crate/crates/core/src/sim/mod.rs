//! Fixed-step scenario simulation.
//!
//! A [`ScenarioConfig`] carries the network, the missions and every
//! subsystem's settings. [`run`] plans each mission, turns it into a 4D
//! profile and then steps the clock: positions advance, DAA runs on its
//! cadence, every carried link is sampled, and metrics accumulate. Output is
//! a pure function of the scenario; all randomness comes from sub-seeds of
//! `sim.master_seed` keyed by subsystem and vehicle.

mod engine;
mod report;
mod scenario;

use std::hash::Hasher;

use fnv::FnvHasher;
use thiserror::Error;

use crate::daa::DaaError;
use crate::graph::NodeId;
use crate::link::LinkError;
use crate::route::RouteError;

pub use engine::{
    run, C2Metrics, ConflictMetrics, ConflictOutcome, ConflictRecord, LinkMetrics, SeparationMetrics, SimMetrics,
    SimRun, StageCounts, TimeseriesRow, VehicleMetrics,
};
pub use report::{report_json, verdicts, write_timeseries_csv, Verdict, VerdictStatus, REPORT_SCHEMA_VERSION};
pub use scenario::{
    build_profile, build_profiles, plan_missions, DaaSection, LinkSection, MissionMode, MissionSpec, PlannedMission,
    Requirements, ScenarioConfig, ScenarioViolation, SimSection, SCENARIO_VERSION,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario does not parse: {0}")]
    Parse(String),
    #[error("scenario has {} violation(s)", .0.len())]
    Invalid(Vec<ScenarioViolation>),
    #[error("node {node} has no position")]
    MissingPosition { node: NodeId },
    #[error("planning failed for {vehicle}: {source}")]
    Planning {
        vehicle: String,
        #[source]
        source: RouteError,
    },
    #[error("link {technology}: {source}")]
    Link {
        technology: String,
        #[source]
        source: LinkError,
    },
    #[error(transparent)]
    Daa(#[from] DaaError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

/// Seed for one subsystem stream of one vehicle.
///
/// FNV-1a over the master seed's little-endian bytes, the label and the
/// vehicle id, each field terminated by a zero byte. Streams are keyed by
/// name, so adding a vehicle leaves every other stream untouched.
pub fn sub_seed(master_seed: u64, label: &str, vehicle: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(&master_seed.to_le_bytes());
    h.write(label.as_bytes());
    h.write(&[0]);
    h.write(vehicle.as_bytes());
    h.write(&[0]);
    h.finish()
}
