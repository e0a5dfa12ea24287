use std::io::Write;

use serde::Serialize;
use serde_json::json;

use super::engine::{SimMetrics, TimeseriesRow};
use super::scenario::Requirements;
use super::SimError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictStatus {
    Pass,
    Fail,
    NotEvaluated,
}

/// Outcome of one requirement check. A positive margin is headroom, a
/// negative one is the shortfall.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub requirement: String,
    pub status: VerdictStatus,
    pub measured: Option<f64>,
    pub threshold: f64,
    pub margin: Option<f64>,
}

impl Verdict {
    fn not_evaluated(requirement: impl Into<String>, threshold: f64) -> Self {
        Self {
            requirement: requirement.into(),
            status: VerdictStatus::NotEvaluated,
            measured: None,
            threshold,
            margin: None,
        }
    }

    /// `measured ≥ threshold` passes.
    fn at_least(requirement: impl Into<String>, measured: Option<f64>, threshold: f64) -> Self {
        match measured {
            None => Self::not_evaluated(requirement, threshold),
            Some(m) => Self {
                requirement: requirement.into(),
                status: if m >= threshold { VerdictStatus::Pass } else { VerdictStatus::Fail },
                measured: Some(m),
                threshold,
                margin: Some(m - threshold),
            },
        }
    }

    /// `measured < threshold` passes.
    fn below(requirement: impl Into<String>, measured: Option<f64>, threshold: f64) -> Self {
        match measured {
            None => Self::not_evaluated(requirement, threshold),
            Some(m) => Self {
                requirement: requirement.into(),
                status: if m < threshold { VerdictStatus::Pass } else { VerdictStatus::Fail },
                measured: Some(m),
                threshold,
                margin: Some(threshold - m),
            },
        }
    }
}

/// Pass/fail per requirement, in a fixed order: separation, then per-vehicle
/// C2 availability (design, then achieved), then the C2 rate.
pub fn verdicts(metrics: &SimMetrics, requirements: &Requirements) -> Vec<Verdict> {
    let mut out = vec![Verdict {
        requirement: "separation".into(),
        status: if metrics.separation.violations == 0 { VerdictStatus::Pass } else { VerdictStatus::Fail },
        measured: Some(metrics.separation.violations as f64),
        threshold: 0.0,
        margin: Some(0.0 - metrics.separation.violations as f64),
    }];
    let a = requirements.c2_availability;
    if metrics.c2.is_empty() {
        out.push(Verdict::not_evaluated("c2_availability", a));
    }
    for c in &metrics.c2 {
        out.push(Verdict::at_least(
            format!("c2_availability_design/{}", c.vehicle_id),
            Some(c.design_availability),
            a,
        ));
        out.push(Verdict::at_least(
            format!("c2_availability_achieved/{}", c.vehicle_id),
            c.achieved_availability,
            a,
        ));
    }
    let rate = if metrics.links_configured { metrics.c2_rate_kbps } else { None };
    out.push(Verdict::below("c2_rate", rate, requirements.c2_max_rate_kbps));
    out
}

/// `report.json` text: object keys sorted, versioned by `schema_version`.
pub fn report_json(scenario_name: Option<&str>, metrics: &SimMetrics, verdicts: &[Verdict]) -> String {
    // serde_json's default map is ordered by key, so going through `Value`
    // sorts every object regardless of struct field order.
    let value = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "scenario": scenario_name,
        "metrics": metrics,
        "verdicts": verdicts,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("metrics are finite");
    s.push('\n');
    s
}

/// Flat per-step CSV of positions and link states.
pub fn write_timeseries_csv<W: Write>(rows: &[TimeseriesRow], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| SimError::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
