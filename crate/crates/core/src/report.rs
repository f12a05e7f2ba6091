//! CSV and JSON output of a planning run.
//!
//! The CSV holds one row per vehicle and time step (`vehicle,t,s,v,a`). On
//! emergency braking only the ego's braking profile is written. The JSON holds
//! the outcome, the per-vehicle cost breakdown, the collision zones and the
//! plan-B verdicts. Both are byte-stable for identical inputs.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::Serialize;

use crate::cost::CostBreakdown;
use crate::error::{Error, Result};
use crate::geometry::Interval;
use crate::kinematics::VelocityProfile;
use crate::planner::{Outcome, PlanResult, SamplingConfig};
use crate::safety::PlanBCase;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct RunReport<'a> {
    pub scenario: &'a Scenario,
    pub config: &'a SamplingConfig,
    pub result: &'a PlanResult,
}

#[derive(Serialize)]
struct JsonCosts {
    comfort: f64,
    discomfort: f64,
    infeasibility: f64,
    row: f64,
    total: f64,
}

impl From<&CostBreakdown> for JsonCosts {
    fn from(c: &CostBreakdown) -> Self {
        Self {
            comfort: c.comfort,
            discomfort: c.discomfort,
            infeasibility: c.infeasibility,
            row: c.row,
            total: c.total(),
        }
    }
}

#[derive(Serialize)]
struct JsonVehicle<'a> {
    id: &'a str,
    profile_index: Option<usize>,
    costs: Option<JsonCosts>,
}

#[derive(Serialize)]
struct JsonZone<'a> {
    vehicle_a: &'a str,
    vehicle_b: &'a str,
    interval_a: Interval,
    interval_b: Interval,
}

#[derive(Serialize)]
struct JsonPlanB<'a> {
    other: &'a str,
    valid: bool,
    failing_time: Option<f64>,
    failing_case: Option<PlanBCase>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    scenario: &'a str,
    ego: &'a str,
    seed: u64,
    profiles_per_vehicle: usize,
    dt: f64,
    horizon: f64,
    outcome: Outcome,
    total_cost: Option<f64>,
    candidates_evaluated: usize,
    plan_b_checks: usize,
    vehicles: Vec<JsonVehicle<'a>>,
    zones: Vec<JsonZone<'a>>,
    plan_b: Vec<JsonPlanB<'a>>,
}

impl RunReport<'_> {
    /// Profiles written to the CSV, labelled by vehicle id.
    fn profiles(&self) -> Vec<(&str, &VelocityProfile)> {
        let r = self.result;
        match (&r.outcome, &r.emergency_profile) {
            (Outcome::EmergencyBrake, Some(p)) => vec![(self.scenario.ego.as_str(), p)],
            _ => self
                .scenario
                .vehicles
                .iter()
                .zip(&r.ensemble)
                .map(|(v, t)| (v.id.as_str(), t.profile()))
                .collect(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Serialize(e.to_string());
        w.write_record(["vehicle", "t", "s", "v", "a"]).map_err(err)?;
        for (id, p) in self.profiles() {
            for (k, st) in p.states.iter().enumerate() {
                w.write_record([
                    id.to_string(),
                    p.time(k).to_string(),
                    st.s.to_string(),
                    st.v.to_string(),
                    st.a.to_string(),
                ])
                .map_err(err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let r = self.result;
        let ids: Vec<&str> = self.scenario.vehicles.iter().map(|v| v.id.as_str()).collect();
        let vehicles = ids
            .iter()
            .enumerate()
            .map(|(i, id)| JsonVehicle {
                id,
                profile_index: r.profile_indices.get(i).copied(),
                costs: r.per_vehicle.get(i).map(JsonCosts::from),
            })
            .collect();
        let mut zones = Vec::new();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                if let Some((a, b)) = r.zones.get(i, j).intervals {
                    zones.push(JsonZone {
                        vehicle_a: ids[i],
                        vehicle_b: ids[j],
                        interval_a: a,
                        interval_b: b,
                    });
                }
            }
        }
        let plan_b = r
            .plan_b
            .iter()
            .map(|(j, v)| JsonPlanB {
                other: ids[*j],
                valid: v.valid,
                failing_time: v.failing_time,
                failing_case: v.failing_case,
            })
            .collect();
        let doc = JsonReport {
            scenario: &self.scenario.name,
            ego: &self.scenario.ego,
            seed: self.config.seed,
            profiles_per_vehicle: self.config.profiles_per_vehicle,
            dt: self.config.dt,
            horizon: self.config.horizon,
            outcome: r.outcome,
            total_cost: r.total_cost,
            candidates_evaluated: r.candidates_evaluated,
            plan_b_checks: r.plan_b_checks,
            vehicles,
            zones,
            plan_b,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialize(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }
}

/// Writes `<scenario>.csv` and/or `<scenario>.json` into `out_dir` and returns
/// the written paths.
pub fn export_report(report: &RunReport<'_>, formats: &[ReportFormat], out_dir: &FsPath) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for format in formats {
        let (ext, text) = match format {
            ReportFormat::Csv => ("csv", report.to_csv()?),
            ReportFormat::Json => ("json", report.to_json()?),
        };
        let path = out_dir.join(format!("{}.{ext}", report.scenario.name));
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
