//! Scenario documents (TOML) and their validated in-memory form.
//!
//! ```toml
//! name = "narrowing_row"
//! speed_limit = 10.0          # m/s
//! ego = "near"
//! right_of_way = [["far", "near"]]   # "far" has priority over "near"
//!
//! [sampling]                  # optional, see SamplingConfig
//! seed = 7
//!
//! [plan_b]                    # optional
//! reaction_delay = 0.0
//!
//! [[vehicles]]
//! id = "near"
//! length = 4.0
//! width = 2.0
//! desired_speed = 10.0        # optional, defaults to speed_limit
//! initial = { s = 0.0, v = 10.0, a = 0.0 }
//! path = { waypoints = [[0.0, 0.0], [120.0, 0.0]], corridor_halfwidth = 1.75 }
//! # optional: [vehicles.limits], [vehicles.costs], [vehicles.costs.velocity], ...
//! ```

pub mod builtin;

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cost::{
    default_a_lat, default_a_lon, default_offset, default_tzc, default_velocity, default_yaw_rate,
    EvaluationFunctional, VehicleCostParams, DEFAULT_ROW_FACTOR,
};
use crate::error::{Error, Result};
use crate::geometry::{Footprint, Path, Point};
use crate::kinematics::{Limits, LongState};
use crate::planner::SamplingConfig;
use crate::safety::PlanBConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: String,
    pub path: Arc<Path>,
    pub initial: LongState,
    pub limits: Limits,
    pub costs: VehicleCostParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub speed_limit: f64,
    pub ego: String,
    pub vehicles: Vec<Vehicle>,
    /// `(a, b)`: vehicle `a` has right of way over vehicle `b`.
    pub right_of_way: Vec<(String, String)>,
    pub sampling: SamplingConfig,
    pub plan_b: PlanBConfig,
}

pub fn default_limits(speed_limit: f64) -> Limits {
    Limits {
        v_max: 1.2 * speed_limit,
        a_min: -8.0,
        a_max: 3.0,
        j_min: -5.0,
        j_max: 5.0,
    }
}

impl Scenario {
    pub fn vehicle_index(&self, id: &str) -> Option<usize> {
        self.vehicles.iter().position(|v| v.id == id)
    }

    pub fn ego_index(&self) -> Result<usize> {
        self.vehicle_index(&self.ego)
            .ok_or_else(|| Error::Validation(format!("ego `{}` is not a vehicle", self.ego)))
    }

    pub fn right_of_way_indices(&self) -> Result<Vec<(usize, usize)>> {
        self.right_of_way
            .iter()
            .map(|(a, b)| {
                let find = |id: &str| {
                    self.vehicle_index(id).ok_or_else(|| {
                        Error::Validation(format!("right_of_way references unknown vehicle `{id}`"))
                    })
                };
                Ok((find(a)?, find(b)?))
            })
            .collect()
    }

    /// Same road with only the named vehicle on it.
    pub fn solo(&self, id: &str) -> Result<Scenario> {
        let v = self
            .vehicles
            .iter()
            .find(|v| v.id == id)
            .ok_or_else(|| Error::invalid(format!("no vehicle `{id}`")))?;
        Ok(Scenario {
            name: format!("{}_solo_{id}", self.name),
            speed_limit: self.speed_limit,
            ego: id.to_string(),
            vehicles: vec![v.clone()],
            right_of_way: Vec::new(),
            sampling: self.sampling.clone(),
            plan_b: self.plan_b,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.vehicles.is_empty() {
            return fail("a scenario needs at least one vehicle".into());
        }
        if !(self.speed_limit > 0.0 && self.speed_limit.is_finite()) {
            return fail(format!("speed_limit must be positive, got {}", self.speed_limit));
        }
        let mut ids = HashSet::new();
        for v in &self.vehicles {
            if !ids.insert(v.id.as_str()) {
                return fail(format!("duplicate vehicle id `{}`", v.id));
            }
        }
        self.ego_index()?;

        let pairs = self.right_of_way_indices()?;
        for &(a, b) in &pairs {
            if a == b {
                return fail(format!(
                    "vehicle `{}` cannot have right of way over itself",
                    self.vehicles[a].id
                ));
            }
            if pairs.contains(&(b, a)) {
                return fail(format!(
                    "right_of_way between `{}` and `{}` is cyclic",
                    self.vehicles[a].id, self.vehicles[b].id
                ));
            }
        }

        for v in &self.vehicles {
            let ctx = |e: Error| Error::Validation(format!("vehicle `{}`: {e}", v.id));
            v.limits.validate().map_err(ctx)?;
            v.costs.validate().map_err(ctx)?;
            let LongState { s, v: speed, a } = v.initial;
            if !(s >= 0.0 && s <= v.path.length()) {
                return fail(format!("vehicle `{}`: initial s = {s} is off its path", v.id));
            }
            if !(speed >= 0.0 && speed <= v.limits.v_max) || !a.is_finite() {
                return fail(format!(
                    "vehicle `{}`: initial speed {speed} outside [0, v_max]",
                    v.id
                ));
            }
        }
        self.sampling.validate()?;
        for v in &self.vehicles {
            if self
                .sampling
                .jerk_levels
                .iter()
                .any(|&j| j < v.limits.j_min || j > v.limits.j_max)
            {
                return fail(format!(
                    "vehicle `{}`: jerk levels exceed [{}, {}]",
                    v.id, v.limits.j_min, v.limits.j_max
                ));
            }
        }
        if !(self.plan_b.reaction_delay >= 0.0) {
            return fail("plan_b.reaction_delay must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    speed_limit: f64,
    ego: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    right_of_way: Vec<[String; 2]>,
    #[serde(default)]
    sampling: SamplingConfig,
    #[serde(default)]
    plan_b: PlanBConfig,
    vehicles: Vec<VehicleDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleDoc {
    id: String,
    length: f64,
    width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    desired_speed: Option<f64>,
    initial: LongState,
    path: PathDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    limits: Option<Limits>,
    #[serde(default)]
    costs: CostsDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathDoc {
    waypoints: Vec<Point>,
    corridor_halfwidth: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    velocity: Option<EvaluationFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_lon: Option<EvaluationFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_lat: Option<EvaluationFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    yaw_rate: Option<EvaluationFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<EvaluationFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tzc: Option<EvaluationFunctional>,
}

impl ScenarioDoc {
    fn into_scenario(self) -> Result<Scenario> {
        let speed_limit = self.speed_limit;
        let vehicles = self
            .vehicles
            .into_iter()
            .map(|v| {
                let path = Path::new(
                    v.path.waypoints,
                    v.path.corridor_halfwidth,
                    Footprint::new(v.length, v.width),
                )
                .map_err(|e| Error::Validation(format!("vehicle `{}`: {e}", v.id)))?;
                let v_opt = v.desired_speed.unwrap_or(speed_limit);
                let c = v.costs;
                let costs = VehicleCostParams {
                    velocity: c.velocity.unwrap_or_else(|| default_velocity(v_opt)),
                    a_lon: c.a_lon.unwrap_or_else(default_a_lon),
                    a_lat: c.a_lat.unwrap_or_else(default_a_lat),
                    yaw_rate: c.yaw_rate.unwrap_or_else(default_yaw_rate),
                    offset: c.offset.unwrap_or_else(default_offset),
                    tzc: c.tzc.unwrap_or_else(default_tzc),
                    row_factor: c.row_factor.unwrap_or(DEFAULT_ROW_FACTOR),
                };
                Ok(Vehicle {
                    id: v.id,
                    path: Arc::new(path),
                    initial: v.initial,
                    limits: v.limits.unwrap_or_else(|| default_limits(speed_limit)),
                    costs,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scenario {
            name: self.name,
            speed_limit,
            ego: self.ego,
            vehicles,
            right_of_way: self
                .right_of_way
                .into_iter()
                .map(|[a, b]| (a, b))
                .collect(),
            sampling: self.sampling,
            plan_b: self.plan_b,
        })
    }

    fn from_scenario(s: &Scenario) -> Self {
        ScenarioDoc {
            name: s.name.clone(),
            speed_limit: s.speed_limit,
            ego: s.ego.clone(),
            right_of_way: s
                .right_of_way
                .iter()
                .map(|(a, b)| [a.clone(), b.clone()])
                .collect(),
            sampling: s.sampling.clone(),
            plan_b: s.plan_b,
            vehicles: s
                .vehicles
                .iter()
                .map(|v| VehicleDoc {
                    id: v.id.clone(),
                    length: v.path.vehicle_length(),
                    width: v.path.vehicle_width(),
                    desired_speed: Some(v.costs.velocity.f_opt),
                    initial: v.initial,
                    path: PathDoc {
                        waypoints: v.path.waypoints().to_vec(),
                        corridor_halfwidth: v.path.corridor_halfwidth(),
                    },
                    limits: Some(v.limits),
                    costs: CostsDoc {
                        row_factor: Some(v.costs.row_factor),
                        velocity: Some(v.costs.velocity),
                        a_lon: Some(v.costs.a_lon),
                        a_lat: Some(v.costs.a_lat),
                        yaw_rate: Some(v.costs.yaw_rate),
                        offset: Some(v.costs.offset),
                        tzc: Some(v.costs.tzc),
                    },
                })
                .collect(),
        }
    }
}

/// Parses and validates a scenario document, filling in default limits and
/// cost parameters where they are omitted.
pub fn load_scenario(document: &str) -> Result<Scenario> {
    let table: toml::Table = toml::from_str(document).map_err(|e| Error::Parse {
        path: ".".into(),
        message: e.to_string(),
    })?;
    let doc: ScenarioDoc =
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    let scenario = doc.into_scenario()?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario_file(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_scenario(&text)
}

/// Writes a scenario as a fully explicit document.
pub fn serialize_scenario(scenario: &Scenario) -> Result<String> {
    toml::to_string(&ScenarioDoc::from_scenario(scenario)).map_err(|e| Error::Serialize(e.to_string()))
}
