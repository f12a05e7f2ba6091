//! The built-in scenarios: a left turn at a T-junction and a road narrowing,
//! each with and without signposted right of way. Both variants of a scenario
//! share their paths and initial states.
//!
//! No initial states are published for these situations, so they are chosen
//! such that the solo optima of the two vehicles overlap in the collision zone.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::cost::VehicleCostParams;
use crate::error::{Error, Result};
use crate::geometry::{Footprint, Path, Point};
use crate::kinematics::LongState;
use crate::planner::SamplingConfig;
use crate::safety::PlanBConfig;

use super::{default_limits, Scenario, Vehicle};

pub const SPEED_LIMIT: f64 = 10.0;
pub const LANE_HALFWIDTH: f64 = 1.75;
pub const CAR: Footprint = Footprint::new(4.0, 1.8);

/// Names accepted by [`builtin`] besides the four canonical ones.
const ALIASES: &[(&str, &str)] = &[
    ("t_junction_row_upper", "t_junction_row"),
    ("t_junction_row_lower", "t_junction_unsigned"),
];

pub const NAMES: [&str; 4] = [
    "t_junction_unsigned",
    "t_junction_row",
    "narrowing_unsigned",
    "narrowing_row",
];

pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![
        t_junction(false),
        t_junction(true),
        narrowing(false),
        narrowing(true),
    ]
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let canonical = ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map_or(name, |(_, target)| target);
    match canonical {
        "t_junction_unsigned" => Ok(t_junction(false)),
        "t_junction_row" => Ok(t_junction(true)),
        "narrowing_unsigned" => Ok(narrowing(false)),
        "narrowing_row" => Ok(narrowing(true)),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}

fn vehicle(id: &str, waypoints: Vec<Point>, initial: LongState) -> Vehicle {
    let path = Path::new(waypoints, LANE_HALFWIDTH, CAR).expect("built-in path is valid");
    Vehicle {
        id: id.to_string(),
        path: Arc::new(path),
        initial,
        limits: default_limits(SPEED_LIMIT),
        costs: VehicleCostParams::defaults(SPEED_LIMIT),
    }
}

// T-junction: the main road runs west-east, the side road joins from the south.
const TURN_RADIUS: f64 = 12.0;
const UPPER_START: f64 = 86.0;
const LOWER_START: f64 = 100.0;
/// The turning vehicle approaches slower than the speed limit.
const LOWER_SPEED: f64 = 7.0;

/// Eastbound vehicle on the main road.
pub fn t_junction_upper_path() -> Vec<Point> {
    vec![Point::new(-120.0, -LANE_HALFWIDTH), Point::new(80.0, -LANE_HALFWIDTH)]
}

/// Northbound vehicle from the side road turning left (west) into the main
/// road, crossing the eastbound lane.
pub fn t_junction_lower_path() -> Vec<Point> {
    let x0 = LANE_HALFWIDTH;
    let r = TURN_RADIUS;
    let yc = LANE_HALFWIDTH - r;
    let cx = x0 - r;
    let mut pts = vec![Point::new(x0, -120.0)];
    let n = 24;
    for k in 0..=n {
        let theta = FRAC_PI_2 * k as f64 / n as f64;
        pts.push(Point::new(cx + r * theta.cos(), yc + r * theta.sin()));
    }
    pts.push(Point::new(-100.0, LANE_HALFWIDTH));
    pts
}

fn t_junction(signposted: bool) -> Scenario {
    let upper = vehicle(
        "upper",
        t_junction_upper_path(),
        LongState::new(UPPER_START, SPEED_LIMIT, 0.0),
    );
    let lower = vehicle(
        "lower",
        t_junction_lower_path(),
        LongState::new(LOWER_START, LOWER_SPEED, 0.0),
    );
    // without signs the vehicle coming from the right (the lower one) has
    // right of way
    let right_of_way = if signposted {
        vec![("upper".to_string(), "lower".to_string())]
    } else {
        vec![("lower".to_string(), "upper".to_string())]
    };
    Scenario {
        name: if signposted { "t_junction_row" } else { "t_junction_unsigned" }.into(),
        speed_limit: SPEED_LIMIT,
        ego: "lower".into(),
        vehicles: vec![upper, lower],
        right_of_way,
        sampling: SamplingConfig::default(),
        plan_b: PlanBConfig::default(),
    }
}

// Narrowing: both lanes swerve towards the centre line around an obstacle on
// each side, leaving too little room for two cars side by side.
const NARROW_HALF: f64 = 1.0;
const TAPER: f64 = 10.0;
/// Lateral shift of each lane inside the narrowing.
const SHIFT: f64 = 0.9;
const NEAR_START: f64 = 90.0;
/// The far vehicle starts 10 m further from the narrowing than the near one.
const GAP: f64 = 10.0;

/// Eastbound lane through the narrowing.
pub fn narrowing_east_path() -> Vec<Point> {
    let y = -LANE_HALFWIDTH;
    let (nh, tp) = (NARROW_HALF, TAPER);
    vec![
        Point::new(-120.0, y),
        Point::new(-nh - tp, y),
        Point::new(-nh, y + SHIFT),
        Point::new(nh, y + SHIFT),
        Point::new(nh + tp, y),
        Point::new(120.0, y),
    ]
}

/// Westbound lane, the mirror image of the eastbound one.
pub fn narrowing_west_path() -> Vec<Point> {
    narrowing_east_path()
        .into_iter()
        .map(|p| Point::new(-p.x, -p.y))
        .collect()
}

fn narrowing(signposted: bool) -> Scenario {
    let near = vehicle("near", narrowing_east_path(), LongState::new(NEAR_START, SPEED_LIMIT, 0.0));
    let far = vehicle(
        "far",
        narrowing_west_path(),
        LongState::new(NEAR_START - GAP, SPEED_LIMIT, 0.0),
    );
    let right_of_way = if signposted {
        vec![("far".to_string(), "near".to_string())]
    } else {
        Vec::new()
    };
    Scenario {
        name: if signposted { "narrowing_row" } else { "narrowing_unsigned" }.into(),
        speed_limit: SPEED_LIMIT,
        ego: "near".into(),
        vehicles: vec![near, far],
        right_of_way,
        sampling: SamplingConfig::default(),
        plan_b: PlanBConfig::default(),
    }
}
