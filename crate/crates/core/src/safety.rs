//! Collision detection between planned trajectories and the plan-B check.
//!
//! Plan B does not plan an alternative trajectory. At every sample time it
//! asks what the other vehicle could do from there on to cause a collision and
//! whether a closed-form emergency response of the ego vehicle still avoids it:
//!
//! * other drives first: it can only hurt us by slowing down, possibly to a
//!   stop inside the zone. We must either be able to stop in front of the zone
//!   or, if it cannot stop before clearing, reach the zone only after its
//!   latest possible clearing time.
//! * ego drives first: the other can only hurt us by speeding up. We must
//!   either escape by full acceleration before its earliest possible entry or
//!   still be able to stop in front of the zone.

use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::geometry::{CollisionZone, Interval, ZoneTable};
use crate::kinematics::{effective_interval, Limits, LongState, Occupancy, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanBCase {
    OtherFirst,
    EgoFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanBVerdict {
    pub valid: bool,
    pub failing_time: Option<f64>,
    pub failing_case: Option<PlanBCase>,
}

impl PlanBVerdict {
    pub const VALID: PlanBVerdict = PlanBVerdict {
        valid: true,
        failing_time: None,
        failing_case: None,
    };

    fn failed(t: f64, case: PlanBCase) -> Self {
        Self {
            valid: false,
            failing_time: Some(t),
            failing_case: Some(case),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanBConfig {
    /// Time the ego keeps following its plan before reacting (s).
    #[serde(default)]
    pub reaction_delay: f64,
}

/// Both occupancy windows intersect (closed at the shared boundary).
pub fn windows_overlap(a: Occupancy, b: Occupancy) -> bool {
    match (a.window(), b.window()) {
        (Some((a_in, a_out)), Some((b_in, b_out))) => a_in.max(b_in) <= a_out.min(b_out),
        _ => false,
    }
}

/// True iff both vehicles occupy their zone intervals at a common time.
pub fn collides(traj_a: &Trajectory, traj_b: &Trajectory, zone: &CollisionZone) -> bool {
    match zone.intervals {
        None => false,
        Some((ia, ib)) => windows_overlap(Occupancy::of(traj_a, ia), Occupancy::of(traj_b, ib)),
    }
}

/// Time to cover `distance` from speed `v` at constant acceleration `accel`,
/// cruising once `v_cap` is reached. `None` if the vehicle stops first.
pub fn time_to_cover(distance: f64, v: f64, accel: f64, v_cap: f64) -> Option<f64> {
    if distance <= 0.0 {
        return Some(0.0);
    }
    if accel > 0.0 {
        let v = v.min(v_cap);
        let t_cap = (v_cap - v) / accel;
        let d_cap = v * t_cap + 0.5 * accel * t_cap * t_cap;
        if distance >= d_cap {
            return Some(t_cap + (distance - d_cap) / v_cap);
        }
        // v t + a t^2 / 2 = d
        let disc = v * v + 2.0 * accel * distance;
        Some(2.0 * distance / (v + disc.sqrt()))
    } else if accel < 0.0 {
        let stop = v * v / (-2.0 * accel);
        if distance > stop {
            return None;
        }
        let disc = (v * v + 2.0 * accel * distance).max(0.0);
        let t = (v - disc.sqrt()) / -accel;
        Some(t)
    } else if v > 0.0 {
        Some(distance / v)
    } else {
        None
    }
}

fn ego_state(ego: &Trajectory, t: f64, delay: f64) -> (f64, LongState) {
    let t_react = t + delay;
    (t_react, ego.profile().state_at(t_react))
}

fn zone_entry_exit(traj: &Trajectory, interval: Interval) -> Interval {
    effective_interval(interval, traj.path().vehicle_length())
}

/// Plan-B check when the other vehicle passes the zone first.
pub fn plan_b_other_first(
    ego: &Trajectory,
    other: &Trajectory,
    zone: &CollisionZone,
    ego_limits: &Limits,
    other_limits: &Limits,
    config: &PlanBConfig,
) -> PlanBVerdict {
    let Some((ie, io)) = zone.intervals else {
        return PlanBVerdict::VALID;
    };
    let ez = zone_entry_exit(ego, ie);
    let oz = zone_entry_exit(other, io);
    let ego_entry = ego.profile().first_time_reaching(ez.s_in).unwrap_or(f64::INFINITY);

    let profile = other.profile();
    for (k, o) in profile.states.iter().enumerate() {
        let t = profile.time(k);
        if t >= ego_entry {
            break;
        }
        if o.s >= oz.s_out {
            // the other has cleared and cannot come back
            break;
        }
        let (t_react, e) = ego_state(ego, t, config.reaction_delay);
        let ego_stop = e.s + ego_limits.stopping_distance(e.v);
        if e.s < ez.s_in && ego_stop < ez.s_in {
            continue;
        }
        let other_stop = o.s + other_limits.stopping_distance(o.v);
        if other_stop < oz.s_out {
            // it can come to rest in front of or inside the zone
            return PlanBVerdict::failed(t, PlanBCase::OtherFirst);
        }
        let latest_clear = t + time_to_cover(oz.s_out - o.s, o.v, other_limits.a_min, f64::INFINITY)
            .expect("cannot stop before clearing");
        let ego_arrival = if ego_entry <= t_react {
            ego_entry
        } else {
            t_react
                + time_to_cover(ez.s_in - e.s, e.v, ego_limits.a_min, f64::INFINITY)
                    .unwrap_or(f64::INFINITY)
        };
        if ego_arrival <= latest_clear {
            return PlanBVerdict::failed(t, PlanBCase::OtherFirst);
        }
    }
    PlanBVerdict::VALID
}

/// Plan-B check when the ego vehicle passes the zone first.
pub fn plan_b_ego_first(
    ego: &Trajectory,
    other: &Trajectory,
    zone: &CollisionZone,
    ego_limits: &Limits,
    other_limits: &Limits,
    config: &PlanBConfig,
) -> PlanBVerdict {
    let Some((ie, io)) = zone.intervals else {
        return PlanBVerdict::VALID;
    };
    let ez = zone_entry_exit(ego, ie);
    let oz = zone_entry_exit(other, io);
    let ego_exit = ego.profile().first_time_reaching(ez.s_out).unwrap_or(f64::INFINITY);

    let profile = other.profile();
    for (k, o) in profile.states.iter().enumerate() {
        let t = profile.time(k);
        if t >= ego_exit {
            break;
        }
        if o.s >= oz.s_in {
            // already inside or past; cannot be a later arrival
            continue;
        }
        let earliest_entry = t + time_to_cover(oz.s_in - o.s, o.v, other_limits.a_max, other_limits.v_max)
            .unwrap_or(f64::INFINITY);
        let (t_react, e) = ego_state(ego, t, config.reaction_delay);
        if e.s >= ez.s_out {
            continue;
        }
        let escape = t_react
            + time_to_cover(ez.s_out - e.s, e.v, ego_limits.a_max, ego_limits.v_max)
                .unwrap_or(f64::INFINITY);
        if escape < earliest_entry {
            continue;
        }
        if e.s < ez.s_in && e.s + ego_limits.stopping_distance(e.v) < ez.s_in {
            continue;
        }
        return PlanBVerdict::failed(t, PlanBCase::EgoFirst);
    }
    PlanBVerdict::VALID
}

/// Which plan-B case applies to a non-colliding pair, or `None` when the two
/// never compete for the zone.
pub fn passing_order(ego_occ: Occupancy, other_occ: Occupancy) -> Option<PlanBCase> {
    use Occupancy::*;
    match (ego_occ, other_occ) {
        (Vacated, _) | (_, Vacated) => None,
        (Window { .. }, NotReached) => Some(PlanBCase::EgoFirst),
        (NotReached, _) => Some(PlanBCase::OtherFirst),
        (Window { t_in: e, .. }, Window { t_in: o, .. }) => {
            if e < o {
                Some(PlanBCase::EgoFirst)
            } else {
                Some(PlanBCase::OtherFirst)
            }
        }
    }
}

/// Plan-B verdict for the ego against one other vehicle, using whichever case
/// the planned passing order calls for.
pub fn plan_b_pair(
    ego: &Trajectory,
    other: &Trajectory,
    zone: &CollisionZone,
    ego_limits: &Limits,
    other_limits: &Limits,
    config: &PlanBConfig,
) -> PlanBVerdict {
    let Some((ie, io)) = zone.intervals else {
        return PlanBVerdict::VALID;
    };
    match passing_order(Occupancy::of(ego, ie), Occupancy::of(other, io)) {
        None => PlanBVerdict::VALID,
        Some(PlanBCase::EgoFirst) => plan_b_ego_first(ego, other, zone, ego_limits, other_limits, config),
        Some(PlanBCase::OtherFirst) => plan_b_other_first(ego, other, zone, ego_limits, other_limits, config),
    }
}

/// Pairwise verdicts of the ego against every vehicle it shares a zone with.
pub fn plan_b_verdicts<T: Borrow<Trajectory>>(
    ensemble: &[T],
    ego: usize,
    zones: &ZoneTable,
    limits: &[Limits],
    config: &PlanBConfig,
) -> Vec<(usize, PlanBVerdict)> {
    (0..ensemble.len())
        .filter(|&j| j != ego && !zones.get(ego, j).is_empty())
        .map(|j| {
            let v = plan_b_pair(
                ensemble[ego].borrow(),
                ensemble[j].borrow(),
                &zones.get(ego, j),
                &limits[ego],
                &limits[j],
                config,
            );
            (j, v)
        })
        .collect()
}

pub fn has_valid_plan_b<T: Borrow<Trajectory>>(
    ensemble: &[T],
    ego: usize,
    zones: &ZoneTable,
    limits: &[Limits],
    config: &PlanBConfig,
) -> bool {
    (0..ensemble.len())
        .filter(|&j| j != ego && !zones.get(ego, j).is_empty())
        .all(|j| {
            plan_b_pair(
                ensemble[ego].borrow(),
                ensemble[j].borrow(),
                &zones.get(ego, j),
                &limits[ego],
                &limits[j],
                config,
            )
            .valid
        })
}
