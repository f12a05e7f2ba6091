//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use ensemble_planner::geometry::{collision_zone, CollisionZone, Footprint, Path, Point};
use ensemble_planner::kinematics::{integrate_jerk_sequence, lift_to_trajectory, Limits, LongState, Occupancy, Trajectory};
use ensemble_planner::scenario::default_limits;
use rand::Rng;

pub const CAR: Footprint = Footprint::new(4.0, 1.8);
pub const DT: f64 = 0.25;
pub const STEPS: usize = 32;

pub fn limits() -> Limits {
    default_limits(10.0)
}

pub fn straight(from: (f64, f64), to: (f64, f64)) -> Arc<Path> {
    Arc::new(Path::new(vec![Point::new(from.0, from.1), Point::new(to.0, to.1)], 1.75, CAR).unwrap())
}

/// Two 200 m straight paths crossing at their midpoints under `angle` (rad).
pub fn crossing_paths(angle: f64) -> (Arc<Path>, Arc<Path>) {
    let a = straight((-100.0, 0.0), (100.0, 0.0));
    let (c, s) = (angle.cos(), angle.sin());
    let b = straight((-100.0 * c, -100.0 * s), (100.0 * c, 100.0 * s));
    (a, b)
}

/// Crossing path pairs with their zones for `n` angles spread over
/// `[0.6, 2.5]` rad. Zone computation is slow, so random instances draw from
/// this fixed set.
pub fn crossings(n: usize) -> Vec<(Arc<Path>, Arc<Path>, CollisionZone)> {
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .map(|k| {
            let (a, b) = crossing_paths(0.6 + 1.9 * k as f64 / (n - 1) as f64);
            let zone = collision_zone(&a, &b);
            (a, b, zone)
        })
        .collect()
}

/// Random jerk profile on `path`, `None` if it runs off the path.
pub fn random_trajectory(
    rng: &mut impl Rng,
    path: &Arc<Path>,
    s0: (f64, f64),
    v0: (f64, f64),
    limits: &Limits,
) -> Option<Trajectory> {
    let initial = LongState::new(rng.random_range(s0.0..s0.1), rng.random_range(v0.0..v0.1), 0.0);
    let jerks: Vec<f64> = (0..STEPS).map(|_| rng.random_range(limits.j_min..=limits.j_max)).collect();
    let profile = integrate_jerk_sequence(initial, &jerks, DT, limits);
    lift_to_trajectory(profile, Arc::clone(path)).ok()
}

/// Exact motion over `h` at constant acceleration `a`, with the speed kept in
/// `[0, v_max]`.
pub fn advance(s: f64, v: f64, a: f64, h: f64, v_max: f64) -> (f64, f64) {
    let v_end = v + a * h;
    if a > 0.0 && v_end > v_max {
        let t1 = ((v_max - v) / a).max(0.0);
        (s + v * t1 + 0.5 * a * t1 * t1 + v_max * (h - t1), v_max)
    } else if a < 0.0 && v_end < 0.0 {
        let t1 = v / -a;
        (s + v * t1 + 0.5 * a * t1 * t1, 0.0)
    } else {
        (s + v * h + 0.5 * a * h * h, v_end)
    }
}

/// True when the occupancy windows of the two trajectories overlap or miss
/// each other by less than `h`, which a check sampled every `h` cannot
/// resolve.
pub fn near_tangent(ta: &Trajectory, tb: &Trajectory, zone: &CollisionZone, h: f64) -> bool {
    let Some((ia, ib)) = zone.intervals else {
        return false;
    };
    match (Occupancy::of(ta, ia).window(), Occupancy::of(tb, ib).window()) {
        (Some((a_in, a_out)), Some((b_in, b_out))) => (a_in.max(b_in) - a_out.min(b_out)).abs() < h,
        _ => false,
    }
}
