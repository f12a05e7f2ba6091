mod common;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use ensemble_planner::geometry::{Interval, Path, Point};
use ensemble_planner::kinematics::{
    integrate_jerk_sequence, lift_to_trajectory, reaches_zone_end, zone_crossing_times, Limits, LongState,
};
use proptest::prelude::*;

fn wide_limits() -> Limits {
    Limits {
        v_max: 1e3,
        a_min: -1e3,
        a_max: 1e3,
        j_min: -1e3,
        j_max: 1e3,
    }
}

fn arc(radius: f64, vertices: usize) -> Arc<Path> {
    let pts = (0..vertices)
        .map(|k| {
            let t = FRAC_PI_2 * k as f64 / (vertices - 1) as f64;
            Point::new(radius * t.sin(), radius * (1.0 - t.cos()))
        })
        .collect();
    Arc::new(Path::new(pts, 1.75, common::CAR).unwrap())
}

#[test]
fn lateral_acceleration_on_an_arc() {
    let path = arc(50.0, 100);
    let profile = integrate_jerk_sequence(LongState::new(5.0, 10.0, 0.0), &[0.0; 6], 0.25, &common::limits());
    let traj = lift_to_trajectory(profile, path).unwrap();
    for x in traj.samples() {
        // v^2 / r = 2.0
        assert!((x.a_lat - 2.0).abs() <= 0.2, "a_lat = {}", x.a_lat);
        assert!((x.omega - 0.2).abs() <= 0.02, "omega = {}", x.omega);
    }
}

#[test]
fn straight_path_has_no_lateral_motion() {
    let path = common::straight((0.0, 0.0), (300.0, 0.0));
    let profile = integrate_jerk_sequence(LongState::new(0.0, 4.0, 1.0), &[2.0, -1.0, 0.5, -3.0, 0.0], 0.4, &common::limits());
    let traj = lift_to_trajectory(profile, path).unwrap();
    assert!(traj.samples().iter().all(|x| x.omega == 0.0 && x.a_lat == 0.0));
}

#[test]
fn accelerating_crossing_close_to_analytic() {
    let path = common::straight((0.0, 0.0), (300.0, 0.0));
    let (v0, a) = (10.0, 2.0);
    let profile = integrate_jerk_sequence(LongState::new(0.0, v0, a), &[0.0; 16], 0.5, &wide_limits());
    let traj = lift_to_trajectory(profile, path).unwrap();
    // effective entry at s = 50 with a 4 m car
    let c = zone_crossing_times(&traj, Interval::new(52.0, 60.0));
    let analytic = (-v0 + (v0 * v0 + 2.0 * a * 50.0).sqrt()) / a;
    let t_in = c.t_in.unwrap();
    assert!((t_in - analytic).abs() < 0.02, "{t_in} vs {analytic}");
}

#[test]
fn stop_before_zone_never_clears() {
    let path = common::straight((0.0, 0.0), (300.0, 0.0));
    let profile = integrate_jerk_sequence(LongState::new(0.0, 10.0, -8.0), &[0.0; 20], 0.25, &common::limits());
    let traj = lift_to_trajectory(profile, path).unwrap();
    let iv = Interval::new(30.0, 40.0);
    assert_eq!(zone_crossing_times(&traj, iv).t_in, None);
    assert!(!reaches_zone_end(&traj, iv));
}

proptest! {
    #[test]
    fn unclamped_integration_matches_closed_form(
        s0 in -50.0..50.0f64,
        v0 in 20.0..40.0f64,
        a0 in -2.0..2.0f64,
        jerks in prop::collection::vec(-1.0..1.0f64, 1..12),
        dt in 0.05..0.5f64,
    ) {
        let p = integrate_jerk_sequence(LongState::new(s0, v0, a0), &jerks, dt, &wide_limits());
        prop_assert_eq!(p.len(), jerks.len() + 1);
        let (mut s, mut v, mut a) = (s0, v0, a0);
        for (k, &j) in jerks.iter().enumerate() {
            s += v * dt + a * dt * dt / 2.0 + j * dt.powi(3) / 6.0;
            v += a * dt + j * dt * dt / 2.0;
            a += j * dt;
            let st = p.states[k + 1];
            prop_assert!((st.s - s).abs() <= 1e-9 * s.abs().max(1.0), "s {} vs {}", st.s, s);
            prop_assert!((st.v - v).abs() <= 1e-9 * v.abs().max(1.0));
            prop_assert!((st.a - a).abs() <= 1e-9);
        }
    }

    #[test]
    fn profiles_respect_limits_and_never_reverse(
        v0 in 0.0..12.0f64,
        a0 in -8.0..3.0f64,
        jerks in prop::collection::vec(-5.0..5.0f64, 1..40),
        dt in 0.05..0.5f64,
    ) {
        let lim = common::limits();
        let p = integrate_jerk_sequence(LongState::new(0.0, v0, a0), &jerks, dt, &lim);
        for w in p.states.windows(2) {
            prop_assert!(w[1].s >= w[0].s);
        }
        for st in &p.states {
            prop_assert!(st.v >= 0.0 && st.v <= lim.v_max + 1e-12);
            prop_assert!(st.a >= lim.a_min - 1e-12 && st.a <= lim.a_max + 1e-12);
        }
    }

    #[test]
    fn constant_speed_crossings_are_exact(
        s0 in 0.0..20.0f64,
        v in 1.0..12.0f64,
        dt in 0.05..0.7f64,
        s_in in 25.0..60.0f64,
        len in 0.5..20.0f64,
    ) {
        let path = common::straight((0.0, 0.0), (400.0, 0.0));
        let steps = (200.0 / (v * dt)).ceil().min(2000.0) as usize;
        let profile = integrate_jerk_sequence(LongState::new(s0, v, 0.0), &vec![0.0; steps], dt, &common::limits());
        let traj = lift_to_trajectory(profile, path).unwrap();
        let c = zone_crossing_times(&traj, Interval::new(s_in, s_in + len));
        let t_in = (s_in - 2.0 - s0) / v;
        let t_out = (s_in + len + 2.0 - s0) / v;
        prop_assert!((c.t_in.unwrap() - t_in).abs() <= 1e-9, "{:?} vs {} {}", c, t_in, t_out);
        prop_assert!((c.t_out.unwrap() - t_out).abs() <= 1e-9);
    }
}
