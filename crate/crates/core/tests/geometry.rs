mod common;

use std::sync::Arc;

use ensemble_planner::geometry::{collision_zone, Footprint, Path, Point};
use ensemble_planner::kinematics::{integrate_jerk_sequence, lift_to_trajectory, LongState};
use proptest::prelude::*;

/// Corners of a heading-aligned rectangle centred on `c`.
fn corners(c: Point, psi: f64, fp: Footprint) -> [(f64, f64); 4] {
    let (hl, hw) = (fp.length / 2.0, fp.width / 2.0);
    let (cs, sn) = (psi.cos(), psi.sin());
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].map(|(u, v)| (c.x + u * cs - v * sn, c.y + u * sn + v * cs))
}

/// Separating-axis overlap test with a small tolerance against touching.
fn rects_overlap(a: &[(f64, f64); 4], b: &[(f64, f64); 4]) -> bool {
    let axes = |r: &[(f64, f64); 4]| [(r[1].0 - r[0].0, r[1].1 - r[0].1), (r[3].0 - r[0].0, r[3].1 - r[0].1)];
    for (ax, ay) in axes(a).into_iter().chain(axes(b)) {
        let proj = |r: &[(f64, f64); 4]| {
            r.iter().map(|p| p.0 * ax + p.1 * ay).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
        };
        let ((a0, a1), (b0, b1)) = (proj(a), proj(b));
        if a1 <= b0 + 1e-9 || b1 <= a0 + 1e-9 {
            return false;
        }
    }
    true
}

fn footprint(path: &Path, s: f64) -> [(f64, f64); 4] {
    let p = path.eval(s).unwrap();
    corners(p.position, p.psi, path.footprint())
}

fn grid(len: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = (len / step).floor() as usize;
    (0..=n).map(move |k| (k as f64 * step).min(len))
}

#[test]
fn perpendicular_crossing_matches_dense_brute_force() {
    let fp = Footprint::new(4.0, 2.0);
    let a = Path::new(vec![Point::new(-30.0, 0.0), Point::new(30.0, 0.0)], 1.75, fp).unwrap();
    let b = Path::new(vec![Point::new(0.0, -30.0), Point::new(0.0, 30.0)], 1.75, fp).unwrap();
    let zone = collision_zone(&a, &b);
    let (ia, ib) = zone.intervals.unwrap();

    let (mut lo_a, mut hi_a, mut lo_b, mut hi_b) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let step = 0.01;
    let range = |k: usize| 20.0 + k as f64 * step;
    let fb: Vec<_> = (0..=2000).map(|k| footprint(&b, range(k))).collect();
    for i in 0..=2000 {
        let sa = range(i);
        let ra = footprint(&a, sa);
        for (j, rb) in fb.iter().enumerate() {
            if rects_overlap(&ra, rb) {
                let sb = range(j);
                lo_a = lo_a.min(sa);
                hi_a = hi_a.max(sa);
                lo_b = lo_b.min(sb);
                hi_b = hi_b.max(sb);
            }
        }
    }
    for (iv, lo, hi) in [(ia, lo_a, hi_a), (ib, lo_b, hi_b)] {
        assert!((iv.length() - 6.0).abs() < 0.01, "length {}", iv.length());
        assert!((0.5 * (iv.s_in + iv.s_out) - 30.0).abs() < 0.01);
        assert!(iv.s_in <= lo && lo - iv.s_in < step + 1e-3, "{iv:?} vs brute {lo}");
        assert!(iv.s_out >= hi && iv.s_out - hi < step + 1e-3, "{iv:?} vs brute {hi}");
    }
}

#[test]
fn lifted_positions_lie_on_the_polyline() {
    let wp = vec![
        Point::new(0.0, 0.0),
        Point::new(20.0, 0.0),
        Point::new(35.0, 10.0),
        Point::new(40.0, 40.0),
    ];
    let path = Arc::new(Path::new(wp.clone(), 1.75, common::CAR).unwrap());
    let profile = integrate_jerk_sequence(LongState::new(0.0, 7.0, 0.0), &[1.0; 24], 0.25, &common::limits());
    let traj = lift_to_trajectory(profile, Arc::clone(&path)).unwrap();
    for (x, st) in traj.samples().iter().zip(&traj.profile().states) {
        assert_eq!(x.position, path.eval(st.s).unwrap().position);
        let d = wp
            .windows(2)
            .map(|w| point_segment_distance(x.position, w[0], w[1]))
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-9, "{d}");
    }
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Point at arc length `s`, walking the polyline from its start.
fn walk(wp: &[Point], mut s: f64) -> Point {
    for w in wp.windows(2) {
        let len = w[0].distance(w[1]);
        if s <= len {
            let t = s / len;
            return Point::new(w[0].x + t * (w[1].x - w[0].x), w[0].y + t * (w[1].y - w[0].y));
        }
        s -= len;
    }
    *wp.last().unwrap()
}

fn polyline(max_points: usize, extent: f64) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-extent..extent, -extent..extent), 2..=max_points)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect::<Vec<_>>())
        .prop_filter("consecutive points must differ", |v| {
            v.windows(2).all(|w| w[0].distance(w[1]) > 1.0)
        })
}

proptest! {
    #[test]
    fn arc_length_is_polyline_distance(wp in polyline(6, 50.0), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let path = Path::new(wp.clone(), 1.75, common::CAR).unwrap();
        let (s1, s2) = (a.min(b) * path.length(), a.max(b) * path.length());
        for s in [s1, s2] {
            let p = path.eval(s).unwrap().position;
            prop_assert!(p.distance(walk(&wp, s)) < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn zone_is_sound_and_symmetric(wa in polyline(3, 15.0), wb in polyline(3, 15.0)) {
        let a = Path::new(wa, 1.75, common::CAR).unwrap();
        let b = Path::new(wb, 1.75, common::CAR).unwrap();
        let ab = collision_zone(&a, &b);
        let ba = collision_zone(&b, &a);
        prop_assert_eq!(ab.interval_a(), ba.interval_b());
        prop_assert_eq!(ab.interval_b(), ba.interval_a());

        let fb: Vec<_> = grid(b.length(), 0.05).map(|sb| (sb, footprint(&b, sb))).collect();
        for sa in grid(a.length(), 0.05) {
            let ra = footprint(&a, sa);
            for (sb, rb) in &fb {
                if rects_overlap(&ra, rb) {
                    let (ia, ib) = ab.intervals.expect("overlap found but the zone is empty");
                    prop_assert!(ia.s_in - 1e-3 <= sa && sa <= ia.s_out + 1e-3, "{} outside {:?}", sa, ia);
                    prop_assert!(ib.s_in - 1e-3 <= *sb && *sb <= ib.s_out + 1e-3, "{} outside {:?}", sb, ib);
                }
            }
        }
    }
}
