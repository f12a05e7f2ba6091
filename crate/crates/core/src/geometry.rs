//! Arc-length parametrized polyline paths and the a-priori collision zone
//! between two of them.
//!
//! A path carries the footprint of the vehicle driving it. The footprint is a
//! rectangle centred on the path point and aligned with the path heading.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid resolution for the coarse collision-zone scan.
const ZONE_GRID_STEP: f64 = 0.1;
/// Final resolution of the zone boundaries.
const ZONE_REFINE_TOL: f64 = 1e-3;
/// Slack when checking an arc length against the path range.
const RANGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point::new(x, y)
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Rectangular vehicle footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

impl Footprint {
    pub const fn new(length: f64, width: f64) -> Self {
        Self { length, width }
    }
}

/// Position, heading and curvature at one arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub position: Point,
    /// Heading in radians. Unwrapped along the path, so it is continuous in `s`.
    pub psi: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    waypoints: Vec<Point>,
    arclength: Vec<f64>,
    corridor_halfwidth: f64,
    footprint: Footprint,
    headings: Vec<f64>,
    curvature: Vec<f64>,
}

impl Path {
    pub fn new(waypoints: Vec<Point>, corridor_halfwidth: f64, footprint: Footprint) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::invalid(format!(
                "a path needs at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        if waypoints.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::invalid("waypoints must be finite"));
        }
        if !(footprint.length > 0.0 && footprint.width > 0.0) {
            return Err(Error::invalid(format!(
                "vehicle dimensions must be positive, got {} x {}",
                footprint.length, footprint.width
            )));
        }
        if !(corridor_halfwidth >= footprint.width / 2.0) {
            return Err(Error::invalid(format!(
                "corridor half-width {corridor_halfwidth} is narrower than half the vehicle width {}",
                footprint.width / 2.0
            )));
        }

        let mut arclength = Vec::with_capacity(waypoints.len());
        arclength.push(0.0);
        let mut headings = Vec::with_capacity(waypoints.len() - 1);
        for (k, w) in waypoints.windows(2).enumerate() {
            let len = w[0].distance(w[1]);
            if len <= 1e-12 {
                return Err(Error::DegenerateGeometry(format!(
                    "waypoints {k} and {} coincide",
                    k + 1
                )));
            }
            arclength.push(arclength[k] + len);

            let raw = (w[1].y - w[0].y).atan2(w[1].x - w[0].x);
            let heading = match headings.last() {
                Some(&prev) => prev + wrap_angle(raw - prev),
                None => raw,
            };
            headings.push(heading);
        }

        let n = waypoints.len();
        let mut curvature = vec![0.0; n];
        for k in 1..n - 1 {
            curvature[k] = circumcircle_curvature(waypoints[k - 1], waypoints[k], waypoints[k + 1]);
        }

        Ok(Self {
            waypoints,
            arclength,
            corridor_halfwidth,
            footprint,
            headings,
            curvature,
        })
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn cumulative_arclength(&self) -> &[f64] {
        &self.arclength
    }

    pub fn length(&self) -> f64 {
        *self.arclength.last().expect("path has waypoints")
    }

    pub fn corridor_halfwidth(&self) -> f64 {
        self.corridor_halfwidth
    }

    pub fn footprint(&self) -> Footprint {
        self.footprint
    }

    pub fn vehicle_length(&self) -> f64 {
        self.footprint.length
    }

    pub fn vehicle_width(&self) -> f64 {
        self.footprint.width
    }

    pub fn eval(&self, s: f64) -> Result<PathPoint> {
        let length = self.length();
        if !s.is_finite() || s < -RANGE_EPS || s > length + RANGE_EPS {
            return Err(Error::OutOfRange { s, length });
        }
        Ok(self.eval_clamped(s))
    }

    /// Like [`Path::eval`] but clamps `s` into the path range.
    pub(crate) fn eval_clamped(&self, s: f64) -> PathPoint {
        let s = s.clamp(0.0, self.length());
        let k = self.segment_index(s);
        let (s0, s1) = (self.arclength[k], self.arclength[k + 1]);
        let t = (s - s0) / (s1 - s0);
        let position = self.waypoints[k].lerp(self.waypoints[k + 1], t);
        let kappa = self.curvature[k] + (self.curvature[k + 1] - self.curvature[k]) * t;
        PathPoint {
            position,
            psi: self.heading_at(s),
            kappa,
        }
    }

    fn segment_index(&self, s: f64) -> usize {
        let last = self.waypoints.len() - 2;
        self.arclength.partition_point(|&x| x <= s).saturating_sub(1).min(last)
    }

    // Headings are blended linearly between segment midpoints.
    fn heading_at(&self, s: f64) -> f64 {
        let mid = |k: usize| 0.5 * (self.arclength[k] + self.arclength[k + 1]);
        let nseg = self.headings.len();
        if nseg == 1 || s <= mid(0) {
            return self.headings[0];
        }
        if s >= mid(nseg - 1) {
            return self.headings[nseg - 1];
        }
        let k = self.segment_index(s);
        let (k0, k1) = if s < mid(k) { (k - 1, k) } else { (k, k + 1) };
        let t = (s - mid(k0)) / (mid(k1) - mid(k0));
        self.headings[k0] + (self.headings[k1] - self.headings[k0]) * t
    }

    fn footprint_at(&self, s: f64) -> OrientedRect {
        let p = self.eval_clamped(s);
        OrientedRect::new(p.position, p.psi, self.footprint)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    }
    r
}

/// Signed curvature of the circle through three points, positive for left turns.
fn circumcircle_curvature(p0: Point, p1: Point, p2: Point) -> f64 {
    let (ax, ay) = (p1.x - p0.x, p1.y - p0.y);
    let (bx, by) = (p2.x - p1.x, p2.y - p1.y);
    let cross = ax * by - ay * bx;
    let denom = p0.distance(p1) * p1.distance(p2) * p0.distance(p2);
    if denom <= 0.0 {
        0.0
    } else {
        2.0 * cross / denom
    }
}

/// Heading-aligned rectangle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OrientedRect {
    center: Point,
    axis: (f64, f64),
    half_length: f64,
    half_width: f64,
}

impl OrientedRect {
    pub(crate) fn new(center: Point, heading: f64, footprint: Footprint) -> Self {
        Self {
            center,
            axis: (heading.cos(), heading.sin()),
            half_length: footprint.length / 2.0,
            half_width: footprint.width / 2.0,
        }
    }

    fn circumradius(&self) -> f64 {
        self.half_length.hypot(self.half_width)
    }

    fn project(&self, d: (f64, f64)) -> (f64, f64) {
        let c = self.center.x * d.0 + self.center.y * d.1;
        let (ux, uy) = self.axis;
        let r = self.half_length * (ux * d.0 + uy * d.1).abs()
            + self.half_width * (-uy * d.0 + ux * d.1).abs();
        (c - r, c + r)
    }

    /// Largest gap along any separating axis; negative means penetration.
    pub(crate) fn separation(&self, other: &OrientedRect) -> f64 {
        let axes = [
            self.axis,
            (-self.axis.1, self.axis.0),
            other.axis,
            (-other.axis.1, other.axis.0),
        ];
        axes.iter()
            .map(|&d| {
                let (a0, a1) = self.project(d);
                let (b0, b1) = other.project(d);
                (b0 - a1).max(a0 - b1)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn overlaps(&self, other: &OrientedRect) -> bool {
        let reach = self.circumradius() + other.circumradius();
        if self.center.distance(other.center) > reach {
            return false;
        }
        self.separation(other) < 0.0
    }
}

/// Closed arc-length interval on one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub s_in: f64,
    pub s_out: f64,
}

impl Interval {
    pub fn new(s_in: f64, s_out: f64) -> Self {
        Self { s_in, s_out }
    }

    pub fn length(&self) -> f64 {
        self.s_out - self.s_in
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.s_in && s <= self.s_out
    }
}

/// Arc-length intervals on two paths outside of which the footprints cannot
/// overlap. `intervals` is `None` when the footprints never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionZone {
    pub intervals: Option<(Interval, Interval)>,
}

impl CollisionZone {
    pub const EMPTY: CollisionZone = CollisionZone { intervals: None };

    pub fn new(interval_a: Interval, interval_b: Interval) -> Self {
        Self {
            intervals: Some((interval_a, interval_b)),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_none()
    }

    pub fn interval_a(&self) -> Option<Interval> {
        self.intervals.map(|(a, _)| a)
    }

    pub fn interval_b(&self) -> Option<Interval> {
        self.intervals.map(|(_, b)| b)
    }

    /// The same zone seen from the other path.
    pub fn mirrored(&self) -> Self {
        Self {
            intervals: self.intervals.map(|(a, b)| (b, a)),
        }
    }
}

fn grid(length: f64) -> Vec<f64> {
    let n = (length / ZONE_GRID_STEP).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| i as f64 * ZONE_GRID_STEP).collect();
    if length - g[n] > 1e-12 {
        g.push(length);
    }
    g
}

/// Smallest footprint separation between `rect` and any footprint along `path`.
fn min_separation(rect: &OrientedRect, path: &Path, samples: &[f64], rects: &[OrientedRect]) -> f64 {
    let reach = rect.circumradius() + rects[0].circumradius();
    let seps: Vec<f64> = rects
        .iter()
        .map(|r| {
            let d = rect.center.distance(r.center);
            if d > reach + 1.0 {
                d - reach
            } else {
                rect.separation(r)
            }
        })
        .collect();

    let mut best = seps.iter().copied().fold(f64::INFINITY, f64::min);
    for j in 0..seps.len() {
        let left = if j > 0 { seps[j - 1] } else { f64::INFINITY };
        let right = seps.get(j + 1).copied().unwrap_or(f64::INFINITY);
        if seps[j] > 1.0 || seps[j] > left || seps[j] > right {
            continue;
        }
        let lo = samples[j.saturating_sub(1)];
        let hi = samples[(j + 1).min(samples.len() - 1)];
        let f = |s: f64| rect.separation(&path.footprint_at(s));
        best = best.min(golden_min(f, lo, hi));
    }
    best
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-5 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(lo)).min(f(hi))
}

/// Interval on `path` covering every position whose footprint can overlap some
/// footprint on `other`. `hit` holds the coarse-grid result per sample.
fn refine_interval(path: &Path, samples: &[f64], hit: &[bool], other: &Path) -> Interval {
    let other_samples = grid(other.length());
    let other_rects: Vec<OrientedRect> = other_samples.iter().map(|&s| other.footprint_at(s)).collect();
    let touches = |s: f64| min_separation(&path.footprint_at(s), other, &other_samples, &other_rects) < 0.0;

    let first = hit.iter().position(|&h| h).expect("non-empty zone");
    let last = hit.iter().rposition(|&h| h).expect("non-empty zone");

    let lower = {
        let mut inside = samples[first];
        let mut outside = None;
        let mut k = first;
        while k > 0 {
            k -= 1;
            if touches(samples[k]) {
                inside = samples[k];
            } else {
                outside = Some(samples[k]);
                break;
            }
        }
        match outside {
            None => 0.0,
            Some(mut out) => {
                while inside - out > ZONE_REFINE_TOL {
                    let mid = 0.5 * (inside + out);
                    if touches(mid) {
                        inside = mid;
                    } else {
                        out = mid;
                    }
                }
                out
            }
        }
    };

    let upper = {
        let mut inside = samples[last];
        let mut outside = None;
        let mut k = last;
        while k + 1 < samples.len() {
            k += 1;
            if touches(samples[k]) {
                inside = samples[k];
            } else {
                outside = Some(samples[k]);
                break;
            }
        }
        match outside {
            None => path.length(),
            Some(mut out) => {
                while out - inside > ZONE_REFINE_TOL {
                    let mid = 0.5 * (inside + out);
                    if touches(mid) {
                        inside = mid;
                    } else {
                        out = mid;
                    }
                }
                out
            }
        }
    };

    Interval::new(lower, upper)
}

/// Computes the collision zone between two paths.
///
/// A 0.1 m grid over both arc lengths finds every pair of overlapping
/// footprints; the hull of the overlapping positions on each path is then
/// refined by bisection to 1 mm, rounding outward.
pub fn collision_zone(path_a: &Path, path_b: &Path) -> CollisionZone {
    let samples_a = grid(path_a.length());
    let samples_b = grid(path_b.length());
    let rects_a: Vec<OrientedRect> = samples_a.iter().map(|&s| path_a.footprint_at(s)).collect();
    let rects_b: Vec<OrientedRect> = samples_b.iter().map(|&s| path_b.footprint_at(s)).collect();

    let mut hit_a = vec![false; samples_a.len()];
    let mut hit_b = vec![false; samples_b.len()];
    for (i, ra) in rects_a.iter().enumerate() {
        for (j, rb) in rects_b.iter().enumerate() {
            if ra.overlaps(rb) {
                hit_a[i] = true;
                hit_b[j] = true;
            }
        }
    }
    if !hit_a.iter().any(|&h| h) {
        return CollisionZone::EMPTY;
    }

    let interval_a = refine_interval(path_a, &samples_a, &hit_a, path_b);
    let interval_b = refine_interval(path_b, &samples_b, &hit_b, path_a);
    CollisionZone::new(interval_a, interval_b)
}

/// Zones for every ordered pair of paths; `get(i, j)` has `i`'s interval first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneTable {
    n: usize,
    zones: Vec<CollisionZone>,
}

impl ZoneTable {
    pub fn compute(paths: &[&Path]) -> Self {
        let n = paths.len();
        let mut zones = vec![CollisionZone::EMPTY; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let z = collision_zone(paths[i], paths[j]);
                zones[i * n + j] = z;
                zones[j * n + i] = z.mirrored();
            }
        }
        Self { n, zones }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> CollisionZone {
        self.zones[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp() -> Footprint {
        Footprint::new(4.0, 2.0)
    }

    fn line(a: (f64, f64), b: (f64, f64)) -> Path {
        Path::new(vec![Point::new(a.0, a.1), Point::new(b.0, b.1)], 1.75, fp()).unwrap()
    }

    fn arc(radius: f64, vertices: usize) -> Path {
        let pts = (0..vertices)
            .map(|k| {
                let th = std::f64::consts::FRAC_PI_2 * k as f64 / (vertices - 1) as f64;
                Point::new(radius * th.sin(), radius * (1.0 - th.cos()))
            })
            .collect();
        Path::new(pts, 1.75, fp()).unwrap()
    }

    #[test]
    fn straight_and_l_shaped_lengths() {
        assert_eq!(line((0.0, 0.0), (100.0, 0.0)).length(), 100.0);
        let l = Path::new(
            vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)],
            1.75,
            fp(),
        )
        .unwrap();
        assert_eq!(l.length(), 20.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Path::new(vec![Point::new(0.0, 0.0)], 1.75, fp()),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            Path::new(vec![Point::new(1.0, 1.0), Point::new(1.0, 1.0)], 1.75, fp()),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(Path::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], 0.5, fp()).is_err());
    }

    #[test]
    fn eval_endpoints_and_range() {
        let p = line((0.0, 0.0), (100.0, 0.0));
        let start = p.eval(0.0).unwrap();
        assert_eq!(start.position, Point::new(0.0, 0.0));
        assert_eq!(start.psi, 0.0);
        for s in [0.0, 13.3, 50.0, 100.0] {
            assert_eq!(p.eval(s).unwrap().kappa, 0.0);
        }
        assert!(matches!(p.eval(100.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(p.eval(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn arc_curvature_close_to_analytic() {
        let p = arc(50.0, 100);
        let k = p.eval(p.length() / 2.0).unwrap().kappa;
        assert!((k - 0.02).abs() < 0.002, "kappa = {k}");
    }

    #[test]
    fn heading_is_continuous_across_vertices() {
        let p = arc(20.0, 30);
        let mut prev = p.eval(0.0).unwrap().psi;
        let mut s = 0.0;
        while s < p.length() {
            let psi = p.eval(s).unwrap().psi;
            assert!((psi - prev).abs() < 0.01);
            prev = psi;
            s += 0.05;
        }
        assert!((prev - std::f64::consts::FRAC_PI_2).abs() < 0.06);
    }

    #[test]
    fn parallel_paths_have_empty_zone() {
        let a = line((0.0, 0.0), (100.0, 0.0));
        let b = line((0.0, 10.0), (100.0, 10.0));
        assert!(collision_zone(&a, &b).is_empty());
    }

    #[test]
    fn identical_paths_span_full_length() {
        let a = line((0.0, 0.0), (30.0, 0.0));
        let z = collision_zone(&a, &a);
        let (ia, ib) = z.intervals.unwrap();
        assert_eq!(ia, Interval::new(0.0, 30.0));
        assert_eq!(ib, Interval::new(0.0, 30.0));
    }

    #[test]
    fn zone_table_is_mirrored() {
        let a = line((-20.0, 0.0), (20.0, 0.0));
        let b = line((0.0, -20.0), (0.0, 20.0));
        let t = ZoneTable::compute(&[&a, &b]);
        assert_eq!(t.get(0, 1).mirrored(), t.get(1, 0));
        assert!(t.get(0, 0).is_empty());
    }

    #[test]
    fn wrap_angle_range() {
        for a in [-10.0, -3.5, 0.0, 3.2, 7.0] {
            let w = wrap_angle(a);
            assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            assert!(((a - w) / std::f64::consts::TAU).fract().abs() < 1e-9 || ((a - w) / std::f64::consts::TAU).fract().abs() > 1.0 - 1e-9);
        }
    }
}
