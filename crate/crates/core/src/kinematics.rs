//! Longitudinal motion along a path: jerk integration, lifting a velocity
//! profile onto its path, and interpolated zone crossing times.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Interval, Path, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongState {
    pub s: f64,
    pub v: f64,
    pub a: f64,
}

impl LongState {
    pub const fn new(s: f64, v: f64, a: f64) -> Self {
        Self { s, v, a }
    }
}

/// Physical bounds on longitudinal motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub v_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub j_min: f64,
    pub j_max: f64,
}

impl Limits {
    pub fn validate(&self) -> Result<()> {
        let ok = self.v_max > 0.0
            && self.a_min < 0.0
            && self.a_max > 0.0
            && self.j_min < 0.0
            && self.j_max > 0.0
            && [self.v_max, self.a_min, self.a_max, self.j_min, self.j_max]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "limits need v_max > 0, a_min < 0 < a_max, j_min < 0 < j_max; got {self:?}"
            )))
        }
    }

    /// Distance needed to stop from `v` braking at `a_min`.
    pub fn stopping_distance(&self, v: f64) -> f64 {
        v * v / (2.0 * -self.a_min)
    }
}

/// Longitudinal states sampled at `t0 + i * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityProfile {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<LongState>,
}

impl VelocityProfile {
    pub fn new(t0: f64, dt: f64, states: Vec<LongState>) -> Result<Self> {
        if !(dt > 0.0) || states.is_empty() {
            return Err(Error::invalid("a profile needs dt > 0 and at least one state"));
        }
        if states.windows(2).any(|w| w[1].s < w[0].s) || states.iter().any(|x| x.v < 0.0) {
            return Err(Error::invalid("profile arc length must be non-decreasing with v >= 0"));
        }
        Ok(Self { t0, dt, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.states.len() - 1)
    }

    pub fn last(&self) -> LongState {
        *self.states.last().expect("non-empty profile")
    }

    /// State at time `t` by linear interpolation between samples. Times past the
    /// horizon return the last sample, times before `t0` the first.
    pub fn state_at(&self, t: f64) -> LongState {
        let x = (t - self.t0) / self.dt;
        if x <= 0.0 {
            return self.states[0];
        }
        let i = x.floor() as usize;
        if i + 1 >= self.states.len() {
            return self.last();
        }
        let f = x - i as f64;
        let (p, q) = (self.states[i], self.states[i + 1]);
        LongState {
            s: p.s + (q.s - p.s) * f,
            v: p.v + (q.v - p.v) * f,
            a: p.a + (q.a - p.a) * f,
        }
    }

    /// Earliest time at which `s` reaches `target`, interpolating linearly
    /// between the bracketing samples.
    pub fn first_time_reaching(&self, target: f64) -> Option<f64> {
        if self.states[0].s >= target {
            return Some(self.t0);
        }
        let i = self.states.iter().position(|x| x.s >= target)?;
        let (p, q) = (self.states[i - 1], self.states[i]);
        Some(self.time(i - 1) + self.dt * (target - p.s) / (q.s - p.s))
    }
}

// Smallest root of v + a*t + j*t^2/2 = target in [0, horizon], only counting a
// crossing in direction `dir` (+1 upward, -1 downward).
fn velocity_crossing(v: f64, a: f64, j: f64, target: f64, dir: f64, horizon: f64) -> Option<f64> {
    let c = v - target;
    // already at the bound and leaving it
    if c * dir >= 0.0 {
        if c == 0.0 && (a * dir > 0.0 || (a == 0.0 && j * dir > 0.0)) {
            return Some(0.0);
        }
        if c * dir > 0.0 {
            return Some(0.0);
        }
        return None;
    }
    let mut best: Option<f64> = None;
    let mut consider = |t: f64| {
        if t.is_finite() && t > 0.0 && t <= horizon && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    };
    if j.abs() < 1e-12 {
        if a != 0.0 {
            consider(-c / a);
        }
    } else {
        let qa = 0.5 * j;
        let disc = a * a - 4.0 * qa * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (a + a.signum() * sq);
            let q = if q == 0.0 { -0.5 * sq } else { q };
            consider(q / qa);
            if q != 0.0 {
                consider(c / q);
            }
        }
    }
    best
}

fn advance(state: LongState, jerk: f64, dt: f64, limits: &Limits) -> LongState {
    let LongState { mut s, mut v, mut a } = state;
    let mut j = jerk;
    let mut rem = dt;

    for _ in 0..8 {
        if rem <= 0.0 {
            break;
        }
        // acceleration saturation
        let mut tau_a = f64::INFINITY;
        if j > 0.0 {
            if a >= limits.a_max {
                a = limits.a_max;
                j = 0.0;
            } else {
                tau_a = (limits.a_max - a) / j;
            }
        } else if j < 0.0 {
            if a <= limits.a_min {
                a = limits.a_min;
                j = 0.0;
            } else {
                tau_a = (limits.a_min - a) / j;
            }
        }
        let tau_stop = velocity_crossing(v, a, j, 0.0, -1.0, rem).unwrap_or(f64::INFINITY);
        let tau_cap = velocity_crossing(v, a, j, limits.v_max, 1.0, rem).unwrap_or(f64::INFINITY);
        let tau = rem.min(tau_a).min(tau_stop).min(tau_cap);

        s += v * tau + 0.5 * a * tau * tau + j * tau * tau * tau / 6.0;
        v += a * tau + 0.5 * j * tau * tau;
        a += j * tau;
        rem -= tau;

        if tau == tau_stop {
            // stopped: no reversing for the rest of the step
            v = 0.0;
            a = 0.0;
            break;
        }
        if tau == tau_cap {
            v = limits.v_max;
            a = 0.0;
            s += v * rem;
            break;
        }
        if tau == tau_a {
            a = if j > 0.0 { limits.a_max } else { limits.a_min };
            j = 0.0;
        }
    }
    LongState {
        s,
        v: v.clamp(0.0, limits.v_max),
        a: a.clamp(limits.a_min, limits.a_max),
    }
}

/// Integrates a piecewise-constant jerk sequence, one jerk value per step.
///
/// Acceleration saturates at the limits. Speed is held in `[0, v_max]`: when
/// it reaches zero the vehicle stays put with zero acceleration for the rest of
/// the step, and at `v_max` it cruises. The result has `jerks.len() + 1` states.
pub fn integrate_jerk_sequence(
    initial: LongState,
    jerks: &[f64],
    dt: f64,
    limits: &Limits,
) -> VelocityProfile {
    debug_assert!(dt > 0.0);
    debug_assert!(jerks.iter().all(|j| j.is_finite()));
    let mut state = LongState {
        s: initial.s,
        v: initial.v.clamp(0.0, limits.v_max),
        a: initial.a.clamp(limits.a_min, limits.a_max),
    };
    let mut states = Vec::with_capacity(jerks.len() + 1);
    states.push(state);
    for &j in jerks {
        state = advance(state, j, dt, limits);
        states.push(state);
    }
    VelocityProfile {
        t0: 0.0,
        dt,
        states,
    }
}

/// Per-sample planar quantities of a lifted trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub position: Point,
    pub psi: f64,
    /// Yaw rate from finite differences of `psi`.
    pub omega: f64,
    pub a_lon: f64,
    pub a_lat: f64,
}

/// A velocity profile lifted onto its path.
#[derive(Debug, Clone)]
pub struct Trajectory {
    profile: VelocityProfile,
    path: Arc<Path>,
    samples: Vec<TrajectorySample>,
}

pub fn lift_to_trajectory(profile: VelocityProfile, path: Arc<Path>) -> Result<Trajectory> {
    let end = profile.last().s;
    if end > path.length() + 1e-9 || profile.states[0].s < -1e-9 {
        return Err(Error::Overrun {
            end,
            length: path.length(),
        });
    }
    let points: Vec<_> = profile.states.iter().map(|x| path.eval_clamped(x.s)).collect();
    let n = points.len();
    let dt = profile.dt;
    let samples = (0..n)
        .map(|i| {
            let omega = if n < 2 {
                0.0
            } else if i == 0 {
                (points[1].psi - points[0].psi) / dt
            } else if i == n - 1 {
                (points[n - 1].psi - points[n - 2].psi) / dt
            } else {
                (points[i + 1].psi - points[i - 1].psi) / (2.0 * dt)
            };
            let st = profile.states[i];
            TrajectorySample {
                position: points[i].position,
                psi: points[i].psi,
                omega,
                a_lon: st.a,
                a_lat: st.v * st.v * points[i].kappa,
            }
        })
        .collect();
    Ok(Trajectory {
        profile,
        path,
        samples,
    })
}

impl Trajectory {
    pub fn profile(&self) -> &VelocityProfile {
        &self.profile
    }

    pub fn path(&self) -> &Arc<Path> {
        &self.path
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.profile.dt
    }

    pub fn t0(&self) -> f64 {
        self.profile.t0
    }
}

/// Arc lengths (of the path reference point) at which the footprint starts
/// and stops occupying `interval`: entry when the front bumper reaches
/// `s_in`, exit once the rear bumper has passed `s_out`.
pub fn effective_interval(interval: Interval, vehicle_length: f64) -> Interval {
    Interval::new(
        interval.s_in - vehicle_length / 2.0,
        interval.s_out + vehicle_length / 2.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneCrossing {
    pub t_in: Option<f64>,
    pub t_out: Option<f64>,
}

pub fn zone_crossing_times(trajectory: &Trajectory, interval: Interval) -> ZoneCrossing {
    let eff = effective_interval(interval, trajectory.path.vehicle_length());
    ZoneCrossing {
        t_in: trajectory.profile.first_time_reaching(eff.s_in),
        t_out: trajectory.profile.first_time_reaching(eff.s_out),
    }
}

/// True once the vehicle has cleared the zone within the horizon. Reaching the
/// exit boundary exactly counts.
pub fn reaches_zone_end(trajectory: &Trajectory, interval: Interval) -> bool {
    zone_crossing_times(trajectory, interval).t_out.is_some()
}

/// How one trajectory uses a zone over its horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occupancy {
    /// Already past the zone at the first sample.
    Vacated,
    /// Never reaches the zone within the horizon.
    NotReached,
    /// Occupies `[t_in, t_out)`; `t_out` is `None` when it is still inside at
    /// the end of the horizon.
    Window { t_in: f64, t_out: Option<f64> },
}

impl Occupancy {
    pub fn of(trajectory: &Trajectory, interval: Interval) -> Self {
        let c = zone_crossing_times(trajectory, interval);
        match (c.t_in, c.t_out) {
            (None, _) => Occupancy::NotReached,
            (Some(t_in), Some(t_out)) if t_out <= t_in => Occupancy::Vacated,
            (Some(t_in), t_out) => Occupancy::Window { t_in, t_out },
        }
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        match *self {
            Occupancy::Window { t_in, t_out } => Some((t_in, t_out.unwrap_or(f64::INFINITY))),
            _ => None,
        }
    }
}
