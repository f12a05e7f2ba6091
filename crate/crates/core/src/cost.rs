//! Three-zone evaluation functionals and the ensemble cost built from them.
//!
//! Every scalar trajectory property `f` is rated by a functional with a
//! comfort, a discomfort and an infeasibility zone on each side of its optimum.
//! The components are added on top of each other as `f` moves outward:
//!
//! ```text
//! comfort        a * (f - f_opt)^2                          for f != f_opt
//! discomfort     b * (f - f_disc)^2                         beyond f_disc
//! infeasibility  c * d^2 * exp(|d|), d = f - (f_inf - m)    beyond f_inf - m
//! ```
//!
//! with `a = T_comf / cmargin^2` and `c = T_inf / (m^2 * exp(m))`, so the
//! comfort part equals `T_comf` at `f_opt + cmargin` and the infeasibility part
//! equals `T_inf` at `f_inf`. The negative side mirrors this.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CollisionZone, ZoneTable};
use crate::kinematics::{effective_interval, Occupancy, Trajectory};

/// Zone boundaries for one side of a functional. `disc` and `inf` are
/// absolute property values, the margins are distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    /// Start of the discomfort zone.
    pub disc: f64,
    /// Infeasible value.
    pub inf: f64,
    /// Distance before `inf` at which infeasibility costs start.
    pub margin: f64,
    /// Deviation from the optimum that costs exactly `T_comf`.
    pub cmargin: f64,
    /// Discomfort coefficient.
    pub b: f64,
}

/// Evaluation functional for one scalar property. A side set to `None` costs
/// nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationFunctional {
    pub f_opt: f64,
    pub t_comf: f64,
    pub t_inf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<Deviation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<Deviation>,
}

impl EvaluationFunctional {
    /// Symmetric functional around `f_opt` with `b = 20 a`.
    pub fn symmetric(f_opt: f64, cmargin: f64, disc: f64, inf: f64, margin: f64) -> Self {
        Self::new(
            f_opt,
            Some((cmargin, f_opt + disc, f_opt + inf, margin)),
            Some((cmargin, f_opt - disc, f_opt - inf, margin)),
        )
    }

    /// Builds a functional with `T_comf = 1`, `T_inf = 1e6` and `b = 20 a` on
    /// each side. Sides are given as `(cmargin, disc, inf, margin)`.
    pub fn new(
        f_opt: f64,
        plus: Option<(f64, f64, f64, f64)>,
        minus: Option<(f64, f64, f64, f64)>,
    ) -> Self {
        const T_COMF: f64 = 1.0;
        const T_INF: f64 = 1e6;
        let side = |(cmargin, disc, inf, margin): (f64, f64, f64, f64)| Deviation {
            disc,
            inf,
            margin,
            cmargin,
            b: 20.0 * T_COMF / (cmargin * cmargin),
        };
        Self {
            f_opt,
            t_comf: T_COMF,
            t_inf: T_INF,
            plus: plus.map(side),
            minus: minus.map(side),
        }
    }

    pub fn a_plus(&self) -> Option<f64> {
        self.plus.map(|d| self.comfort_coefficient(&d))
    }

    pub fn a_minus(&self) -> Option<f64> {
        self.minus.map(|d| self.comfort_coefficient(&d))
    }

    pub fn c_plus(&self) -> Option<f64> {
        self.plus.map(|d| self.infeasibility_coefficient(&d))
    }

    pub fn c_minus(&self) -> Option<f64> {
        self.minus.map(|d| self.infeasibility_coefficient(&d))
    }

    fn comfort_coefficient(&self, d: &Deviation) -> f64 {
        self.t_comf / (d.cmargin * d.cmargin)
    }

    fn infeasibility_coefficient(&self, d: &Deviation) -> f64 {
        self.t_inf / (d.margin * d.margin * d.margin.exp())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if !self.f_opt.is_finite() {
            return fail(format!("f_opt must be finite, got {}", self.f_opt));
        }
        if !(self.t_comf > 0.0 && self.t_inf > self.t_comf && self.t_inf.is_finite()) {
            return fail(format!(
                "thresholds need 0 < T_comf < T_inf, got {} and {}",
                self.t_comf, self.t_inf
            ));
        }
        let check_side = |d: &Deviation, name: &str| -> Result<()> {
            if !(d.margin > 0.0 && d.cmargin > 0.0) {
                return fail(format!("{name}: margins must be positive"));
            }
            let ordered = if name == "plus" {
                self.f_opt <= d.disc && d.disc <= d.inf - d.margin
            } else {
                d.inf + d.margin <= d.disc && d.disc <= self.f_opt
            };
            if !ordered {
                return fail(format!(
                    "{name}: zone boundaries out of order (f_opt {}, disc {}, inf {}, margin {})",
                    self.f_opt, d.disc, d.inf, d.margin
                ));
            }
            if !(d.b > self.comfort_coefficient(d)) {
                return fail(format!("{name}: discomfort coefficient b must exceed a"));
            }
            Ok(())
        };
        if let Some(d) = &self.plus {
            check_side(d, "plus")?;
        }
        if let Some(d) = &self.minus {
            check_side(d, "minus")?;
        }
        Ok(())
    }

    pub fn eval(&self, f: f64) -> Result<CostBreakdown> {
        if !f.is_finite() {
            return Err(Error::invalid(format!("property value must be finite, got {f}")));
        }
        Ok(self.eval_finite(f))
    }

    pub(crate) fn eval_finite(&self, f: f64) -> CostBreakdown {
        let mut out = CostBreakdown::default();
        if f > self.f_opt {
            if let Some(d) = &self.plus {
                let dev = f - self.f_opt;
                out.comfort = self.comfort_coefficient(d) * dev * dev;
                if f > d.disc {
                    let x = f - d.disc;
                    out.discomfort = d.b * x * x;
                }
                let onset = d.inf - d.margin;
                if f > onset {
                    let x = f - onset;
                    out.infeasibility = self.infeasibility_coefficient(d) * x * x * x.abs().exp();
                }
            }
        } else if f < self.f_opt {
            if let Some(d) = &self.minus {
                let dev = f - self.f_opt;
                out.comfort = self.comfort_coefficient(d) * dev * dev;
                if f < d.disc {
                    let x = f - d.disc;
                    out.discomfort = d.b * x * x;
                }
                let onset = d.inf + d.margin;
                if f < onset {
                    let x = f - onset;
                    out.infeasibility = self.infeasibility_coefficient(d) * x * x * x.abs().exp();
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub comfort: f64,
    pub discomfort: f64,
    pub infeasibility: f64,
    pub row: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.comfort + self.discomfort + self.infeasibility + self.row
    }

    pub fn scaled(self, k: f64) -> Self {
        Self {
            comfort: self.comfort * k,
            discomfort: self.discomfort * k,
            infeasibility: self.infeasibility * k,
            row: self.row * k,
        }
    }
}

impl Add for CostBreakdown {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            comfort: self.comfort + rhs.comfort,
            discomfort: self.discomfort + rhs.discomfort,
            infeasibility: self.infeasibility + rhs.infeasibility,
            row: self.row + rhs.row,
        }
    }
}

impl AddAssign for CostBreakdown {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for CostBreakdown {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Cost parameters of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleCostParams {
    pub velocity: EvaluationFunctional,
    pub a_lon: EvaluationFunctional,
    pub a_lat: EvaluationFunctional,
    pub yaw_rate: EvaluationFunctional,
    pub offset: EvaluationFunctional,
    /// Only the lower side is used: a short clearance time is bad, a long one
    /// costs nothing.
    pub tzc: EvaluationFunctional,
    /// Right-of-way upscaling factor `u`.
    pub row_factor: f64,
}

impl VehicleCostParams {
    /// Default parameter table for a desired speed `v_opt` (m/s).
    pub fn defaults(v_opt: f64) -> Self {
        Self {
            velocity: default_velocity(v_opt),
            a_lon: default_a_lon(),
            a_lat: default_a_lat(),
            yaw_rate: default_yaw_rate(),
            offset: default_offset(),
            tzc: default_tzc(),
            row_factor: DEFAULT_ROW_FACTOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("velocity", &self.velocity),
            ("a_lon", &self.a_lon),
            ("a_lat", &self.a_lat),
            ("yaw_rate", &self.yaw_rate),
            ("offset", &self.offset),
            ("tzc", &self.tzc),
        ] {
            f.validate()
                .map_err(|e| Error::Validation(format!("{name}: {e}")))?;
        }
        if self.tzc.plus.is_some() {
            return Err(Error::Validation(
                "tzc: only the lower side may be set".into(),
            ));
        }
        if !(self.row_factor > 1.0 && self.row_factor.is_finite()) {
            return Err(Error::Validation(format!(
                "row_factor must be > 1, got {}",
                self.row_factor
            )));
        }
        Ok(())
    }

    /// Smallest infeasibility threshold over all functionals; an ensemble at or
    /// above it is rejected.
    pub fn t_inf(&self) -> f64 {
        [
            self.velocity.t_inf,
            self.a_lon.t_inf,
            self.a_lat.t_inf,
            self.yaw_rate.t_inf,
            self.offset.t_inf,
            self.tzc.t_inf,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

pub const DEFAULT_ROW_FACTOR: f64 = 10.0;

pub fn default_velocity(v_opt: f64) -> EvaluationFunctional {
    EvaluationFunctional::new(
        v_opt,
        Some((0.1 * v_opt, 1.05 * v_opt, 1.2 * v_opt, 0.1 * v_opt)),
        Some((0.5 * v_opt, 0.3 * v_opt, -0.1 * v_opt, 0.05 * v_opt)),
    )
}

pub fn default_a_lon() -> EvaluationFunctional {
    EvaluationFunctional::symmetric(0.0, 1.5, 2.5, 8.0, 1.0)
}

pub fn default_a_lat() -> EvaluationFunctional {
    EvaluationFunctional::symmetric(0.0, 1.5, 3.0, 6.0, 1.0)
}

pub fn default_yaw_rate() -> EvaluationFunctional {
    EvaluationFunctional::symmetric(0.0, 0.3, 0.6, 1.5, 0.3)
}

pub fn default_offset() -> EvaluationFunctional {
    EvaluationFunctional::symmetric(0.0, 0.5, 1.0, 2.0, 0.5)
}

/// Zero cost from 2 s upward, discomfort below 2 s, infeasible at 0 s.
pub fn default_tzc() -> EvaluationFunctional {
    EvaluationFunctional::new(2.0, None, Some((1.0, 2.0, 0.0, 0.5)))
}

/// Time integral (right Riemann sum) of the per-sample property costs.
///
/// Jerk, curvature and minimum-distance terms are not rated. The lateral
/// offset is fixed by the path and therefore always sits at its optimum.
pub fn singleton_cost(trajectory: &Trajectory, params: &VehicleCostParams) -> CostBreakdown {
    let dt = trajectory.dt();
    let states = &trajectory.profile().states;
    trajectory
        .samples()
        .iter()
        .zip(states)
        .skip(1)
        .map(|(x, st)| {
            let g = params.velocity.eval_finite(st.v)
                + params.a_lon.eval_finite(x.a_lon)
                + params.a_lat.eval_finite(x.a_lat)
                + params.yaw_rate.eval_finite(x.omega)
                + params.offset.eval_finite(0.0);
            g.scaled(dt)
        })
        .sum()
}

/// Time of zone clearance between two trajectories.
///
/// `+inf` when the zone is empty or the vehicles never interact; `<= 0` (the
/// negated overlap of the occupancy windows) when they occupy the zone at the
/// same time; otherwise the gap of the second vehicle to its zone entry at the
/// moment the first one clears, divided by its speed at that moment.
pub fn tzc(traj_a: &Trajectory, traj_b: &Trajectory, zone: &CollisionZone) -> f64 {
    match zone.intervals {
        None => f64::INFINITY,
        Some((ia, ib)) => {
            let oa = Occupancy::of(traj_a, ia);
            let ob = Occupancy::of(traj_b, ib);
            tzc_from_occupancy(traj_a, oa, ia, traj_b, ob, ib)
        }
    }
}

pub(crate) fn tzc_from_occupancy(
    traj_a: &Trajectory,
    occ_a: Occupancy,
    ia: crate::geometry::Interval,
    traj_b: &Trajectory,
    occ_b: Occupancy,
    ib: crate::geometry::Interval,
) -> f64 {
    use Occupancy::*;
    let first_is_a = match (occ_a, occ_b) {
        (Vacated, _) | (_, Vacated) | (NotReached, NotReached) => return f64::INFINITY,
        (Window { .. }, NotReached) => true,
        (NotReached, Window { .. }) => false,
        (Window { t_in: a_in, .. }, Window { t_in: b_in, .. }) => {
            let (_, a_out) = occ_a.window().expect("window");
            let (_, b_out) = occ_b.window().expect("window");
            let start = a_in.max(b_in);
            let end = a_out.min(b_out);
            if start <= end {
                let horizon = traj_a.profile().end_time().min(traj_b.profile().end_time());
                let overlap = end.min(horizon.max(start)) - start;
                return -overlap;
            }
            a_in < b_in
        }
    };

    let (first, occ_first, second, i_second) = if first_is_a {
        (traj_a, occ_a, traj_b, ib)
    } else {
        (traj_b, occ_b, traj_a, ia)
    };
    let t_first_out = match occ_first {
        Window { t_out: Some(t), .. } => t,
        // first never clears within the horizon: extrapolate from its end
        _ => first.profile().end_time(),
    };
    let entry = effective_interval(i_second, second.path().vehicle_length()).s_in;
    let st = second.profile().state_at(t_first_out);
    if st.v <= 0.0 {
        return f64::INFINITY;
    }
    (entry - st.s) / st.v
}

/// Cost of the zone clearance time, `+inf` costing nothing.
pub fn tzc_cost(params: &VehicleCostParams, tzc: f64) -> CostBreakdown {
    if tzc == f64::INFINITY {
        CostBreakdown::default()
    } else {
        params.tzc.eval_finite(tzc)
    }
}

/// Pairwise term for vehicle `i` due to vehicle `j`: the zone clearance cost
/// plus, when `i` has right of way over `j`, its upscaled comfort and
/// discomfort costs booked as `row`.
pub fn pairwise_cost(
    traj_i: &Trajectory,
    traj_j: &Trajectory,
    zone: &CollisionZone,
    i_has_priority: bool,
    params_i: &VehicleCostParams,
) -> CostBreakdown {
    let singleton = singleton_cost(traj_i, params_i);
    pairwise_from_parts(tzc(traj_i, traj_j, zone), &singleton, i_has_priority, params_i)
}

pub(crate) fn pairwise_from_parts(
    tzc: f64,
    singleton_i: &CostBreakdown,
    i_has_priority: bool,
    params_i: &VehicleCostParams,
) -> CostBreakdown {
    let mut c = tzc_cost(params_i, tzc);
    if i_has_priority {
        c.row = row_cost(singleton_i, params_i.row_factor);
    }
    c
}

pub fn row_cost(singleton: &CostBreakdown, row_factor: f64) -> f64 {
    row_factor * (singleton.comfort + singleton.discomfort)
}

/// Everything the ensemble cost needs besides the trajectories.
#[derive(Debug, Clone, Copy)]
pub struct CostContext<'a> {
    pub params: &'a [VehicleCostParams],
    pub zones: &'a ZoneTable,
    /// Ordered `(i, j)` pairs where `i` has right of way over `j`.
    pub right_of_way: &'a [(usize, usize)],
}

impl CostContext<'_> {
    pub fn has_priority(&self, i: usize, j: usize) -> bool {
        self.right_of_way.contains(&(i, j))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleCost {
    pub total: f64,
    pub per_vehicle: Vec<CostBreakdown>,
}

pub fn ensemble_cost(ensemble: &[Trajectory], ctx: &CostContext<'_>) -> Result<EnsembleCost> {
    let n = ensemble.len();
    if n != ctx.params.len() || n != ctx.zones.len() {
        return Err(Error::invalid(format!(
            "ensemble has {n} trajectories but the context describes {} vehicles",
            ctx.params.len()
        )));
    }
    if let Some(first) = ensemble.first() {
        let mismatched = ensemble.iter().any(|t| {
            t.dt() != first.dt() || t.t0() != first.t0() || t.profile().len() != first.profile().len()
        });
        if mismatched {
            return Err(Error::invalid("trajectories in an ensemble must share t0, dt and length"));
        }
    }

    let singletons: Vec<CostBreakdown> = ensemble
        .iter()
        .zip(ctx.params)
        .map(|(t, p)| singleton_cost(t, p))
        .collect();
    let mut per_vehicle = Vec::with_capacity(n);
    let total = accumulate_costs(
        &singletons,
        |i, j| tzc(&ensemble[i], &ensemble[j], &ctx.zones.get(i, j)),
        |i, j| ctx.has_priority(i, j),
        ctx.params,
        &mut per_vehicle,
    );
    Ok(EnsembleCost { total, per_vehicle })
}

/// Adds the pairwise terms to the singleton costs in a fixed order, so every
/// caller gets bit-identical totals.
pub(crate) fn accumulate_costs(
    singletons: &[CostBreakdown],
    tzc_of: impl Fn(usize, usize) -> f64,
    has_priority: impl Fn(usize, usize) -> bool,
    params: &[VehicleCostParams],
    per_vehicle: &mut Vec<CostBreakdown>,
) -> f64 {
    let n = singletons.len();
    per_vehicle.clear();
    per_vehicle.extend_from_slice(singletons);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            per_vehicle[i] += pairwise_from_parts(tzc_of(i, j), &singletons[i], has_priority(i, j), &params[i]);
        }
    }
    per_vehicle.iter().map(CostBreakdown::total).sum()
}
