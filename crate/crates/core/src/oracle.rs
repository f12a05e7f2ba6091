//! Brute-force reference implementations for tests.
//!
//! [`exhaustive_best`] enumerates every jerk sequence of every vehicle and
//! every ensemble with plain nested loops, calling the public per-ensemble
//! contracts (`reaches_zone_end`, `collides`, `ensemble_cost`,
//! `has_valid_plan_b`) directly. It shares no search or filtering code with
//! the planner, so it catches bugs there; formula bugs are left to the
//! closed-form tests.

use std::sync::Arc;

use crate::cost::{ensemble_cost, CostContext, EnsembleCost};
use crate::error::{Error, Result};
use crate::geometry::{CollisionZone, Path, ZoneTable};
use crate::kinematics::{
    effective_interval, integrate_jerk_sequence, lift_to_trajectory, reaches_zone_end, Trajectory,
};
use crate::planner::SamplingConfig;
use crate::safety::has_valid_plan_b;
use crate::scenario::Scenario;

/// Upper bound on jerk sequences per vehicle.
pub const MAX_SEQUENCES: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub jerk_levels: Vec<f64>,
    /// Number of jerk steps, at most 8.
    pub steps: usize,
    pub dt: f64,
    /// Refinement of the time grid for dense occupancy checks.
    pub time_oversampling: usize,
}

impl OracleConfig {
    /// The planner configuration that searches the same space exhaustively.
    pub fn sampling_config(&self) -> SamplingConfig {
        SamplingConfig {
            seed: 0,
            profiles_per_vehicle: 1,
            jerk_levels: self.jerk_levels.clone(),
            dt: self.dt,
            horizon: self.dt * self.steps as f64,
            exhaustive: true,
        }
    }

    fn sequences_per_vehicle(&self) -> Result<u128> {
        if self.steps == 0 || self.steps > 8 || self.jerk_levels.is_empty() || !(self.dt > 0.0) {
            return Err(Error::invalid(format!(
                "oracle needs 1..=8 steps, a non-empty level set and dt > 0; got {} steps, {} levels, dt {}",
                self.steps,
                self.jerk_levels.len(),
                self.dt
            )));
        }
        let count = (self.jerk_levels.len() as u128).pow(self.steps as u32);
        if count > MAX_SEQUENCES {
            return Err(Error::Intractable {
                count,
                limit: MAX_SEQUENCES,
            });
        }
        Ok(count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Jerk sequences integrated per vehicle (including overrunning ones).
    pub sequences_per_vehicle: usize,
    /// Size of the full Cartesian product of lifted trajectories.
    pub ensembles_enumerated: usize,
    /// Cheapest qualifying ensemble as sequence indices, with its cost.
    pub best: Option<(Vec<usize>, EnsembleCost)>,
}

fn all_sequences(levels: &[f64], steps: usize) -> Vec<Vec<f64>> {
    fn extend(levels: &[f64], steps: usize, prefix: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() == steps {
            out.push(prefix.clone());
            return;
        }
        for &j in levels {
            prefix.push(j);
            extend(levels, steps, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(levels, steps, &mut Vec::new(), &mut out);
    out
}

/// Global minimum over every ensemble that clears its zones, is collision
/// free, stays below the infeasibility threshold and has a valid plan B.
/// Ties go to the lexicographically smallest tuple of sequence indices.
pub fn exhaustive_best(scenario: &Scenario, config: &OracleConfig) -> Result<OracleResult> {
    let per_vehicle = config.sequences_per_vehicle()?;
    scenario.validate()?;
    let n = scenario.vehicles.len();
    let ego = scenario.ego_index()?;
    let right_of_way = scenario.right_of_way_indices()?;
    let paths: Vec<&Path> = scenario.vehicles.iter().map(|v| v.path.as_ref()).collect();
    let zones = ZoneTable::compute(&paths);
    let params: Vec<_> = scenario.vehicles.iter().map(|v| v.costs).collect();
    let limits: Vec<_> = scenario.vehicles.iter().map(|v| v.limits).collect();
    let t_inf = params.iter().map(|p| p.t_inf()).fold(f64::INFINITY, f64::min);
    let ctx = CostContext {
        params: &params,
        zones: &zones,
        right_of_way: &right_of_way,
    };

    let sequences = all_sequences(&config.jerk_levels, config.steps);
    let mut trajectories: Vec<Vec<(usize, Trajectory)>> = Vec::with_capacity(n);
    for v in &scenario.vehicles {
        let mut lifted = Vec::new();
        for (k, jerks) in sequences.iter().enumerate() {
            let profile = integrate_jerk_sequence(v.initial, jerks, config.dt, &v.limits);
            if let Ok(t) = lift_to_trajectory(profile, Arc::clone(&v.path)) {
                lifted.push((k, t));
            }
        }
        trajectories.push(lifted);
    }

    let mut result = OracleResult {
        sequences_per_vehicle: per_vehicle as usize,
        ensembles_enumerated: 0,
        best: None,
    };
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    visit(&trajectories, &mut chosen, &mut |picks| {
        result.ensembles_enumerated += 1;
        let ensemble: Vec<Trajectory> = picks
            .iter()
            .enumerate()
            .map(|(i, &p)| trajectories[i][p].1.clone())
            .collect();

        for (i, traj) in ensemble.iter().enumerate() {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if let Some(iv) = zones.get(i, j).interval_a() {
                    if !reaches_zone_end(traj, iv) {
                        return;
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if crate::safety::collides(&ensemble[i], &ensemble[j], &zones.get(i, j)) {
                    return;
                }
            }
        }
        let cost = ensemble_cost(&ensemble, &ctx).expect("consistent ensemble");
        if !(cost.total < t_inf) {
            return;
        }
        let indices: Vec<usize> = picks
            .iter()
            .enumerate()
            .map(|(i, &p)| trajectories[i][p].0)
            .collect();
        let better = match &result.best {
            None => true,
            Some((best_idx, best)) => {
                cost.total < best.total || (cost.total == best.total && indices < *best_idx)
            }
        };
        if better && has_valid_plan_b(&ensemble, ego, &zones, &limits, &scenario.plan_b) {
            result.best = Some((indices, cost));
        }
    });
    Ok(result)
}

fn visit(sets: &[Vec<(usize, Trajectory)>], chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == sets.len() {
        f(chosen);
        return;
    }
    for k in 0..sets[chosen.len()].len() {
        chosen.push(k);
        visit(sets, chosen, f);
        chosen.pop();
    }
}

/// Occupancy overlap sampled on a time grid of step `dt / oversampling`. A
/// vehicle occupies its zone interval while its reference point lies in
/// `[s_in - L/2, s_out + L/2)`, positions interpolated linearly in time.
pub fn dense_occupancy_check(
    traj_a: &Trajectory,
    traj_b: &Trajectory,
    zone: &CollisionZone,
    oversampling: usize,
) -> bool {
    let Some((ia, ib)) = zone.intervals else {
        return false;
    };
    let ea = effective_interval(ia, traj_a.path().vehicle_length());
    let eb = effective_interval(ib, traj_b.path().vehicle_length());
    let pa = traj_a.profile();
    let pb = traj_b.profile();
    let m = oversampling.max(1);
    let steps = (pa.len() - 1).min(pb.len() - 1) * m;
    let h = pa.dt / m as f64;
    (0..=steps).any(|k| {
        let t = pa.t0 + k as f64 * h;
        let sa = pa.state_at(t).s;
        let sb = pb.state_at(t).s;
        sa >= ea.s_in && sa < ea.s_out && sb >= eb.s_in && sb < eb.s_out
    })
}
