//! Sampling-based ensemble planner.
//!
//! Every vehicle gets a set of velocity profiles from random (or exhaustively
//! enumerated) jerk sequences. The Cartesian product of these sets, minus
//! ensembles with a trajectory that does not clear its collision zones and
//! minus colliding ensembles, is ranked by total cost. Walking the ranking, the
//! first feasible ensemble with a valid plan B for the ego vehicle is selected;
//! if there is none the ego brakes at full deceleration.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{accumulate_costs, singleton_cost, tzc_from_occupancy, CostBreakdown};
use crate::error::{Error, Result};
use crate::geometry::ZoneTable;
use crate::kinematics::{integrate_jerk_sequence, lift_to_trajectory, Limits, LongState, Occupancy, Trajectory, VelocityProfile};
use crate::safety::{plan_b_verdicts, windows_overlap, PlanBVerdict};
use crate::scenario::Scenario;

/// Upper bound on profiles per vehicle in exhaustive mode.
pub const MAX_EXHAUSTIVE_PROFILES: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: u64,
    pub profiles_per_vehicle: usize,
    /// Jerk values (m/s^3) drawn uniformly, one per time step.
    pub jerk_levels: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    /// Enumerate every jerk sequence instead of sampling.
    pub exhaustive: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            profiles_per_vehicle: 2000,
            jerk_levels: vec![-4.0, -2.0, 0.0, 2.0, 4.0],
            dt: 0.25,
            horizon: 8.0,
            exhaustive: false,
        }
    }
}

impl SamplingConfig {
    pub fn steps(&self) -> Result<usize> {
        let n = self.horizon / self.dt;
        if !(self.dt > 0.0 && self.horizon > 0.0) || (n - n.round()).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "horizon {} must be a positive integer multiple of dt {}",
                self.horizon, self.dt
            )));
        }
        Ok(n.round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.steps()?;
        if self.jerk_levels.is_empty() || self.jerk_levels.iter().any(|j| !j.is_finite()) {
            return Err(Error::Validation("jerk_levels must be a non-empty set of finite values".into()));
        }
        if !self.exhaustive && self.profiles_per_vehicle == 0 {
            return Err(Error::Validation("profiles_per_vehicle must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of profiles each vehicle gets under this config.
    pub fn profile_count(&self) -> Result<usize> {
        if !self.exhaustive {
            return Ok(self.profiles_per_vehicle);
        }
        let count = (self.jerk_levels.len() as u128).checked_pow(self.steps()? as u32);
        match count {
            Some(c) if c <= MAX_EXHAUSTIVE_PROFILES => Ok(c as usize),
            _ => Err(Error::Intractable {
                count: count.unwrap_or(u128::MAX),
                limit: MAX_EXHAUSTIVE_PROFILES,
            }),
        }
    }
}

/// Stable per-vehicle stream id so a vehicle draws the same profiles no matter
/// which other vehicles share the scenario.
pub fn stream_for(id: &str) -> u64 {
    // FNV-1a
    id.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Draws `profiles_per_vehicle` random jerk sequences (or all of them in
/// exhaustive mode) and integrates each from `initial`.
pub fn sample_profiles(
    initial: LongState,
    config: &SamplingConfig,
    limits: &Limits,
    stream: u64,
) -> Result<Vec<VelocityProfile>> {
    config.validate()?;
    let steps = config.steps()?;
    let levels = &config.jerk_levels;
    let count = config.profile_count()?;
    let mut jerks = vec![0.0; steps];

    if config.exhaustive {
        let base = levels.len();
        return Ok((0..count)
            .map(|mut index| {
                for k in (0..steps).rev() {
                    jerks[k] = levels[index % base];
                    index /= base;
                }
                integrate_jerk_sequence(initial, &jerks, config.dt, limits)
            })
            .collect());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    Ok((0..count)
        .map(|_| {
            for j in jerks.iter_mut() {
                *j = levels[rng.random_range(0..levels.len())];
            }
            integrate_jerk_sequence(initial, &jerks, config.dt, limits)
        })
        .collect())
}

/// A sampled trajectory with everything the ensemble search needs.
#[derive(Debug, Clone)]
pub struct Candidate {
    /// Index of the profile in the vehicle's sampled set.
    pub sample_index: usize,
    pub trajectory: Trajectory,
    pub singleton: CostBreakdown,
    /// Occupancy of the zone shared with each other vehicle, `None` where the
    /// zone is empty (and for the vehicle itself).
    pub occupancy: Vec<Option<Occupancy>>,
}

impl Candidate {
    pub fn new(
        sample_index: usize,
        trajectory: Trajectory,
        scenario: &Scenario,
        vehicle: usize,
        zones: &ZoneTable,
    ) -> Self {
        let singleton = singleton_cost(&trajectory, &scenario.vehicles[vehicle].costs);
        let occupancy = (0..zones.len())
            .map(|j| {
                zones
                    .get(vehicle, j)
                    .interval_a()
                    .filter(|_| j != vehicle)
                    .map(|iv| Occupancy::of(&trajectory, iv))
            })
            .collect();
        Self {
            sample_index,
            trajectory,
            singleton,
            occupancy,
        }
    }

    /// Clears every non-empty zone within the horizon.
    pub fn clears_all_zones(&self) -> bool {
        self.occupancy.iter().flatten().all(|o| match o {
            Occupancy::Vacated => true,
            Occupancy::Window { t_out, .. } => t_out.is_some(),
            Occupancy::NotReached => false,
        })
    }
}

/// Lifts every sampled profile of every vehicle. Profiles running past the end
/// of their path are dropped.
pub fn build_candidates(scenario: &Scenario, config: &SamplingConfig, zones: &ZoneTable) -> Result<Vec<Vec<Candidate>>> {
    scenario
        .vehicles
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let profiles = sample_profiles(v.initial, config, &v.limits, stream_for(&v.id))?;
            Ok(profiles
                .into_iter()
                .enumerate()
                .filter_map(|(k, p)| {
                    lift_to_trajectory(p, Arc::clone(&v.path))
                        .ok()
                        .map(|t| Candidate::new(k, t, scenario, i, zones))
                })
                .collect())
        })
        .collect()
}

fn collides_any(sets: &[Vec<Candidate>], combo: &[usize]) -> bool {
    let n = combo.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&sets[i][combo[i]], &sets[j][combo[j]]);
            if let (Some(oa), Some(ob)) = (a.occupancy[j], b.occupancy[i]) {
                if windows_overlap(oa, ob) {
                    return true;
                }
            }
        }
    }
    false
}

/// Odometer over a product of index lists.
struct Product<'a> {
    lists: &'a [Vec<usize>],
    counters: Vec<usize>,
    done: bool,
}

impl<'a> Product<'a> {
    fn new(lists: &'a [Vec<usize>]) -> Self {
        Self {
            lists,
            counters: vec![0; lists.len()],
            done: lists.is_empty() || lists.iter().any(Vec::is_empty),
        }
    }
}

impl Iterator for Product<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self.counters.iter().zip(self.lists).map(|(&c, l)| l[c]).collect();
        self.done = !step_odometer(&mut self.counters, self.lists);
        Some(item)
    }
}

fn zone_clearing(sets: &[Vec<Candidate>]) -> Vec<Vec<usize>> {
    sets.iter()
        .map(|set| (0..set.len()).filter(|&k| set[k].clears_all_zones()).collect())
        .collect()
}

/// Candidate ensembles as positions into `sets`, in lexicographic order.
/// Ensembles with a trajectory that does not clear its zones, and colliding
/// ensembles, are skipped.
pub fn enumerate_ensembles(sets: &[Vec<Candidate>]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let kept = zone_clearing(sets);
    let mut counters = vec![0usize; kept.len()];
    let mut done = kept.is_empty() || kept.iter().any(Vec::is_empty);
    std::iter::from_fn(move || loop {
        if done {
            return None;
        }
        let combo: Vec<usize> = counters.iter().zip(&kept).map(|(&c, l)| l[c]).collect();
        done = !step_odometer(&mut counters, &kept);
        if !collides_any(sets, &combo) {
            return Some(combo);
        }
    })
}

/// Advances the odometer, last digit fastest. Returns false once it wraps.
fn step_odometer(counters: &mut [usize], lists: &[Vec<usize>]) -> bool {
    for k in (0..counters.len()).rev() {
        counters[k] += 1;
        if counters[k] < lists[k].len() {
            return true;
        }
        counters[k] = 0;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Selected,
    EmergencyBrake,
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub outcome: Outcome,
    /// Selected trajectories, one per vehicle in scenario order; empty on
    /// emergency braking.
    pub ensemble: Vec<Trajectory>,
    /// Sample index of each selected profile.
    pub profile_indices: Vec<usize>,
    pub total_cost: Option<f64>,
    pub per_vehicle: Vec<CostBreakdown>,
    /// Plan-B verdicts of the ego against each vehicle it shares a zone with.
    pub plan_b: Vec<(usize, PlanBVerdict)>,
    /// Full-deceleration ego profile when emergency braking.
    pub emergency_profile: Option<VelocityProfile>,
    pub candidates_evaluated: usize,
    pub plan_b_checks: usize,
    pub zones: ZoneTable,
}

/// Ego profile braking at `a_min` from its initial state until standstill.
pub fn emergency_brake_profile(initial: LongState, limits: &Limits, config: &SamplingConfig) -> Result<VelocityProfile> {
    let steps = config.steps()?;
    let start = LongState { a: limits.a_min, ..initial };
    Ok(integrate_jerk_sequence(start, &vec![0.0; steps], config.dt, limits))
}

/// Cost of one ensemble given precomputed candidate data. Writes the
/// per-vehicle breakdown into `out` and returns the total.
fn candidate_cost(
    scenario: &Scenario,
    sets: &[Vec<Candidate>],
    zones: &ZoneTable,
    priority: &[(usize, usize)],
    combo: &[usize],
    out: &mut Vec<CostBreakdown>,
) -> f64 {
    let pick = |i: usize| &sets[i][combo[i]];
    let singletons: Vec<CostBreakdown> = (0..combo.len()).map(|i| pick(i).singleton).collect();
    let params: Vec<_> = scenario.vehicles.iter().map(|v| v.costs).collect();
    accumulate_costs(
        &singletons,
        |i, j| match (pick(i).occupancy[j], pick(j).occupancy[i], zones.get(i, j).intervals) {
            (Some(oi), Some(oj), Some((ii, ij))) => {
                tzc_from_occupancy(&pick(i).trajectory, oi, ii, &pick(j).trajectory, oj, ij)
            }
            _ => f64::INFINITY,
        },
        |i, j| priority.contains(&(i, j)),
        &params,
        out,
    )
}

fn infeasibility_threshold(scenario: &Scenario) -> f64 {
    scenario
        .vehicles
        .iter()
        .map(|v| v.costs.t_inf())
        .fold(f64::INFINITY, f64::min)
}

/// Ranks all candidate ensembles and selects the cheapest feasible one with a
/// valid plan B.
pub fn plan(scenario: &Scenario, config: &SamplingConfig) -> Result<PlanResult> {
    scenario.validate()?;
    config.validate()?;
    let ego = scenario.ego_index()?;
    let priority = scenario.right_of_way_indices()?;
    let paths: Vec<&crate::geometry::Path> = scenario.vehicles.iter().map(|v| v.path.as_ref()).collect();
    let zones = ZoneTable::compute(&paths);
    let sets = build_candidates(scenario, config, &zones)?;
    plan_with_candidates(scenario, config, ego, &priority, zones, &sets)
}

fn plan_with_candidates(
    scenario: &Scenario,
    config: &SamplingConfig,
    ego: usize,
    priority: &[(usize, usize)],
    zones: ZoneTable,
    sets: &[Vec<Candidate>],
) -> Result<PlanResult> {
    let n = sets.len();
    let kept = zone_clearing(sets);
    let t_inf = infeasibility_threshold(scenario);

    // flat key: positions in mixed radix, vehicle 0 most significant, which
    // orders ties lexicographically by profile index
    let radices: Vec<u64> = sets.iter().map(|s| s.len().max(1) as u64).collect();
    radices
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(r))
        .ok_or(Error::Intractable {
            count: radices.iter().map(|&r| r as u128).product(),
            limit: u64::MAX as u128,
        })?;
    let encode = |combo: &[usize]| combo.iter().zip(&radices).fold(0u64, |acc, (&c, &r)| acc * r + c as u64);
    let decode = |mut key: u64| {
        let mut combo = vec![0usize; n];
        for k in (0..n).rev() {
            combo[k] = (key % radices[k]) as usize;
            key /= radices[k];
        }
        combo
    };

    let first: &[usize] = kept.first().map(Vec::as_slice).unwrap_or(&[]);
    let evaluated: Vec<(usize, Vec<(f64, u64)>)> = first
        .par_iter()
        .map(|&p0| {
            let mut buf = Vec::with_capacity(n);
            let mut lists = kept.clone();
            lists[0] = vec![p0];
            let mut count = 0;
            let mut ranked = Vec::new();
            for combo in Product::new(&lists) {
                if collides_any(sets, &combo) {
                    continue;
                }
                count += 1;
                let total = candidate_cost(scenario, sets, &zones, priority, &combo, &mut buf);
                if total < t_inf {
                    ranked.push((total, encode(&combo)));
                }
            }
            (count, ranked)
        })
        .collect();

    let candidates_evaluated = evaluated.iter().map(|(c, _)| c).sum();
    let mut ranked: Vec<(f64, u64)> = evaluated.into_iter().flat_map(|(_, r)| r).collect();
    ranked.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let limits: Vec<Limits> = scenario.vehicles.iter().map(|v| v.limits).collect();
    let mut plan_b_checks = 0;
    for &(total, key) in &ranked {
        let combo = decode(key);
        let ensemble: Vec<&Trajectory> = combo.iter().enumerate().map(|(i, &c)| &sets[i][c].trajectory).collect();
        plan_b_checks += 1;
        let verdicts = plan_b_verdicts(&ensemble, ego, &zones, &limits, &scenario.plan_b);
        if verdicts.iter().all(|(_, v)| v.valid) {
            let mut per_vehicle = Vec::with_capacity(n);
            candidate_cost(scenario, sets, &zones, priority, &combo, &mut per_vehicle);
            return Ok(PlanResult {
                outcome: Outcome::Selected,
                ensemble: ensemble.into_iter().cloned().collect(),
                profile_indices: combo.iter().enumerate().map(|(i, &c)| sets[i][c].sample_index).collect(),
                total_cost: Some(total),
                per_vehicle,
                plan_b: verdicts,
                emergency_profile: None,
                candidates_evaluated,
                plan_b_checks,
                zones,
            });
        }
    }

    let ego_vehicle = &scenario.vehicles[ego];
    Ok(PlanResult {
        outcome: Outcome::EmergencyBrake,
        ensemble: Vec::new(),
        profile_indices: Vec::new(),
        total_cost: None,
        per_vehicle: Vec::new(),
        plan_b: Vec::new(),
        emergency_profile: Some(emergency_brake_profile(ego_vehicle.initial, &ego_vehicle.limits, config)?),
        candidates_evaluated,
        plan_b_checks,
        zones,
    })
}
