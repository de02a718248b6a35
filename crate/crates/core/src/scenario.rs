//! Sequences of perturbed copies of a limit pair, measured against it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{isometry_group, GSpace, IsometryGroup};
use crate::quotients::{induced_coset_map, orbit_space, perturb_invariant, perturb_space, CosetMapReport};
use crate::scalar::Scalar;
use crate::solver::{egh_distance, SearchConfig};
use crate::space::map_defects;
use crate::triples::{theta_as_approximation, CertificateReport};

/// How the group of each perturbed space is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryMode {
    /// Perturb with one factor per pair orbit and keep the limit group.
    Transport,
    /// Perturb every pair independently and recompute the isometry group.
    Recompute,
}

#[derive(Clone, Debug)]
pub struct ConvergenceScenario<S> {
    pub limit: GSpace<S>,
    /// Generators of the designated subgroup `H` of the limit group.
    pub subgroup: Vec<usize>,
    /// Perturbation sizes `δ_k`, strictly decreasing, in `[0, 1)`.
    pub schedule: Vec<f64>,
    pub seed: u64,
    pub symmetry: SymmetryMode,
    /// Node budget per search direction.
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ScenarioStep<S> {
    pub k: usize,
    pub delta: f64,
    /// Equivariant GH distance to the limit.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub epsilon: S,
    pub optimal: bool,
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub space_deviation: S,
    pub group_order: usize,
    pub collapsed: bool,
    /// θ of the forward witness as a map of groups.
    pub theta: CertificateReport<S>,
    pub coset: CosetMapReport<S>,
    /// Order of the orbit map `X_k/G_k → X/G` induced by the witness.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub orbit_map_order: S,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub threshold: f64,
    /// First `k` from which every `ε` is at most the threshold.
    pub from: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ScenarioReport<S> {
    pub steps: Vec<ScenarioStep<S>>,
    /// `max ε_k / δ_k` over positive `δ_k`.
    pub max_ratio: Option<f64>,
    /// `ε_k` never increases along the schedule.
    pub monotone: bool,
    pub thresholds: Vec<Threshold>,
    pub events: Vec<String>,
    /// Every θ ceiling and the covering form of the gap argument held.
    pub certified: bool,
    /// `ε_k < gap` was followed by a surjective coset map at every step
    /// whose group did not collapse.
    pub gap_implication: bool,
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Incompatible("empty schedule".into()));
    }
    if let Some(d) = schedule.iter().find(|d| !(0.0..1.0).contains(*d)) {
        return Err(Error::Incompatible(format!("schedule entry {d} outside [0, 1)")));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Incompatible("schedule must be strictly decreasing".into()));
    }
    Ok(())
}

/// Runs every step (in parallel) and summarises the sequence.
pub fn run_scenario<S: Scalar>(s: &ConvergenceScenario<S>) -> Result<ScenarioReport<S>> {
    check_schedule(&s.schedule)?;
    let subgroup = s.limit.group().closure_indices(&s.subgroup)?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let seeds: Vec<u64> = s.schedule.iter().map(|_| rng.next_u64()).collect();
    let steps = s
        .schedule
        .par_iter()
        .zip(seeds)
        .enumerate()
        .map(|(k, (&delta, seed))| run_step(s, &subgroup, k, delta, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarise(&s.schedule, steps, s.limit.order()))
}

fn run_step<S: Scalar>(
    s: &ConvergenceScenario<S>,
    subgroup: &[usize],
    k: usize,
    delta: f64,
    seed: u64,
) -> Result<ScenarioStep<S>> {
    let limit = &s.limit;
    let (perturbed, group) = match s.symmetry {
        SymmetryMode::Transport => {
            let p = perturb_invariant(limit, delta, seed)?;
            (p, limit.group().clone())
        }
        SymmetryMode::Recompute => {
            let p = perturb_space(limit.space(), delta, seed)?;
            let g = isometry_group(&p.space);
            (p, g)
        }
    };
    let sub_k = surviving_subgroup(limit.group(), subgroup, &group)?;
    let xk = GSpace::new(perturbed.space, group)?;
    let cert = egh_distance(&xk, limit, &SearchConfig::exact(s.budget))?;
    let witness = &cert.witness_forward;
    let theta = theta_as_approximation(&xk, limit, witness)?;
    let coset = induced_coset_map(&xk, &sub_k, limit, subgroup, &witness.theta, &cert.value)?;

    let src_orbits = orbit_space(&xk)?;
    let dst_orbits = orbit_space(limit)?;
    let orbit_map: Vec<usize> = src_orbits
        .classes
        .iter()
        .map(|c| dst_orbits.class_of[witness.f[c[0]]])
        .collect();
    let orbit_map_order = map_defects(&src_orbits.space, &dst_orbits.space, &orbit_map)?.order();

    Ok(ScenarioStep {
        k,
        delta,
        epsilon: cert.value,
        optimal: cert.optimal,
        space_deviation: perturbed.deviation,
        group_order: xk.order(),
        collapsed: xk.order() < limit.order(),
        theta,
        coset,
        orbit_map_order,
    })
}

/// Indices in `group` of the members of `subgroup` (indices in `limit`)
/// that `group` still contains.
fn surviving_subgroup(limit: &IsometryGroup, subgroup: &[usize], group: &IsometryGroup) -> Result<Vec<usize>> {
    let kept: Vec<usize> = subgroup
        .iter()
        .filter_map(|&h| group.index_of(limit.perm(h)))
        .collect();
    group.closure_indices(&kept)
}

fn summarise<S: Scalar>(schedule: &[f64], steps: Vec<ScenarioStep<S>>, limit_order: usize) -> ScenarioReport<S> {
    let eps: Vec<f64> = steps.iter().map(|s| s.epsilon.to_f64_lossy()).collect();
    let max_ratio = steps
        .iter()
        .filter(|s| s.delta > 0.0)
        .map(|s| s.epsilon.to_f64_lossy() / s.delta)
        .reduce(f64::max);
    let monotone = steps.windows(2).all(|w| w[1].epsilon.le_tol(&w[0].epsilon));
    let thresholds = schedule
        .iter()
        .filter(|&&d| d > 0.0)
        .map(|&threshold| {
            let from = (0..eps.len()).find(|&k| eps[k..].iter().all(|&e| e <= threshold));
            Threshold { threshold, from }
        })
        .collect();
    let mut events = Vec::new();
    for s in &steps {
        if s.collapsed {
            events.push(format!(
                "step {}: symmetry collapsed from order {limit_order} to {}",
                s.k, s.group_order
            ));
        }
        if s.collapsed && !s.coset.implication_holds() {
            events.push(format!(
                "step {}: epsilon is below the coset gap but the collapsed group misses coset {}",
                s.k,
                s.coset.missed.unwrap_or_default()
            ));
        }
        if !s.optimal {
            events.push(format!("step {}: search budget exhausted, epsilon is an upper bound", s.k));
        }
    }
    let certified = steps.iter().all(|s| s.theta.all_pass() && s.coset.covering_check.pass);
    let gap_implication = steps.iter().all(|s| s.collapsed || s.coset.implication_holds());
    ScenarioReport {
        steps,
        max_ratio,
        monotone,
        thresholds,
        events,
        certified,
        gap_implication,
    }
}

impl<S: Scalar> ScenarioReport<S> {
    /// One row per step: `k, δ, ε`, the θ defects, the gap and the coset
    /// verdict.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,delta,epsilon,theta_covering,theta_expansion,theta_contraction,gap,guaranteed,surjective,group_order\n",
        );
        for s in &self.steps {
            let measured = |name: &str| {
                s.theta
                    .get(name)
                    .map(|c| c.measured.to_string())
                    .unwrap_or_default()
            };
            let gap = s.coset.gap.as_ref().map_or("inf".to_string(), |g| g.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                s.k,
                s.delta,
                s.epsilon,
                measured("theta_covering"),
                measured("theta_expansion"),
                measured("theta_contraction"),
                gap,
                s.coset.guaranteed,
                s.coset.surjective,
                s.group_order
            ));
        }
        out
    }
}
