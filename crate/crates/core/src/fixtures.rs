//! Small named spaces used by the tests, the acceptance suite and the
//! scenario harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::{subgroup_closure, GSpace, IsometryGroup};
use crate::scalar::Scalar;
use crate::scenario::{ConvergenceScenario, SymmetryMode};
use crate::space::FiniteMetricSpace;
use crate::triples::ApproxTriple;

fn ratio<S: Scalar>(p: usize, q: usize) -> S {
    S::from_usize(p).expect("small integer") / S::from_usize(q).expect("small integer")
}

/// `n` equally spaced points on a circle of circumference 1, path metric.
pub fn cycle_space<S: Scalar>(n: usize) -> FiniteMetricSpace<S> {
    let dist = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = (i + n - j) % n;
                    ratio(k.min(n - k), n)
                })
                .collect()
        })
        .collect();
    FiniteMetricSpace::from_table(dist).expect("cycle metric is valid")
}

/// Rotations `i ↦ i + j mod n`, element `j` being the rotation by `j`.
pub fn cycle_rotations(n: usize) -> IsometryGroup {
    let perms = (0..n).map(|j| (0..n).map(|i| (i + j) % n).collect()).collect();
    IsometryGroup::from_perms(n, perms).expect("cyclic group")
}

pub fn cycle_gspace<S: Scalar>(n: usize) -> GSpace<S> {
    GSpace::new(cycle_space(n), cycle_rotations(n)).expect("rotations are isometries")
}

/// Triple from the `n`-cycle to the finer `m`-cycle (`n` divides `m`) with
/// rotations on both sides: `f` is the inclusion, `θ` the induced
/// rotation shifted by a seeded jitter of at most one fine step, `ψ` the
/// nearest coarse rotation.
pub fn cycle_refinement<S: Scalar>(
    n: usize,
    m: usize,
    seed: u64,
) -> (GSpace<S>, GSpace<S>, ApproxTriple<S>) {
    assert!(n > 0 && m.is_multiple_of(n), "{n} must divide {m}");
    let step = m / n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = cycle_gspace(n);
    let dst = cycle_gspace(m);
    let f = (0..n).map(|i| i * step).collect();
    let theta = (0..n)
        .map(|j| {
            let jitter: i64 = rng.gen_range(-1..=1);
            (j as i64 * step as i64 + jitter).rem_euclid(m as i64) as usize
        })
        .collect();
    let psi = (0..m).map(|s| ((2 * s * n + m) / (2 * m)) % n).collect();
    let t = ApproxTriple::new(&src, &dst, f, theta, psi).expect("shapes match");
    (src, dst, t)
}

/// Four points at the corners of an `a × b` rectangle, Euclidean metric.
/// Points are ordered around the rectangle: `0=(0,0)`, `1=(a,0)`,
/// `2=(a,b)`, `3=(0,b)`.
pub fn rectangle(a: f64, b: f64) -> FiniteMetricSpace<f64> {
    let pts = [(0.0, 0.0), (a, 0.0), (a, b), (0.0, b)];
    let dist = pts
        .iter()
        .map(|p| {
            pts.iter()
                .map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt())
                .collect()
        })
        .collect();
    FiniteMetricSpace::from_table(dist).expect("euclidean distances")
}

/// The `n`-cycle with its full (dihedral) isometry group, for `n ≥ 3`.
pub fn dihedral_cycle<S: Scalar>(n: usize) -> GSpace<S> {
    GSpace::full(cycle_space(n))
}

/// The subgroup of `space`'s group generated by the listed elements.
pub fn with_subgroup<S: Scalar>(space: &GSpace<S>, generators: &[usize]) -> GSpace<S> {
    let sub = subgroup_closure(space.group(), generators).expect("valid generators");
    GSpace::new(space.space().clone(), sub).expect("subgroup of isometries")
}

/// The `1 × 0.2` rectangle with its Klein group and `H = {id, long-side
/// swap}`, whose cosets sit `0.2` apart. Along this seeded schedule the
/// distance to the limit starts above that gap and ends below it.
pub fn rectangle_flip_scenario() -> ConvergenceScenario<f64> {
    ConvergenceScenario {
        limit: GSpace::full(rectangle(1.0, 0.2)),
        subgroup: vec![1],
        schedule: vec![0.8, 0.4, 0.2, 0.1, 0.05],
        seed: 8,
        symmetry: SymmetryMode::Transport,
        budget: 1_000_000,
    }
}
