//! Orbit and coset quotients, the induced map on cosets, and seeded
//! perturbation of spaces.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GSpace, IsometryGroup};
use crate::scalar::{argmin, max_or_zero, Scalar};
use crate::space::{check_map, covering_radius, FiniteMetricSpace};
use crate::triples::Check;

/// A partition with the induced min-over-representatives metric.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientSpace<S> {
    /// Classes in order of their lowest member, each sorted.
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    pub space: FiniteMetricSpace<S>,
}

impl<S: Scalar> QuotientSpace<S> {
    fn build(classes: Vec<Vec<usize>>, total: usize, dist: impl Fn(&[usize], &[usize]) -> S) -> Result<Self> {
        let mut class_of = vec![0; total];
        for (c, members) in classes.iter().enumerate() {
            for &m in members {
                class_of[m] = c;
            }
        }
        let table = classes
            .iter()
            .enumerate()
            .map(|(a, ca)| {
                classes
                    .iter()
                    .enumerate()
                    .map(|(b, cb)| if a == b { S::zero() } else { dist(ca, cb) })
                    .collect()
            })
            .collect();
        let labels = classes
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|m| m.to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        let space = FiniteMetricSpace::new(labels, table)?;
        Ok(Self {
            classes,
            class_of,
            space,
        })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// `X/G` with `d([x],[y]) = min_g d(x, g·y)`.
pub fn orbit_space<S: Scalar>(x: &GSpace<S>) -> Result<QuotientSpace<S>> {
    let group = x.group();
    let space = x.space();
    QuotientSpace::build(group.orbits(), x.points(), |a, b| {
        argmin((0..group.order()).map(|g| space.d(a[0], group.act(g, b[0])).clone()))
            .expect("group is non-empty")
            .1
    })
}

/// Left cosets `gH` of a subgroup given by parent indices, ordered by their
/// lowest element.
pub fn left_cosets(group: &IsometryGroup, subgroup: &[usize]) -> Result<Vec<Vec<usize>>> {
    if !group.is_subgroup(subgroup) {
        return Err(Error::NotAGroup(format!("{subgroup:?} is not a subgroup")));
    }
    let mut seen = vec![false; group.order()];
    let mut out = Vec::new();
    for g in 0..group.order() {
        if seen[g] {
            continue;
        }
        let coset: BTreeSet<usize> = subgroup.iter().map(|&h| group.mul(g, h)).collect();
        for &c in &coset {
            seen[c] = true;
        }
        out.push(coset.into_iter().collect());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosetSpace<S> {
    pub quotient: QuotientSpace<S>,
    /// Smallest distance between distinct cosets; `None` for a single coset.
    pub gap: Option<S>,
}

/// `G/H` under `d̃(A, B) = min_{a∈A, b∈B} d_G(a, b)` for the uniform metric.
pub fn coset_space<S: Scalar>(g: &GSpace<S>, subgroup: &[usize]) -> Result<CosetSpace<S>> {
    let classes = left_cosets(g.group(), subgroup)?;
    let metric = g.group_metric();
    let quotient = QuotientSpace::build(classes, g.order(), |a, b| {
        argmin(a.iter().flat_map(|&p| b.iter().map(move |&q| metric.d(p, q).clone())))
            .expect("cosets are non-empty")
            .1
    })?;
    let n = quotient.len();
    let gap = argmin((0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).map(|(a, b)| quotient.space.d(a, b).clone()))
        .map(|(_, v)| v);
    Ok(CosetSpace { quotient, gap })
}

/// Two elements of one source coset whose images lie in different target
/// cosets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitCoset {
    pub coset: usize,
    pub first: usize,
    pub second: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct CosetMapReport<S> {
    /// Target coset of each source coset's lowest element.
    pub map: Vec<usize>,
    pub well_defined: bool,
    pub split: Option<SplitCoset>,
    pub injective: bool,
    /// Every target coset contains some `θ(g)`.
    pub surjective: bool,
    /// Lowest target coset missed by the image of θ.
    pub missed: Option<usize>,
    pub source_cosets: usize,
    pub target_cosets: usize,
    /// Inter-coset gap in the target, `"inf"` for a single coset.
    #[serde(serialize_with = "serialize_gap")]
    pub gap: Option<S>,
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub epsilon: S,
    /// Covering radius of θ's image in the target group.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub theta_covering: S,
    /// `ε < gap`.
    pub guaranteed: bool,
    /// A covering radius below the gap forces surjectivity; this is that
    /// implication, checked.
    pub covering_check: Check<S>,
}

fn serialize_gap<S: Scalar, Z: serde::Serializer>(gap: &Option<S>, z: Z) -> std::result::Result<Z::Ok, Z::Error> {
    match gap {
        Some(v) => crate::scalar::serialize(v, z),
        None => z.serialize_str("inf"),
    }
}

fn below_gap<S: Scalar>(value: &S, gap: &Option<S>) -> bool {
    gap.as_ref().is_none_or(|g| value < g)
}

impl<S: Scalar> CosetMapReport<S> {
    /// The literal gap implication: `ε < gap` forces a surjective induced map.
    pub fn implication_holds(&self) -> bool {
        !self.guaranteed || self.surjective
    }
}

/// The map `gH_k ↦ θ(g)H` induced by `θ: G_k → G`.
///
/// `eps` is the order of the triple θ belongs to.
pub fn induced_coset_map<S: Scalar>(
    src: &GSpace<S>,
    src_subgroup: &[usize],
    dst: &GSpace<S>,
    dst_subgroup: &[usize],
    theta: &[usize],
    eps: &S,
) -> Result<CosetMapReport<S>> {
    check_map(src.order(), dst.order(), theta, "theta")?;
    let source = left_cosets(src.group(), src_subgroup)?;
    let target = coset_space(dst, dst_subgroup)?;
    let class_of = &target.quotient.class_of;

    let mut split = None;
    let map: Vec<usize> = source
        .iter()
        .enumerate()
        .map(|(c, members)| {
            let image = class_of[theta[members[0]]];
            if split.is_none() {
                if let Some(&other) = members.iter().find(|&&g| class_of[theta[g]] != image) {
                    split = Some(SplitCoset {
                        coset: c,
                        first: members[0],
                        second: other,
                    });
                }
            }
            image
        })
        .collect();
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    let injective = distinct.len() == map.len();
    let hit: BTreeSet<usize> = theta.iter().map(|&g| class_of[g]).collect();
    let missed = (0..target.quotient.len()).find(|c| !hit.contains(c));

    let theta_covering = covering_radius(dst.group_metric(), theta);
    let surjective = missed.is_none();
    let covering_check = {
        let forced = below_gap(&theta_covering, &target.gap);
        let mut check = Check::new(
            "coset_surjectivity_from_covering",
            theta_covering.clone(),
            target.gap.clone().unwrap_or_else(|| theta_covering.clone()),
        );
        check.pass = !forced || surjective;
        check
    };
    Ok(CosetMapReport {
        map,
        well_defined: split.is_none(),
        split,
        injective,
        surjective,
        missed,
        source_cosets: source.len(),
        target_cosets: target.quotient.len(),
        guaranteed: below_gap(eps, &target.gap),
        gap: target.gap,
        epsilon: eps.clone(),
        theta_covering,
        covering_check,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedSpace<S> {
    pub space: FiniteMetricSpace<S>,
    pub delta: f64,
    /// Largest amount the shortest-path closure lowered an entry.
    pub repair_drift: S,
    /// `delta · diam`.
    pub bound: S,
    /// `max |d'(i,j) − d(i,j)|`.
    pub deviation: S,
}

/// Seeded factors in `[1 − δ, 1 + δ]`, one per unordered pair `i < j` in
/// row-major order.
pub fn perturbation_factors(pairs: usize, delta: f64, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Precondition {
            what: "perturbation must keep every distance positive".into(),
            measured: delta.to_string(),
            allowed: "0 <= delta < 1".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..pairs)
        .map(|_| if delta == 0.0 { 1.0 } else { rng.gen_range((1.0 - delta)..=(1.0 + delta)) })
        .collect())
}

/// Multiplies every off-diagonal distance by an independent seeded factor
/// and repairs the triangle inequality by shortest-path closure.
pub fn perturb_space<S: Scalar>(x: &FiniteMetricSpace<S>, delta: f64, seed: u64) -> Result<PerturbedSpace<S>> {
    let n = x.len();
    let factors = perturbation_factors(n * n.saturating_sub(1) / 2, delta, seed)?;
    let pair_factor: Vec<usize> = (0..n * n.saturating_sub(1) / 2).collect();
    apply_factors(x, delta, &pair_factor, &factors)
}

/// Like [`perturb_space`] but with one factor per orbit of unordered pairs,
/// so every element of the group stays an isometry.
pub fn perturb_invariant<S: Scalar>(x: &GSpace<S>, delta: f64, seed: u64) -> Result<PerturbedSpace<S>> {
    let n = x.points();
    let group = x.group();
    let mut pair_class = vec![usize::MAX; n * n.saturating_sub(1) / 2];
    let mut classes = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if pair_class[pair_index(n, i, j)] != usize::MAX {
                continue;
            }
            for g in 0..group.order() {
                let (a, b) = (group.act(g, i), group.act(g, j));
                pair_class[pair_index(n, a.min(b), a.max(b))] = classes;
            }
            classes += 1;
        }
    }
    let factors = perturbation_factors(classes, delta, seed)?;
    apply_factors(x.space(), delta, &pair_class, &factors)
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn apply_factors<S: Scalar>(
    x: &FiniteMetricSpace<S>,
    delta: f64,
    pair_factor: &[usize],
    factors: &[f64],
) -> Result<PerturbedSpace<S>> {
    let n = x.len();
    let mut dist: Vec<Vec<S>> = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let factor = S::from_f64(factors[pair_factor[pair_index(n, i, j)]])
                .ok_or_else(|| Error::Parse("factor is not finite".into()))?;
            let v = x.d(i, j).clone() * factor;
            dist[i][j] = v.clone();
            dist[j][i] = v;
        }
    }
    let raw = dist.clone();
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k].clone() + dist[k][j].clone();
                    if via < dist[i][j] {
                        dist[i][j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let repair_drift = max_or_zero(
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| raw[i][j].clone() - dist[i][j].clone()),
    );
    let deviation = max_or_zero(
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (dist[i][j].clone() - x.d(i, j).clone()).abs()),
    );
    let bound = x.diameter() * S::from_f64(delta).expect("finite delta");
    let space = FiniteMetricSpace::new(x.labels().to_vec(), dist)?;
    Ok(PerturbedSpace {
        space,
        delta,
        repair_drift,
        bound,
        deviation,
    })
}
