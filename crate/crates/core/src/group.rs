//! Finite isometry groups acting on finite metric spaces.
//!
//! Elements are permutations of point indices, `perm[i]` being the image
//! of point `i`. The product `mul(a, b)` is the composition `a ∘ b`
//! (apply `b` first).

use std::collections::{BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{max_or_zero, Scalar};
use crate::space::FiniteMetricSpace;

pub type Perm = Vec<usize>;

/// A finite permutation group with precomputed composition and inverse
/// tables.
#[derive(Clone, Debug)]
pub struct IsometryGroup {
    degree: usize,
    perms: Vec<Perm>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    index: HashMap<Perm, usize>,
}

impl PartialEq for IsometryGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.perms == other.perms
    }
}

fn is_permutation(p: &[usize], degree: usize) -> bool {
    if p.len() != degree {
        return false;
    }
    let mut seen = vec![false; degree];
    for &v in p {
        if v >= degree || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

impl IsometryGroup {
    /// Builds the tables for a set of permutations, keeping the given
    /// order. Fails unless the set contains the identity and is closed
    /// under composition.
    pub fn from_perms(degree: usize, perms: Vec<Perm>) -> Result<Self> {
        if perms.is_empty() {
            return Err(Error::NotAGroup("no elements".into()));
        }
        let mut index = HashMap::with_capacity(perms.len());
        for (i, p) in perms.iter().enumerate() {
            if !is_permutation(p, degree) {
                return Err(Error::NotAGroup(format!(
                    "element {i} is not a permutation of {degree} points"
                )));
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::NotAGroup(format!("element {i} is listed twice")));
            }
        }
        let id: Perm = (0..degree).collect();
        let identity = *index
            .get(&id)
            .ok_or_else(|| Error::NotAGroup("identity missing".into()))?;

        let m = perms.len();
        let mut mul = vec![vec![0; m]; m];
        for a in 0..m {
            for b in 0..m {
                let prod: Perm = perms[b].iter().map(|&x| perms[a][x]).collect();
                mul[a][b] = *index.get(&prod).ok_or_else(|| {
                    Error::NotAGroup(format!("product of elements {a} and {b} is missing"))
                })?;
            }
        }
        let mut inv = vec![0; m];
        for a in 0..m {
            inv[a] = (0..m).find(|&b| mul[a][b] == identity).ok_or_else(|| {
                Error::NotAGroup(format!("element {a} has no inverse"))
            })?;
        }
        Ok(Self {
            degree,
            perms,
            mul,
            inv,
            identity,
            index,
        })
    }

    pub fn trivial(degree: usize) -> Self {
        Self::from_perms(degree, vec![(0..degree).collect()]).expect("identity is a group")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    pub fn perm(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Index of `a ∘ b`.
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// Image of point `x` under element `g`.
    #[inline]
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.perms[g][x]
    }

    pub fn index_of(&self, perm: &[usize]) -> Option<usize> {
        self.index.get(perm).copied()
    }

    /// Exhaustive check of the group axioms on the tables.
    pub fn verify_axioms(&self) -> Result<()> {
        let m = self.order();
        for a in 0..m {
            if self.mul(self.identity, a) != a || self.mul(a, self.identity) != a {
                return Err(Error::NotAGroup(format!("identity fails on element {a}")));
            }
            if self.mul(a, self.inv(a)) != self.identity || self.mul(self.inv(a), a) != self.identity
            {
                return Err(Error::NotAGroup(format!("inverse table wrong at {a}")));
            }
            for b in 0..m {
                for c in 0..m {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return Err(Error::NotAGroup(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Fails with the first pair whose distance some element changes.
    pub fn check_isometric<S: Scalar>(&self, space: &FiniteMetricSpace<S>) -> Result<()> {
        if self.degree != space.len() {
            return Err(Error::Incompatible(format!(
                "group acts on {} points, space has {}",
                self.degree,
                space.len()
            )));
        }
        for (g, p) in self.perms.iter().enumerate() {
            for i in 0..self.degree {
                for j in (i + 1)..self.degree {
                    if !space.d(p[i], p[j]).approx_eq(space.d(i, j)) {
                        return Err(Error::NotIsometric { element: g, i, j });
                    }
                }
            }
        }
        Ok(())
    }

    /// Parent indices of the subgroup generated by `generators`, ascending.
    pub fn closure_indices(&self, generators: &[usize]) -> Result<Vec<usize>> {
        if let Some(&g) = generators.iter().find(|&&g| g >= self.order()) {
            return Err(Error::Incompatible(format!(
                "generator {g} out of range for a group of order {}",
                self.order()
            )));
        }
        let mut members = BTreeSet::from([self.identity]);
        let mut queue: VecDeque<usize> = VecDeque::from([self.identity]);
        while let Some(a) = queue.pop_front() {
            for &g in generators {
                let p = self.mul(g, a);
                if members.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        Ok(members.into_iter().collect())
    }

    /// Checks that `members` (parent indices) form a subgroup.
    pub fn is_subgroup(&self, members: &[usize]) -> bool {
        let set: BTreeSet<usize> = members.iter().copied().collect();
        if set.len() != members.len() || !set.contains(&self.identity) {
            return false;
        }
        if set.iter().any(|&a| a >= self.order()) {
            return false;
        }
        set.iter()
            .all(|&a| set.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    /// Orbit representatives (lowest index) of points.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for x in 0..self.degree {
            if seen[x] {
                continue;
            }
            let orbit: BTreeSet<usize> = (0..self.order()).map(|g| self.act(g, x)).collect();
            for &y in &orbit {
                seen[y] = true;
            }
            out.push(orbit.into_iter().collect());
        }
        out
    }
}

/// All distance-preserving permutations of `space`, in lexicographic order.
pub fn isometry_group<S: Scalar>(space: &FiniteMetricSpace<S>) -> IsometryGroup {
    let n = space.len();
    // Points can only map to points with the same sorted distance row.
    let profile: Vec<Vec<S>> = (0..n)
        .map(|i| {
            let mut row = space.table()[i].clone();
            row.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            row
        })
        .collect();
    let compatible: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    profile[i]
                        .iter()
                        .zip(&profile[j])
                        .all(|(a, b)| a.approx_eq(b))
                })
                .collect()
        })
        .collect();

    let mut perms = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    extend_isometry(space, &compatible, &mut current, &mut used, &mut perms);
    IsometryGroup::from_perms(n, perms).expect("isometries of a finite space form a group")
}

fn extend_isometry<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    compatible: &[Vec<usize>],
    current: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<Perm>,
) {
    let i = current.len();
    if i == space.len() {
        out.push(current.clone());
        return;
    }
    for &j in &compatible[i] {
        if used[j] {
            continue;
        }
        let preserves = current
            .iter()
            .enumerate()
            .all(|(prev, &img)| space.d(j, img).approx_eq(space.d(i, prev)));
        if !preserves {
            continue;
        }
        used[j] = true;
        current.push(j);
        extend_isometry(space, compatible, current, used, out);
        current.pop();
        used[j] = false;
    }
}

/// Smallest subgroup containing `generators`, elements in lexicographic order.
pub fn subgroup_closure(group: &IsometryGroup, generators: &[usize]) -> Result<IsometryGroup> {
    let mut perms: Vec<Perm> = group
        .closure_indices(generators)?
        .into_iter()
        .map(|g| group.perm(g).to_vec())
        .collect();
    perms.sort();
    IsometryGroup::from_perms(group.degree(), perms)
}

/// The uniform (sup) metric on a group acting by isometries:
/// `entry(g, g') = max_x d(g x, g' x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformMetric<S> {
    table: Vec<Vec<S>>,
}

impl<S: Scalar> UniformMetric<S> {
    pub fn entry(&self, g: usize, h: usize) -> &S {
        &self.table[g][h]
    }

    pub fn table(&self) -> &[Vec<S>] {
        &self.table
    }

    /// The group as a finite metric space, elements labelled `g0, g1, ...`.
    pub fn to_space(&self) -> Result<FiniteMetricSpace<S>> {
        let labels = (0..self.table.len()).map(|g| format!("g{g}")).collect();
        FiniteMetricSpace::new(labels, self.table.clone())
    }
}

pub fn uniform_metric<S: Scalar>(
    group: &IsometryGroup,
    space: &FiniteMetricSpace<S>,
) -> Result<UniformMetric<S>> {
    if group.degree() != space.len() {
        return Err(Error::Incompatible(format!(
            "group acts on {} points, space has {}",
            group.degree(),
            space.len()
        )));
    }
    let m = group.order();
    let table = (0..m)
        .into_par_iter()
        .map(|g| {
            (0..m)
                .map(|h| {
                    max_or_zero(
                        (0..space.len()).map(|x| space.d(group.act(g, x), group.act(h, x)).clone()),
                    )
                })
                .collect()
        })
        .collect();
    Ok(UniformMetric { table })
}

/// A finite metric space with a group of isometries and the group's
/// uniform metric.
#[derive(Clone, Debug)]
pub struct GSpace<S = f64> {
    space: FiniteMetricSpace<S>,
    group: IsometryGroup,
    group_metric: FiniteMetricSpace<S>,
}

impl<S: Scalar> GSpace<S> {
    pub fn new(space: FiniteMetricSpace<S>, group: IsometryGroup) -> Result<Self> {
        group.check_isometric(&space)?;
        let group_metric = uniform_metric(&group, &space)?.to_space()?;
        Ok(Self {
            space,
            group,
            group_metric,
        })
    }

    /// The space with its full isometry group.
    pub fn full(space: FiniteMetricSpace<S>) -> Self {
        let group = isometry_group(&space);
        Self::new(space, group).expect("isometry group acts isometrically")
    }

    pub fn trivial(space: FiniteMetricSpace<S>) -> Self {
        let group = IsometryGroup::trivial(space.len());
        Self::new(space, group).expect("identity acts isometrically")
    }

    pub fn space(&self) -> &FiniteMetricSpace<S> {
        &self.space
    }

    pub fn group(&self) -> &IsometryGroup {
        &self.group
    }

    /// The group under its uniform metric.
    pub fn group_metric(&self) -> &FiniteMetricSpace<S> {
        &self.group_metric
    }

    pub fn points(&self) -> usize {
        self.space.len()
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }
}
