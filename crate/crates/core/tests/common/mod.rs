//! Seeded generators and brute-force oracles shared by the integration
//! tests. The oracles recompute everything from the distance tables and
//! permutations without going through the library's scorers.
#![allow(dead_code)]

use std::collections::BTreeSet;

use egh_core::{FiniteMetricSpace, GSpace, IsometryGroup, Scalar};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Closure of a set of permutations under composition, or `None` once it
/// grows past `limit` elements.
pub fn perm_closure(n: usize, gens: &[Vec<usize>], limit: usize) -> Option<Vec<Vec<usize>>> {
    let id: Vec<usize> = (0..n).collect();
    let mut seen = BTreeSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q: Vec<usize> = p.iter().map(|&x| g[x]).collect();
            if seen.insert(q.clone()) {
                if seen.len() > limit {
                    return None;
                }
                frontier.push(q);
            }
        }
    }
    Some(seen.into_iter().collect())
}

/// A random group of order at most `max_order` acting on `n` points,
/// generated by up to two random permutations.
pub fn random_group(rng: &mut ChaCha8Rng, n: usize, max_order: usize) -> Vec<Vec<usize>> {
    loop {
        let count = rng.gen_range(0..=2);
        let gens: Vec<Vec<usize>> = (0..count)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        if let Some(perms) = perm_closure(n, &gens, max_order) {
            return perms;
        }
    }
}

/// Distances constant on the orbits of unordered pairs, drawn from
/// `{5, 5.25, ..., 10}`, so every element of `perms` is an isometry and the
/// triangle inequality holds automatically.
pub fn invariant_table<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, perms: &[Vec<usize>]) -> Vec<Vec<S>> {
    let mut value: Vec<Vec<Option<S>>> = vec![vec![None; n]; n];
    for i in 0..n {
        value[i][i] = Some(S::zero());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if value[i][j].is_some() {
                continue;
            }
            let v = S::from_u32(rng.gen_range(20..=40)).unwrap() / S::from_u32(4).unwrap();
            for p in perms {
                let (a, b) = (p[i], p[j]);
                value[a][b] = Some(v.clone());
                value[b][a] = Some(v.clone());
            }
        }
    }
    value
        .into_iter()
        .map(|row| row.into_iter().map(|v| v.unwrap()).collect())
        .collect()
}

/// A random pair with `1..=max_points` points and a group of order at most
/// `max_order`.
pub fn random_gspace<S: Scalar>(rng: &mut ChaCha8Rng, max_points: usize, max_order: usize) -> GSpace<S> {
    let n = rng.gen_range(1..=max_points);
    random_gspace_with(rng, n, max_order)
}

pub fn random_gspace_with<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, max_order: usize) -> GSpace<S> {
    let perms = random_group(rng, n, max_order);
    let table = invariant_table(rng, n, &perms);
    let space = FiniteMetricSpace::from_table(table).unwrap();
    let group = IsometryGroup::from_perms(n, perms).unwrap();
    GSpace::new(space, group).unwrap()
}

/// Uniformly random `(f, θ, ψ)`.
pub fn random_maps(rng: &mut ChaCha8Rng, src: &GSpace<impl Scalar>, dst: &GSpace<impl Scalar>) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let f = (0..src.points()).map(|_| rng.gen_range(0..dst.points())).collect();
    let theta = (0..src.order()).map(|_| rng.gen_range(0..dst.order())).collect();
    let psi = (0..dst.order()).map(|_| rng.gen_range(0..src.order())).collect();
    (f, theta, psi)
}

/// Every map from `0..n` to `0..m`, in lexicographic order.
pub fn all_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..m).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

fn max_of<S: Scalar>(items: impl IntoIterator<Item = S>) -> S {
    items
        .into_iter()
        .fold(S::zero(), |a, b| if b > a { b } else { a })
}

fn min_of<S: Scalar>(items: impl IntoIterator<Item = S>) -> S {
    items
        .into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .expect("non-empty")
}

/// Order of a triple straight from the definition.
pub fn oracle_order<S: Scalar>(src: &GSpace<S>, dst: &GSpace<S>, f: &[usize], theta: &[usize], psi: &[usize]) -> S {
    let (x, y) = (src.space(), dst.space());
    let (gx, gy) = (src.group(), dst.group());
    let nx = x.len();
    let distortion = max_of((0..nx).flat_map(|a| (0..nx).map(move |b| (a, b))).map(|(a, b)| {
        (y.d(f[a], f[b]).clone() - x.d(a, b).clone()).abs()
    }));
    let covering = max_of((0..y.len()).map(|q| min_of(f.iter().map(|&p| y.d(p, q).clone()))));
    let forward = max_of((0..gx.order()).flat_map(|g| {
        (0..nx).map(move |p| y.d(gy.act(theta[g], f[p]), f[gx.act(g, p)]).clone())
    }));
    let backward = max_of((0..gy.order()).flat_map(|l| {
        (0..nx).map(move |p| y.d(gy.act(l, f[p]), f[gx.act(psi[l], p)]).clone())
    }));
    max_of([distortion, covering, forward, backward])
}

/// For fixed `f`, the best `θ` and `ψ` chosen element by element.
pub fn oracle_best_for_f<S: Scalar>(src: &GSpace<S>, dst: &GSpace<S>, f: &[usize]) -> S {
    let (gx, gy, y) = (src.group(), dst.group(), dst.space());
    let cost = |g: usize, l: usize| {
        max_of((0..src.points()).map(|p| y.d(gy.act(l, f[p]), f[gx.act(g, p)]).clone()))
    };
    let theta: Vec<usize> = (0..gx.order())
        .map(|g| (0..gy.order()).min_by(|&a, &b| cost(g, a).partial_cmp(&cost(g, b)).unwrap()).unwrap())
        .collect();
    let psi: Vec<usize> = (0..gy.order())
        .map(|l| (0..gx.order()).min_by(|&a, &b| cost(a, l).partial_cmp(&cost(b, l)).unwrap()).unwrap())
        .collect();
    oracle_order(src, dst, f, &theta, &psi)
}

/// Minimal triple order from `src` to `dst` over every point map.
pub fn oracle_direction<S: Scalar>(src: &GSpace<S>, dst: &GSpace<S>) -> S {
    min_of(all_maps(src.points(), dst.points()).iter().map(|f| oracle_best_for_f(src, dst, f)))
}

pub fn oracle_distance<S: Scalar>(a: &GSpace<S>, b: &GSpace<S>) -> S {
    let fw = oracle_direction(a, b);
    let bw = oracle_direction(b, a);
    if fw > bw {
        fw
    } else {
        bw
    }
}

/// Small spaces with every group of order at most two that acts on them:
/// all tables on up to three points with entries in `{1, 2}`, plus a
/// scalene triangle and a 2-point space of length 3.
pub fn small_corpus<S: Scalar>() -> Vec<GSpace<S>> {
    let s = |v: u32| S::from_u32(v).unwrap();
    let mut tables: Vec<Vec<Vec<S>>> = vec![vec![vec![s(0)]]];
    for d in [1, 2, 3] {
        tables.push(vec![vec![s(0), s(d)], vec![s(d), s(0)]]);
    }
    for a in [1, 2] {
        for b in [1, 2] {
            for c in [1, 2] {
                tables.push(vec![vec![s(0), s(a), s(b)], vec![s(a), s(0), s(c)], vec![s(b), s(c), s(0)]]);
            }
        }
    }
    tables.push(vec![vec![s(0), s(2), s(3)], vec![s(2), s(0), s(4)], vec![s(3), s(4), s(0)]]);

    let mut out = Vec::new();
    for table in tables {
        let space = FiniteMetricSpace::from_table(table).unwrap();
        let full = egh_core::isometry_group(&space);
        out.push(GSpace::trivial(space.clone()));
        for g in 0..full.order() {
            if g != full.identity() && full.mul(g, g) == full.identity() {
                let sub = egh_core::subgroup_closure(&full, &[g]).unwrap();
                out.push(GSpace::new(space.clone(), sub).unwrap());
            }
        }
    }
    out
}
