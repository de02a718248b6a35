//! Exact and bounded equivariant GH distance between finite G-spaces.
//!
//! For a fixed point map `f` both equivariance conditions decompose per
//! group element: the optimal `θ(γ)` minimises `pairing_cost(γ, ·)` and the
//! optimal `ψ(λ)` minimises `pairing_cost(·, λ)`. The search therefore only
//! branches over `f`, assigning images point by point and pruning on a lower
//! bound built from the already-assigned points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GSpace, IsometryGroup};
use crate::scalar::{argmin, max2, Scalar};
use crate::space::{check_map, map_defects, FiniteMetricSpace, MapDefects};
use crate::triples::{pairing_cost, ApproxTriple, CertificateReport, Check};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Branch-and-bound until the search space is exhausted or the budget
    /// runs out.
    Exact,
    /// Greedy construction followed by single-point local search.
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Node budget per direction.
    pub max_nodes: u64,
    /// Subtrees whose lower bound is within this margin of the incumbent are
    /// discarded. Zero keeps the search exact.
    pub prune_margin: f64,
    /// Restrict the first assigned image to orbit representatives of the
    /// target group.
    pub symmetry_reduction: bool,
    pub mode: SearchMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_nodes: 10_000_000,
            prune_margin: 0.0,
            symmetry_reduction: true,
            mode: SearchMode::Exact,
        }
    }
}

impl SearchConfig {
    pub fn exact(max_nodes: u64) -> Self {
        Self {
            max_nodes,
            ..Self::default()
        }
    }
}

/// Optimal triple found in one direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct DirectionResult<S> {
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub value: S,
    pub witness: ApproxTriple<S>,
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct DistanceCertificate<S> {
    /// Max of the two one-directional optima.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub value: S,
    pub witness_forward: ApproxTriple<S>,
    pub witness_backward: ApproxTriple<S>,
    /// Both directions were searched exhaustively.
    pub optimal: bool,
    pub forward: DirectionSummary<S>,
    pub backward: DirectionSummary<S>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct DirectionSummary<S> {
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub value: S,
    pub optimal: bool,
    pub nodes: u64,
}

/// For each `γ`, the `λ` minimising `max_x d_Y(λ(f x), f(γ x))`, lowest
/// index on ties.
pub fn best_theta_for_f<S: Scalar>(src: &GSpace<S>, dst: &GSpace<S>, f: &[usize]) -> Result<Vec<usize>> {
    check_map(src.points(), dst.points(), f, "f")?;
    Ok((0..src.order())
        .map(|gamma| {
            argmin((0..dst.order()).map(|lambda| pairing_cost(src, dst, f, gamma, lambda)))
                .expect("groups are non-empty")
                .0
        })
        .collect())
}

/// For each `λ`, the `γ` minimising `max_x d_Y(λ(f x), f(γ x))`, lowest
/// index on ties.
pub fn best_psi_for_f<S: Scalar>(src: &GSpace<S>, dst: &GSpace<S>, f: &[usize]) -> Result<Vec<usize>> {
    check_map(src.points(), dst.points(), f, "f")?;
    Ok((0..dst.order())
        .map(|lambda| {
            argmin((0..src.order()).map(|gamma| pairing_cost(src, dst, f, gamma, lambda)))
                .expect("groups are non-empty")
                .0
        })
        .collect())
}

/// The best triple with point map `f`.
pub fn best_triple_for_f<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    f: Vec<usize>,
) -> Result<ApproxTriple<S>> {
    let theta = best_theta_for_f(src, dst, &f)?;
    let psi = best_psi_for_f(src, dst, &f)?;
    ApproxTriple::new(src, dst, f, theta, psi)
}

/// Equivariant GH distance: the larger of the two one-directional minimal
/// triple orders, with witnesses.
pub fn egh_distance<S: Scalar>(
    a: &GSpace<S>,
    b: &GSpace<S>,
    cfg: &SearchConfig,
) -> Result<DistanceCertificate<S>> {
    if cfg.max_nodes == 0 {
        return Err(Error::Incompatible("node budget must be at least 1".into()));
    }
    let forward = search_direction(a, b, cfg);
    let backward = search_direction(b, a, cfg);
    let value = max2(forward.value.clone(), backward.value.clone());
    let summary = |d: &DirectionResult<S>| DirectionSummary {
        value: d.value.clone(),
        optimal: d.optimal,
        nodes: d.nodes,
    };
    Ok(DistanceCertificate {
        value,
        optimal: forward.optimal && backward.optimal,
        forward: summary(&forward),
        backward: summary(&backward),
        witness_forward: forward.witness,
        witness_backward: backward.witness,
    })
}

/// Minimal triple order from `src` to `dst`.
pub fn search_direction<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    cfg: &SearchConfig,
) -> DirectionResult<S> {
    let mut search = Search::new(src, dst, cfg);
    search.run();
    let witness = search.incumbent.expect("at least one candidate map is scored");
    DirectionResult {
        value: witness.order(),
        optimal: search.complete,
        nodes: search.nodes,
        witness,
    }
}

struct Frame<S> {
    distortion: S,
    costs: Vec<S>,
}

struct Search<'a, S> {
    src: &'a GSpace<S>,
    dst: &'a GSpace<S>,
    cfg: &'a SearchConfig,
    margin: S,
    /// Source points in assignment order.
    order: Vec<usize>,
    f: Vec<Option<usize>>,
    stack: Vec<Frame<S>>,
    incumbent: Option<ApproxTriple<S>>,
    nodes: u64,
    complete: bool,
}

impl<'a, S: Scalar> Search<'a, S> {
    fn new(src: &'a GSpace<S>, dst: &'a GSpace<S>, cfg: &'a SearchConfig) -> Self {
        let x = src.space();
        let ecc: Vec<S> = (0..x.len()).map(|i| x.eccentricity(i)).collect();
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| {
            ecc[b]
                .partial_cmp(&ecc[a])
                .expect("finite distances")
                .then(a.cmp(&b))
        });
        let costs = vec![S::zero(); src.order() * dst.order()];
        Self {
            src,
            dst,
            cfg,
            margin: S::from_f64(cfg.prune_margin.max(0.0)).unwrap_or_else(S::zero),
            order,
            f: vec![None; x.len()],
            stack: vec![Frame {
                distortion: S::zero(),
                costs,
            }],
            incumbent: None,
            nodes: 0,
            complete: false,
        }
    }

    fn top(&self) -> &Frame<S> {
        self.stack.last().expect("root frame")
    }

    /// Adds `x ↦ y` and the terms it completes.
    fn assign(&mut self, x: usize, y: usize) {
        let (sx, sy) = (self.src.space(), self.dst.space());
        let (gx, gy) = (self.src.group(), self.dst.group());
        self.f[x] = Some(y);
        let top = self.top();
        let mut distortion = top.distortion.clone();
        let mut costs = top.costs.clone();
        for (p, img) in self.f.iter().enumerate() {
            let Some(q) = *img else { continue };
            if p == x {
                continue;
            }
            let diff = sy.d(q, y).clone() - sx.d(p, x).clone();
            let neg = -diff.clone();
            if diff > distortion {
                distortion = diff;
            }
            if neg > distortion {
                distortion = neg;
            }
        }
        let ny = self.dst.order();
        for gamma in 0..self.src.order() {
            let moved = gx.act(gamma, x);
            let back = gx.act(gx.inv(gamma), x);
            // terms at x' = x and at x' = γ⁻¹x, when both ends are assigned
            let mut terms = Vec::with_capacity(2);
            if let Some(fm) = self.f[moved] {
                terms.push((y, fm));
            }
            if back != x {
                if let Some(fb) = self.f[back] {
                    terms.push((fb, y));
                }
            }
            for (fx, fgx) in terms {
                for lambda in 0..ny {
                    let v = sy.d(gy.act(lambda, fx), fgx);
                    let slot = &mut costs[gamma * ny + lambda];
                    if *v > *slot {
                        *slot = v.clone();
                    }
                }
            }
        }
        self.stack.push(Frame { distortion, costs });
    }

    fn unassign(&mut self, x: usize) {
        self.f[x] = None;
        self.stack.pop();
    }

    /// Lower bound on the score of every completion of the current partial map.
    fn lower_bound(&self) -> S {
        let top = self.top();
        let (nx, ny) = (self.src.order(), self.dst.order());
        let mut lb = top.distortion.clone();
        for gamma in 0..nx {
            let row_min = argmin((0..ny).map(|l| top.costs[gamma * ny + l].clone()))
                .expect("non-empty")
                .1;
            lb = max2(lb, row_min);
        }
        for lambda in 0..ny {
            let col_min = argmin((0..nx).map(|g| top.costs[g * ny + lambda].clone()))
                .expect("non-empty")
                .1;
            lb = max2(lb, col_min);
        }
        lb
    }

    fn score(&self, f: Vec<usize>) -> ApproxTriple<S> {
        best_triple_for_f(self.src, self.dst, f).expect("search maps are well formed")
    }

    /// Keeps `candidate` only if it strictly improves the incumbent.
    fn offer(&mut self, candidate: ApproxTriple<S>) -> bool {
        match &self.incumbent {
            Some(best) if candidate.order() >= best.order() => false,
            _ => {
                self.incumbent = Some(candidate);
                true
            }
        }
    }

    fn incumbent_value(&self) -> Option<S> {
        self.incumbent.as_ref().map(|t| t.order())
    }

    fn run(&mut self) {
        let n = self.src.points();
        if n == self.dst.points() {
            let id = self.score((0..n).collect());
            self.offer(id);
        }
        let greedy = self.greedy();
        self.offer(greedy);

        match self.cfg.mode {
            SearchMode::Exact => {
                let exhausted = self.branch(0);
                self.complete = exhausted && self.margin.is_zero();
            }
            SearchMode::UpperBound => {
                self.local_search();
                self.complete = self.incumbent_value().is_some_and(|v| v.is_zero());
            }
        }
        if self.incumbent_value().is_some_and(|v| v.is_zero()) {
            self.complete = true;
        }
    }

    /// Assigns each point the image with the smallest partial bound.
    fn greedy(&mut self) -> ApproxTriple<S> {
        let order = self.order.clone();
        for &x in &order {
            let mut best: Option<(usize, S)> = None;
            for y in 0..self.dst.points() {
                self.assign(x, y);
                let lb = self.lower_bound();
                self.unassign(x);
                if best.as_ref().is_none_or(|(_, b)| lb < *b) {
                    best = Some((y, lb));
                }
            }
            let (y, _) = best.expect("target space is non-empty");
            self.assign(x, y);
        }
        let f: Vec<usize> = self.f.iter().map(|v| v.expect("all assigned")).collect();
        for &x in order.iter().rev() {
            self.unassign(x);
        }
        self.score(f)
    }

    /// First-improvement single-point moves, one node per scored map.
    fn local_search(&mut self) {
        let mut current = self.incumbent.clone().expect("seeded");
        'outer: loop {
            for x in 0..self.src.points() {
                for y in 0..self.dst.points() {
                    if y == current.f[x] {
                        continue;
                    }
                    if self.nodes >= self.cfg.max_nodes {
                        break 'outer;
                    }
                    self.nodes += 1;
                    let mut f = current.f.clone();
                    f[x] = y;
                    let candidate = self.score(f);
                    if candidate.order() < current.order() {
                        current = candidate.clone();
                        self.offer(candidate);
                        continue 'outer;
                    }
                }
            }
            break;
        }
    }

    /// Depth-first branch and bound. Returns `false` if the budget ran out.
    fn branch(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            let f = self.f.iter().map(|v| v.expect("all assigned")).collect();
            let candidate = self.score(f);
            self.offer(candidate);
            return true;
        }
        let x = self.order[depth];
        let candidates: Vec<usize> = if depth == 0 && self.cfg.symmetry_reduction {
            self.dst.group().orbits().into_iter().map(|o| o[0]).collect()
        } else {
            (0..self.dst.points()).collect()
        };
        for y in candidates {
            if self.nodes >= self.cfg.max_nodes {
                return false;
            }
            self.nodes += 1;
            self.assign(x, y);
            let prune = match self.incumbent_value() {
                Some(best) => self.lower_bound() + self.margin.clone() >= best,
                None => false,
            };
            let finished = prune || self.branch(depth + 1);
            self.unassign(x);
            if !finished {
                return false;
            }
        }
        true
    }
}

/// Outcome of moving one base point.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct BasepointRepair<S> {
    pub map: Vec<usize>,
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub original_order: S,
    /// Sharp order of the repaired map.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub repaired_order: S,
    pub defects: MapDefects<S>,
    pub report: CertificateReport<S>,
}

/// Redirects `target_pre` to `target`, leaving the rest of `f` unchanged.
///
/// Requires `d_X(f(target_pre), target) ≤ ε` with ε the order of `f`. The
/// report checks the two distortion inequalities and the order of the
/// repaired map against 2ε.
pub fn basepoint_repair<S: Scalar>(
    src: &FiniteMetricSpace<S>,
    dst: &FiniteMetricSpace<S>,
    f: &[usize],
    target_pre: usize,
    target: usize,
) -> Result<BasepointRepair<S>> {
    let original = map_defects(src, dst, f)?;
    let eps = original.order();
    let repaired = retarget(f, dst.len(), target_pre, target, &eps, dst)?;
    let defects = map_defects(src, dst, &repaired)?;
    let repaired_order = defects.order();
    let ceiling = eps.times(2);
    let report = CertificateReport {
        epsilon: eps.clone(),
        checks: vec![
            Check::new("upper_inequality", defects.expansion.clone(), ceiling.clone()),
            Check::new("lower_inequality", defects.contraction.clone(), ceiling.clone()),
            Check::new("repaired_order", repaired_order.clone(), ceiling),
        ],
    };
    Ok(BasepointRepair {
        map: repaired,
        original_order: eps,
        repaired_order,
        defects,
        report,
    })
}

fn retarget<S: Scalar>(
    f: &[usize],
    codomain: usize,
    target_pre: usize,
    target: usize,
    eps: &S,
    dst: &FiniteMetricSpace<S>,
) -> Result<Vec<usize>> {
    if target_pre >= f.len() || target >= codomain {
        return Err(Error::Incompatible(format!(
            "base points ({target_pre}, {target}) out of range"
        )));
    }
    let gap = dst.d(f[target_pre], target).clone();
    if !gap.le_tol(eps) {
        return Err(Error::Precondition {
            what: "new base point is farther than epsilon from the current image".into(),
            measured: gap.to_string(),
            allowed: eps.to_string(),
        });
    }
    let mut repaired = f.to_vec();
    repaired[target_pre] = target;
    Ok(repaired)
}

/// Base-point repair of a whole triple, keeping θ and ψ. The precondition
/// uses the triple order ε; the repaired triple is checked against 3ε.
pub fn basepoint_repair_triple<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    t: &ApproxTriple<S>,
    target_pre: usize,
    target: usize,
) -> Result<(ApproxTriple<S>, CertificateReport<S>)> {
    let eps = t.order();
    let map = retarget(&t.f, dst.points(), target_pre, target, &eps, dst.space())?;
    let triple = ApproxTriple::new(src, dst, map, t.theta.clone(), t.psi.clone())?;
    let report = CertificateReport {
        epsilon: eps.clone(),
        checks: vec![
            Check::new("repaired_map_order", triple.defects.map.order(), eps.times(2)),
            Check::new("repaired_triple_order", triple.order(), eps.times(3)),
        ],
    };
    Ok((triple, report))
}

/// Transports the action of `G_k` on `X_k` to `G` through `θ⁻¹: G → G_k`:
/// `g ⋆ x = θ⁻¹(g)(x)`. The returned G-space indexes its group elements
/// like `group`.
pub fn pullback_action<S: Scalar>(
    group: &IsometryGroup,
    theta_inv: &[usize],
    xk: &GSpace<S>,
) -> Result<GSpace<S>> {
    let gk = xk.group();
    check_map(group.order(), gk.order(), theta_inv, "theta_inv")?;
    if group.order() != gk.order() {
        return Err(Error::NotBijective(format!(
            "groups have orders {} and {}",
            group.order(),
            gk.order()
        )));
    }
    let mut hit = vec![false; gk.order()];
    for (g, &img) in theta_inv.iter().enumerate() {
        if hit[img] {
            return Err(Error::NotBijective(format!(
                "element {img} is hit twice (again by {g})"
            )));
        }
        hit[img] = true;
    }
    for g in 0..group.order() {
        for h in 0..group.order() {
            if theta_inv[group.mul(g, h)] != gk.mul(theta_inv[g], theta_inv[h]) {
                return Err(Error::NotHomomorphism { g, h });
            }
        }
    }
    let perms = theta_inv.iter().map(|&gk_el| gk.perm(gk_el).to_vec()).collect();
    let acting = IsometryGroup::from_perms(xk.points(), perms)?;
    GSpace::new(xk.space().clone(), acting)
}
