//! Smoothing a group map through a Euclidean embedding of the target group.
//!
//! Each source element is sent to the bump-weighted average of the
//! embedded images of nearby net points, then projected back onto the
//! embedded group by nearest point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GSpace;
use crate::scalar::Scalar;
use crate::space::check_map;
use crate::triples::{group_map_distance, perturb_theta, ApproxTriple, PerturbedTheta};

/// Coordinates for every group element, with the measured bi-Lipschitz
/// constants against the uniform metric.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddedGroup {
    pub coords: Vec<Vec<f64>>,
    /// `min ‖φg − φh‖ / d(g, h)` over distinct pairs.
    pub lower: f64,
    /// `max ‖φg − φh‖ / d(g, h)` over distinct pairs.
    pub upper: f64,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl EmbeddedGroup {
    /// Wraps arbitrary coordinates, measuring the constants exhaustively.
    pub fn new<S: Scalar>(space: &GSpace<S>, coords: Vec<Vec<f64>>) -> Result<Self> {
        let m = space.order();
        if coords.len() != m {
            return Err(Error::Incompatible(format!(
                "{} coordinate vectors for a group of order {m}",
                coords.len()
            )));
        }
        let metric = space.group_metric();
        let mut lower = f64::INFINITY;
        let mut upper: f64 = 0.0;
        for g in 0..m {
            for h in (g + 1)..m {
                let e = euclidean(&coords[g], &coords[h]);
                if e == 0.0 {
                    return Err(Error::Incompatible(format!(
                        "elements {g} and {h} share coordinates"
                    )));
                }
                let ratio = e / metric.d(g, h).to_f64_lossy();
                lower = lower.min(ratio);
                upper = upper.max(ratio);
            }
        }
        if m < 2 {
            lower = 1.0;
            upper = 1.0;
        }
        Ok(Self {
            coords,
            lower,
            upper,
        })
    }

    pub fn dimension(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }

    /// Nearest embedded element to `v`, lowest index on ties.
    pub fn retract(&self, v: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (g, c) in self.coords.iter().enumerate() {
            let d = euclidean(c, v);
            if d < best.1 {
                best = (g, d);
            }
        }
        best.0
    }
}

/// `g ↦ (d(g x_1, x_1), …, d(g x_n, x_n), one-hot(g))`.
pub fn default_embedding<S: Scalar>(space: &GSpace<S>) -> EmbeddedGroup {
    let (x, group) = (space.space(), space.group());
    let m = group.order();
    let coords = (0..m)
        .map(|g| {
            let mut v: Vec<f64> = (0..x.len())
                .map(|p| x.d(group.act(g, p), p).to_f64_lossy())
                .collect();
            v.extend((0..m).map(|h| if h == g { 1.0 } else { 0.0 }));
            v
        })
        .collect();
    EmbeddedGroup::new(space, coords).expect("one-hot block makes the embedding injective")
}

/// Net centers (element indices) and the radius they cover.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct NetSpec<S> {
    pub centers: Vec<usize>,
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub radius: S,
}

impl<S: Scalar> NetSpec<S> {
    /// Every element is a center; radius zero.
    pub fn all<T: Scalar>(space: &GSpace<T>) -> Self {
        Self {
            centers: (0..space.order()).collect(),
            radius: S::zero(),
        }
    }

    /// First element farther than `radius` from every center, if any.
    pub fn uncovered(&self, space: &GSpace<S>) -> Option<usize> {
        let metric = space.group_metric();
        (0..space.order()).find(|&g| {
            !self
                .centers
                .iter()
                .any(|&c| metric.d(g, c).le_tol(&self.radius))
        })
    }
}

/// Farthest-point net: starts at element 0 and keeps adding the element
/// farthest from the current centers until all are within `radius`.
pub fn greedy_net<S: Scalar>(space: &GSpace<S>, radius: S) -> Result<NetSpec<S>> {
    if radius <= S::zero() {
        return Err(Error::Precondition {
            what: "net radius must be positive".into(),
            measured: radius.to_string(),
            allowed: "> 0".into(),
        });
    }
    let metric = space.group_metric();
    let m = space.order();
    let mut centers = vec![0];
    let mut gap: Vec<S> = (0..m).map(|g| metric.d(g, 0).clone()).collect();
    loop {
        let (far, far_gap) = gap
            .iter()
            .enumerate()
            .fold((0, S::zero()), |(bi, bv), (i, v)| {
                if *v > bv {
                    (i, v.clone())
                } else {
                    (bi, bv)
                }
            });
        if far_gap.le_tol(&radius) {
            break;
        }
        centers.push(far);
        for (g, slot) in gap.iter_mut().enumerate() {
            let d = metric.d(g, far);
            if *d < *slot {
                *slot = d.clone();
            }
        }
    }
    let net = NetSpec { centers, radius };
    debug_assert!(net.uncovered(space).is_none());
    Ok(net)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpProfile {
    /// `1 − s / cutoff` on `[0, cutoff)`.
    Tent,
    /// `1` on `[0, cutoff)`.
    Indicator,
}

/// Weight function, positive exactly on `[0, cutoff)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BumpSpec {
    pub cutoff: f64,
    pub profile: BumpProfile,
}

impl BumpSpec {
    pub fn tent(cutoff: f64) -> Self {
        Self {
            cutoff,
            profile: BumpProfile::Tent,
        }
    }

    pub fn indicator(cutoff: f64) -> Self {
        Self {
            cutoff,
            profile: BumpProfile::Indicator,
        }
    }

    pub fn weight(&self, s: f64) -> f64 {
        if !(0.0..self.cutoff).contains(&s) {
            return 0.0;
        }
        match self.profile {
            BumpProfile::Tent => 1.0 - s / self.cutoff,
            BumpProfile::Indicator => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct SmoothingReport<S> {
    pub theta2: Vec<usize>,
    /// `max_g d_G(θ'(g), θ(g))`.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub measured: S,
    /// `2 (upper / lower) (cutoff + 5ε)`.
    pub ceiling: f64,
    pub within_ceiling: bool,
    /// Present when `measured ≤ ε`.
    pub recertification: Option<PerturbedTheta<S>>,
}

/// Replaces `t.theta` by its smoothed version.
///
/// `src` carries the source group `G_k` (where the net lives) and `dst` the
/// target group `G` (which `emb` embeds).
pub fn smooth_theta<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    t: &ApproxTriple<S>,
    emb: &EmbeddedGroup,
    net: &NetSpec<S>,
    bump: &BumpSpec,
) -> Result<SmoothingReport<S>> {
    check_map(src.order(), dst.order(), &t.theta, "theta")?;
    if emb.coords.len() != dst.order() {
        return Err(Error::Incompatible("embedding does not match the target group".into()));
    }
    if !(bump.cutoff > 0.0) {
        return Err(Error::Precondition {
            what: "bump cutoff must be positive".into(),
            measured: bump.cutoff.to_string(),
            allowed: "> 0".into(),
        });
    }
    let radius = net.radius.to_f64_lossy();
    if radius > bump.cutoff / 2.0 {
        return Err(Error::Precondition {
            what: "net radius exceeds half the bump cutoff".into(),
            measured: radius.to_string(),
            allowed: (bump.cutoff / 2.0).to_string(),
        });
    }
    if let Some(&c) = net.centers.iter().find(|&&c| c >= src.order()) {
        return Err(Error::Incompatible(format!("net center {c} out of range")));
    }

    let metric = src.group_metric();
    let dim = emb.dimension();
    let mut theta2 = Vec::with_capacity(src.order());
    for g in 0..src.order() {
        let mut avg = vec![0.0; dim];
        let mut denom = 0.0;
        for &h in &net.centers {
            let w = bump.weight(metric.d(g, h).to_f64_lossy());
            if w > 0.0 {
                denom += w;
                for (a, c) in avg.iter_mut().zip(&emb.coords[t.theta[h]]) {
                    *a += w * c;
                }
            }
        }
        if denom <= 0.0 {
            return Err(Error::EmptyDenominator { element: g });
        }
        avg.iter_mut().for_each(|a| *a /= denom);
        theta2.push(emb.retract(&avg));
    }

    let eps = t.order();
    let measured = group_map_distance(dst, &t.theta, &theta2);
    let ceiling = 2.0 * emb.upper / emb.lower * (bump.cutoff + 5.0 * eps.to_f64_lossy());
    let within_ceiling = measured.to_f64_lossy() <= ceiling + crate::scalar::FLOAT_TOL;
    let recertification = if measured.le_tol(&eps) {
        Some(perturb_theta(src, dst, t, &theta2)?)
    } else {
        None
    };
    Ok(SmoothingReport {
        theta2,
        measured,
        ceiling,
        within_ceiling,
        recertification,
    })
}
