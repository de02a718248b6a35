//! Approximation triples `(f, θ, ψ)` between two G-spaces, their exact
//! minimal order, and certificates for the bounds that every triple of
//! order ε satisfies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GSpace;
use crate::scalar::{argmin, max2, max_or_zero, Scalar};
use crate::space::{check_map, map_defects, FiniteMetricSpace, MapDefects};

/// A square of maps `f: X→Y`, `k: X→X`, `g: Y→Y`, `h: X→Y`, as index
/// arrays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramSpec {
    pub f: Vec<usize>,
    pub k: Vec<usize>,
    pub g: Vec<usize>,
    pub h: Vec<usize>,
}

/// Least ε for which `g ∘ f = h ∘ k` up to ε, i.e.
/// `max_x d_Y(g(f x), h(k x))`.
pub fn diagram_defect<S: Scalar>(spec: &DiagramSpec, y: &FiniteMetricSpace<S>) -> Result<S> {
    let nx = spec.f.len();
    check_map(nx, y.len(), &spec.f, "f")?;
    check_map(nx, nx, &spec.k, "k")?;
    check_map(y.len(), y.len(), &spec.g, "g")?;
    check_map(nx, y.len(), &spec.h, "h")?;
    Ok(max_or_zero(
        (0..nx).map(|x| y.d(spec.g[spec.f[x]], spec.h[spec.k[x]]).clone()),
    ))
}

/// `max_x d_Y(λ(f x), f(γ x))`: how far the square `λ ∘ f = f ∘ γ` is from
/// commuting. Both equivariance conditions are maxima of this quantity.
pub fn pairing_cost<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    f: &[usize],
    gamma: usize,
    lambda: usize,
) -> S {
    let (gx, gy, y) = (src.group(), dst.group(), dst.space());
    max_or_zero((0..src.points()).map(|x| y.d(gy.act(lambda, f[x]), f[gx.act(gamma, x)]).clone()))
}

/// The four components whose maximum is the order of a triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct TripleDefects<S> {
    pub map: MapDefects<S>,
    /// `max_γ max_x d_Y(θ(γ)(f x), f(γ x))`.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub forward_equivariance: S,
    /// `max_λ max_x d_Y(λ(f x), f(ψ(λ) x))`.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub backward_equivariance: S,
}

impl<S: Scalar> TripleDefects<S> {
    pub fn order(&self) -> S {
        max2(
            self.map.order(),
            max2(
                self.forward_equivariance.clone(),
                self.backward_equivariance.clone(),
            ),
        )
    }
}

fn check_triple<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    f: &[usize],
    theta: &[usize],
    psi: &[usize],
) -> Result<()> {
    check_map(src.points(), dst.points(), f, "f")?;
    check_map(src.order(), dst.order(), theta, "theta")?;
    check_map(dst.order(), src.order(), psi, "psi")
}

pub fn triple_defects<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    f: &[usize],
    theta: &[usize],
    psi: &[usize],
) -> Result<TripleDefects<S>> {
    check_triple(src, dst, f, theta, psi)?;
    let map = map_defects(src.space(), dst.space(), f)?;
    let forward = max_or_zero(
        (0..src.order()).map(|gamma| pairing_cost(src, dst, f, gamma, theta[gamma])),
    );
    let backward =
        max_or_zero((0..dst.order()).map(|lambda| pairing_cost(src, dst, f, psi[lambda], lambda)));
    Ok(TripleDefects {
        map,
        forward_equivariance: forward,
        backward_equivariance: backward,
    })
}

/// Minimal ε for which `(f, θ, ψ)` is an ε-equivariant approximation.
pub fn triple_order<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    f: &[usize],
    theta: &[usize],
    psi: &[usize],
) -> Result<S> {
    Ok(triple_defects(src, dst, f, theta, psi)?.order())
}

/// A triple of maps with its computed defects.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ApproxTriple<S> {
    pub f: Vec<usize>,
    pub theta: Vec<usize>,
    pub psi: Vec<usize>,
    pub defects: TripleDefects<S>,
}

impl<S: Scalar> ApproxTriple<S> {
    pub fn new(
        src: &GSpace<S>,
        dst: &GSpace<S>,
        f: Vec<usize>,
        theta: Vec<usize>,
        psi: Vec<usize>,
    ) -> Result<Self> {
        let defects = triple_defects(src, dst, &f, &theta, &psi)?;
        Ok(Self {
            f,
            theta,
            psi,
            defects,
        })
    }

    /// The identity triple of a G-space on itself.
    pub fn identity(space: &GSpace<S>) -> Self {
        Self::new(
            space,
            space,
            (0..space.points()).collect(),
            (0..space.order()).collect(),
            (0..space.order()).collect(),
        )
        .expect("identity maps are compatible")
    }

    pub fn order(&self) -> S {
        self.defects.order()
    }
}

/// One measured quantity against its proved ceiling.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct Check<S> {
    pub name: String,
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub measured: S,
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub ceiling: S,
    pub pass: bool,
}

impl<S: Scalar> Check<S> {
    pub fn new(name: &str, measured: S, ceiling: S) -> Self {
        let pass = measured.le_tol(&ceiling);
        Self {
            name: name.to_string(),
            measured,
            ceiling,
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct CertificateReport<S> {
    /// Order of the triple the ceilings are stated in.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub epsilon: S,
    pub checks: Vec<Check<S>>,
}

impl<S: Scalar> CertificateReport<S> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check<S>> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Result of inverting a triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct AlmostInverse<S> {
    /// `(f̃, ψ, θ)` from the target pair back to the source pair.
    pub triple: ApproxTriple<S>,
    /// `max_y d_Y(f(f̃ y), y)`.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub target_roundtrip: S,
    /// `max_x d_X(f̃(f x), x)`.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub source_roundtrip: S,
    pub report: CertificateReport<S>,
}

/// Builds `f̃(y) = argmin_x d_Y(f x, y)` (lowest index on ties) and swaps
/// the group maps.
///
/// The report certifies the inverse triple has order at most 4ε, that `f̃`
/// alone is a 3ε-isometry, and both round trips move points by at most 3ε.
pub fn almost_inverse<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    t: &ApproxTriple<S>,
) -> Result<AlmostInverse<S>> {
    check_triple(src, dst, &t.f, &t.theta, &t.psi)?;
    let y = dst.space();
    let x = src.space();
    let inverse: Vec<usize> = (0..y.len())
        .map(|p| {
            argmin(t.f.iter().map(|&fx| y.d(fx, p).clone()))
                .expect("source space is non-empty")
                .0
        })
        .collect();
    let triple = ApproxTriple::new(dst, src, inverse, t.psi.clone(), t.theta.clone())?;
    let target_roundtrip = max_or_zero((0..y.len()).map(|p| y.d(t.f[triple.f[p]], p).clone()));
    let source_roundtrip = max_or_zero((0..x.len()).map(|p| x.d(triple.f[t.f[p]], p).clone()));

    let eps = t.order();
    let report = CertificateReport {
        epsilon: eps.clone(),
        checks: vec![
            Check::new("inverse_triple_order", triple.order(), eps.times(4)),
            Check::new("inverse_map_order", triple.defects.map.order(), eps.times(3)),
            Check::new("target_roundtrip", target_roundtrip.clone(), eps.times(3)),
            Check::new("source_roundtrip", source_roundtrip.clone(), eps.times(3)),
        ],
    };
    Ok(AlmostInverse {
        triple,
        target_roundtrip,
        source_roundtrip,
        report,
    })
}

/// Defects of a group map `G_X → G_Y` under the two uniform metrics.
pub fn group_map_defects<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    theta: &[usize],
) -> Result<MapDefects<S>> {
    map_defects(src.group_metric(), dst.group_metric(), theta)
}

fn theta_checks<S: Scalar>(defects: &MapDefects<S>, eps: &S, covering: u32, distortion: u32) -> Vec<Check<S>> {
    vec![
        Check::new("theta_covering", defects.covering.clone(), eps.times(covering)),
        Check::new("theta_expansion", defects.expansion.clone(), eps.times(distortion)),
        Check::new("theta_contraction", defects.contraction.clone(), eps.times(distortion)),
    ]
}

/// Certifies θ as a GH approximation between the groups under their
/// uniform metrics: covering defect at most 4ε, expansion and contraction
/// at most 5ε.
pub fn theta_as_approximation<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    t: &ApproxTriple<S>,
) -> Result<CertificateReport<S>> {
    let defects = group_map_defects(src, dst, &t.theta)?;
    let eps = t.order();
    Ok(CertificateReport {
        checks: theta_checks(&defects, &eps, 4, 5),
        epsilon: eps,
    })
}

/// `max_g d_{G_Y}(θ(g), θ'(g))`.
pub fn group_map_distance<S: Scalar>(dst: &GSpace<S>, theta: &[usize], other: &[usize]) -> S {
    let metric = dst.group_metric();
    max_or_zero(theta.iter().zip(other).map(|(&a, &b)| metric.d(a, b).clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct PerturbedTheta<S> {
    pub triple: ApproxTriple<S>,
    /// Uniform distance between the original and the replacement θ.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub closeness: S,
    pub report: CertificateReport<S>,
}

/// Replaces θ by a map `θ'` that is ε-close to it and certifies that
/// `(f, θ', ψ)` has order at most 2ε and that `θ'` is a 10ε approximation
/// of the groups.
pub fn perturb_theta<S: Scalar>(
    src: &GSpace<S>,
    dst: &GSpace<S>,
    t: &ApproxTriple<S>,
    theta2: &[usize],
) -> Result<PerturbedTheta<S>> {
    check_map(src.order(), dst.order(), theta2, "theta2")?;
    let eps = t.order();
    let closeness = group_map_distance(dst, &t.theta, theta2);
    if !closeness.le_tol(&eps) {
        return Err(Error::Precondition {
            what: "replacement theta is not epsilon-close to theta".into(),
            measured: closeness.to_string(),
            allowed: eps.to_string(),
        });
    }
    let triple = ApproxTriple::new(src, dst, t.f.clone(), theta2.to_vec(), t.psi.clone())?;
    let defects = group_map_defects(src, dst, theta2)?;
    let mut checks = vec![Check::new("perturbed_triple_order", triple.order(), eps.times(2))];
    checks.extend(theta_checks(&defects, &eps, 10, 10));
    Ok(PerturbedTheta {
        triple,
        closeness,
        report: CertificateReport {
            epsilon: eps,
            checks,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ComposedTriple<S> {
    pub triple: ApproxTriple<S>,
    /// `ε1 + 2 ε2`.
    pub check: Check<S>,
}

/// `(f2 ∘ f1, θ2 ∘ θ1, ψ1 ∘ ψ2)` from `a` to `c` through `b`.
pub fn compose_triples<S: Scalar>(
    a: &GSpace<S>,
    b: &GSpace<S>,
    c: &GSpace<S>,
    first: &ApproxTriple<S>,
    second: &ApproxTriple<S>,
) -> Result<ComposedTriple<S>> {
    check_triple(a, b, &first.f, &first.theta, &first.psi)?;
    check_triple(b, c, &second.f, &second.theta, &second.psi)?;
    let f = first.f.iter().map(|&x| second.f[x]).collect();
    let theta = first.theta.iter().map(|&g| second.theta[g]).collect();
    let psi = second.psi.iter().map(|&g| first.psi[g]).collect();
    let triple = ApproxTriple::new(a, c, f, theta, psi)?;
    let bound = first.order() + second.order().times(2);
    Ok(ComposedTriple {
        check: Check::new("composition_order", triple.order(), bound),
        triple,
    })
}
