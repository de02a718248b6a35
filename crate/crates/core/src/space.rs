//! Finite metric spaces and their validation.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{max_or_zero, Scalar};

/// A violated metric axiom, with the indices that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    NonFinite { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    NonPositive { i: usize, j: usize },
    /// `dist[i][k] > dist[i][via] + dist[via][k]`.
    Triangle { i: usize, k: usize, via: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { i, j } => write!(f, "d({i},{j}) is not finite"),
            Violation::NonzeroDiagonal { i } => write!(f, "d({i},{i}) != 0"),
            Violation::Asymmetric { i, j } => write!(f, "d({i},{j}) != d({j},{i})"),
            Violation::NonPositive { i, j } => write!(f, "d({i},{j}) <= 0 for distinct points"),
            Violation::Triangle { i, k, via } => {
                write!(f, "triangle inequality fails at ({i},{k},{via})")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks every metric axiom on a raw table.
///
/// Shape problems are returned as [`Error::Structural`]; axiom failures
/// are listed in the report, every ordered witness included.
pub fn validate_table<S: Scalar>(labels: &[String], dist: &[Vec<S>]) -> Result<ValidationReport> {
    let n = labels.len();
    if n == 0 {
        return Err(Error::Structural("space has no points".into()));
    }
    if dist.len() != n {
        return Err(Error::Structural(format!(
            "{} labels but {} table rows",
            n,
            dist.len()
        )));
    }
    if let Some((r, row)) = dist.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(Error::Structural(format!(
            "row {r} has {} entries, expected {n}",
            row.len()
        )));
    }

    let mut violations = Vec::new();
    let finite = |v: &S| v.to_f64_lossy().is_finite();
    for i in 0..n {
        for j in 0..n {
            if !finite(&dist[i][j]) {
                violations.push(Violation::NonFinite { i, j });
            }
        }
    }
    if !violations.is_empty() {
        return Ok(ValidationReport {
            valid: false,
            violations,
        });
    }
    for i in 0..n {
        if !dist[i][i].approx_eq(&S::zero()) {
            violations.push(Violation::NonzeroDiagonal { i });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            if i < j && !dist[i][j].approx_eq(&dist[j][i]) {
                violations.push(Violation::Asymmetric { i, j });
            }
            if dist[i][j] <= S::zero() {
                violations.push(Violation::NonPositive { i, j });
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            for via in 0..n {
                if via == i || via == k {
                    continue;
                }
                let detour = dist[i][via].clone() + dist[via][k].clone();
                if !dist[i][k].le_tol(&detour) {
                    violations.push(Violation::Triangle { i, k, via });
                }
            }
        }
    }
    Ok(ValidationReport {
        valid: violations.is_empty(),
        violations,
    })
}

/// A finite metric space: labelled points with a validated distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace<S = f64> {
    labels: Vec<String>,
    dist: Vec<Vec<S>>,
}

impl<S: Scalar> FiniteMetricSpace<S> {
    /// Validates the table and builds the space.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<S>>) -> Result<Self> {
        let report = validate_table(&labels, &dist)?;
        if !report.valid {
            return Err(Error::InvalidSpace(report.violations));
        }
        Ok(Self { labels, dist })
    }

    /// Points labelled `0..n`.
    pub fn from_table(dist: Vec<Vec<S>>) -> Result<Self> {
        let labels = (0..dist.len()).map(|i| i.to_string()).collect();
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<S>] {
        &self.dist
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> &S {
        &self.dist[i][j]
    }

    /// Re-runs the axiom checks.
    pub fn validate(&self) -> ValidationReport {
        validate_table(&self.labels, &self.dist).expect("shape checked at construction")
    }

    /// Largest distance from `i`.
    pub fn eccentricity(&self, i: usize) -> S {
        max_or_zero(self.dist[i].iter().cloned())
    }

    pub fn diameter(&self) -> S {
        max_or_zero((0..self.len()).map(|i| self.eccentricity(i)))
    }

    /// Same space with every distance multiplied by `factor > 0`.
    pub fn scaled(&self, factor: &S) -> Result<Self> {
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|v| v.clone() * factor.clone()).collect())
            .collect();
        Self::new(self.labels.clone(), dist)
    }
}

/// Defects of a map between finite metric spaces.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct MapDefects<S> {
    /// `max (d_Y(fx, fx') - d_X(x, x'))`, never negative.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub expansion: S,
    /// `max (d_X(x, x') - d_Y(fx, fx'))`, never negative.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub contraction: S,
    /// `max_y min_x d_Y(fx, y)`.
    #[serde(serialize_with = "crate::scalar::serialize")]
    pub covering: S,
}

impl<S: Scalar> MapDefects<S> {
    /// `max |d_Y(fx, fx') - d_X(x, x')|`.
    pub fn distortion(&self) -> S {
        crate::scalar::max2(self.expansion.clone(), self.contraction.clone())
    }

    /// Least ε for which the map is an ε-isometry.
    pub fn order(&self) -> S {
        crate::scalar::max2(self.distortion(), self.covering.clone())
    }
}

pub(crate) fn check_map(domain: usize, codomain: usize, map: &[usize], what: &str) -> Result<()> {
    if map.len() != domain {
        return Err(Error::Incompatible(format!(
            "{what} has {} entries, domain has {domain}",
            map.len()
        )));
    }
    if let Some((x, &y)) = map.iter().enumerate().find(|(_, &y)| y >= codomain) {
        return Err(Error::Incompatible(format!(
            "{what} sends {x} to {y}, codomain has {codomain} points"
        )));
    }
    Ok(())
}

/// Distortion split into expansion and contraction, and the covering radius
/// of the image.
pub fn map_defects<S: Scalar>(
    src: &FiniteMetricSpace<S>,
    dst: &FiniteMetricSpace<S>,
    map: &[usize],
) -> Result<MapDefects<S>> {
    check_map(src.len(), dst.len(), map, "map")?;
    let mut expansion = S::zero();
    let mut contraction = S::zero();
    for a in 0..src.len() {
        for b in (a + 1)..src.len() {
            let diff = dst.d(map[a], map[b]).clone() - src.d(a, b).clone();
            if diff > expansion {
                expansion = diff.clone();
            }
            let neg = -diff;
            if neg > contraction {
                contraction = neg;
            }
        }
    }
    Ok(MapDefects {
        expansion,
        contraction,
        covering: covering_radius(dst, map),
    })
}

/// `max_y min_x d(f x, y)` over an image given by `map`.
pub fn covering_radius<S: Scalar>(dst: &FiniteMetricSpace<S>, map: &[usize]) -> S {
    max_or_zero((0..dst.len()).map(|y| {
        crate::scalar::argmin(map.iter().map(|&fx| dst.d(fx, y).clone()))
            .map(|(_, v)| v)
            .unwrap_or_else(S::zero)
    }))
}

/// Returns `(distortion, covering)`.
pub fn map_order<S: Scalar>(
    src: &FiniteMetricSpace<S>,
    dst: &FiniteMetricSpace<S>,
    map: &[usize],
) -> Result<(S, S)> {
    let defects = map_defects(src, dst, map)?;
    Ok((defects.distortion(), defects.covering))
}
