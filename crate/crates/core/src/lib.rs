//! Equivariant Gromov–Hausdorff approximations between finite metric
//! spaces carrying finite isometry groups.

pub mod error;
pub mod fixtures;
pub mod group;
pub mod io;
pub mod quotients;
pub mod scalar;
pub mod scenario;
pub mod smoothing;
pub mod solver;
pub mod space;
pub mod triples;

pub use error::{Error, Result};
pub use group::{isometry_group, subgroup_closure, uniform_metric, GSpace, IsometryGroup, UniformMetric};
pub use scalar::Scalar;
pub use space::{map_order, validate_table, FiniteMetricSpace, ValidationReport, Violation};
pub use triples::{ApproxTriple, CertificateReport, Check};
