use thiserror::Error;

use crate::space::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Table shape does not match the declared point set.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("not a metric space: {} axiom violation(s), first: {}", .0.len(), .0[0])]
    InvalidSpace(Vec<Violation>),

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("element {element} is not an isometry: d({i},{j}) is not preserved")]
    NotIsometric { element: usize, i: usize, j: usize },

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("precondition violated: {what} (measured {measured}, allowed {allowed})")]
    Precondition {
        what: String,
        measured: String,
        allowed: String,
    },

    #[error("map does not respect the group tables: image of {g}*{h} differs from the product of images")]
    NotHomomorphism { g: usize, h: usize },

    #[error("map between groups is not a bijection: {0}")]
    NotBijective(String),

    #[error("weighted average undefined for element {element}: no net point within the bump cutoff")]
    EmptyDenominator { element: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
