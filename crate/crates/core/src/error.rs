use thiserror::Error;

use crate::rootsys::Root;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parabolic data (p={p}, q={q}, p1={p1}): {reason}")]
    InvalidParabolic { p: i64, q: i64, p1: i64, reason: String },

    /// A computed object disagrees with an independent oracle.
    #[error("internal consistency check `{invariant}` failed: {detail}")]
    Consistency { invariant: &'static str, detail: String },

    #[error("no fiber roots: Δ(l∩p) is empty")]
    NoFiberRoots,

    #[error("root {alpha} has {count} matches in the orthogonal sequence")]
    UniquenessViolation { alpha: Root, count: usize },

    #[error("invalid linear form: {0}")]
    InvalidForm(String),

    #[error("unsupported linear form: {0}")]
    UnsupportedForm(String),

    #[error("hypothesis (H) fails: rank A = {rank}, expected {expected}")]
    HypothesisFailed { rank: usize, expected: usize },

    #[error("exterior degree {degree} out of range 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("eigenvector recursion collapsed to zero at root {0}")]
    ZeroVectorCollapse(Root),

    #[error("representation of the Laplacian does not split as Hermite + M: {0}")]
    DecompositionMismatch(String),
}

impl Error {
    pub fn consistency(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Consistency { invariant, detail: detail.into() }
    }

    /// Name of the failing invariant for consistency errors.
    pub fn invariant(&self) -> Option<&'static str> {
        match self {
            Error::Consistency { invariant, .. } => Some(invariant),
            Error::UniquenessViolation { .. } => Some("orthogonal-sequence-uniqueness"),
            Error::DecompositionMismatch(_) => Some("rep-laplacian-decomposition"),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
