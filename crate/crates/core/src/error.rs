use thiserror::Error;

use crate::tree::EdgeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or mismatched input: unknown ids, wrong trees, bad arity.
    #[error("input error: {0}")]
    Input(String),

    /// A numeric argument outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant of a value failed; `invariant` names it.
    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant { invariant: &'static str, detail: String },

    /// An order-theoretic precondition (≤ or ≪) failed.
    #[error("order error{}: {detail}", index.map(|k| format!(" at index {k}")).unwrap_or_default())]
    Order { index: Option<usize>, detail: String },

    #[error("cannot decompose a function taking the value ∞")]
    UnsupportedDecomposition,

    #[error("evaluation outside the hereditary cone: {0}")]
    UnsupportedEvaluation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("infeasible discretization on edge {edge}: {detail}")]
    InfeasibleDiscretization { edge: EdgeId, detail: String },

    #[error("unrealizable profile{}: {detail}", edge.map(|e| format!(" on edge {e}")).unwrap_or_default())]
    UnrealizableProfile { edge: Option<EdgeId>, detail: String },

    #[error("compatibility error: {0}")]
    Compatibility(String),

    #[error("parse error at {location}: {detail}")]
    Parse { location: String, detail: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant { invariant, detail: detail.into() }
    }

    pub(crate) fn parse(location: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), detail: detail.into() }
    }
}
