use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input exceeds a hard size cap (subset tables, enumeration universes).
    #[error("size error: {what} is {got}, limit is {limit}")]
    Size {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    /// The input set is not closed under gcd.
    #[error("not gcd-closed: missing {}", join(.missing))]
    NotGcdClosed { missing: Vec<String> },

    /// A generator gave up after its retry budget.
    #[error("generation error: {0}")]
    Generation(String),

    /// A computed quantity contradicts the divisibility theorem or one of
    /// its supporting identities. Either a bug or a counterexample; the bundle carries
    /// everything needed to reproduce it.
    #[error("theorem violation: {}", .0.message)]
    TheoremViolation(Box<ReproBundle>),
}

fn join(items: &[String]) -> String {
    items.join(", ")
}

/// Self-contained reproduction data for a theorem violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproBundle {
    pub message: String,
    pub set: Vec<String>,
    pub exponent: String,
    /// Offending entry or witness, free-form (`"g(2,4) = 3/4"`, ...).
    pub detail: String,
    /// Exact quotient `[S^e](S^e)^{-1}`, row-major, when it was computed.
    pub quotient: Option<Vec<Vec<String>>>,
}

impl ReproBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn is_theorem_violation(&self) -> bool {
        matches!(self, Error::TheoremViolation(_))
    }
}
