//! One error type for the whole crate. Variants carry the short machine
//! codes that the CLI exposes in its error JSON.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Supremum of an empty set requested.
    #[error("empty supremum")]
    EmptySupremum,

    /// A well-founded object was required but the input is not.
    #[error("not well-founded: {0}")]
    NotWellFounded(String),

    /// An infinite branch was required but none exists.
    #[error("no infinite branch")]
    NoInfiniteBranch,

    /// The convergence decision procedure does not cover this presentation.
    #[error("undecidable presentation: {0}")]
    UndecidablePresentation(String),

    /// Finite instantiation cannot separate the declared points.
    #[error("precision: {0}")]
    Precision(String),

    /// Truncation caps are too small for the requested object.
    #[error("caps: {0}")]
    Caps(String),

    /// A rank target is not representable by the presentation grammar.
    #[error("not representable: {0}")]
    NotRepresentable(String),

    /// Structurally invalid input (failed a type invariant).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A supplied coding is not injective where it must be.
    #[error("not injective: {0}")]
    NotInjective(String),

    /// A point lies outside the set it was required to belong to.
    #[error("point outside set: {0}")]
    OutsideSet(String),
}

impl Error {
    /// Stable short code for machine-readable output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySupremum => "empty-supremum",
            Error::NotWellFounded(_) => "not-well-founded",
            Error::NoInfiniteBranch => "no-infinite-branch",
            Error::UndecidablePresentation(_) => "undecidable-presentation",
            Error::Precision(_) => "precision",
            Error::Caps(_) => "caps",
            Error::NotRepresentable(_) => "not-representable",
            Error::InvalidInput(_) => "invalid-input",
            Error::NotInjective(_) => "not-injective",
            Error::OutsideSet(_) => "outside-set",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
