//! PageRank Nibble community recovery on the sparse two-community directed
//! stochastic block model.
//!
//! The crate bundles five pieces that cross-validate each other:
//!
//! * [`sbm`] — reproducible generation of two-community directed SBMs with a
//!   designated seed set, plus a plain-text persistence format;
//! * [`pagerank`] — scale-free personalized PageRank by damped power
//!   iteration;
//! * [`nibble`] — threshold classification of vertices into community 1 and
//!   its scoring;
//! * [`theory`] — closed forms for the limiting per-community PageRank means
//!   and variances, Chebyshev misclassification bounds, the optimal threshold
//!   and the optimal damping factor;
//! * [`gw`] — Monte Carlo sampling of the limiting PageRank laws from their
//!   distributional fixed-point equations, with [`dist`] providing the
//!   empirical-distribution utilities used for convergence checks.
//!
//! [`experiment`] wires these into seeded, replicated experiment pipelines
//! with CSV/JSON reports.

pub mod dist;
pub mod experiment;
pub mod gw;
pub mod nibble;
pub mod pagerank;
pub mod params;
pub mod report;
pub mod rng;
pub mod sbm;
pub mod theory;

pub use params::ModelParams;
pub use sbm::DsbmGraph;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("sampling budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid_params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
