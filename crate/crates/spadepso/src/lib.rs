//! Heterogeneous particle-swarm optimisation steered by a "surprisingly
//! popular" group-decision rule over an adaptive knowledge-transfer topology.
//!
//! The swarm is split into an exploration sub-population that learns from
//! comprehensive-learning exemplars, and an exploitation sub-population that is
//! additionally attracted to a *surprisingly popular* particle: each particle
//! votes for the best particle it can see through a sparse decision graph, and
//! the winner is the candidate whose actual vote share most exceeds the share
//! the graph structure predicts. The decision arithmetic is exact (arbitrary
//! precision rationals), so selections are reproducible bit-for-bit.
//!
//! Module map:
//! - [`swarm`]: bounds, objectives, particles, seeded RNG streams;
//! - [`topology`]: distance-based kNN graphs, stochastic expert graphs,
//!   persistent learned edges, and the per-iteration union that feeds voting;
//! - [`spa`]: the surprisingly-popular decision pipeline plus a naive
//!   reference implementation used as a cross-check oracle;
//! - [`exemplar`]: comprehensive-learning exemplar construction and refresh;
//! - [`optimizer`]: the spade optimizer and the PSO / CLPSO baselines;
//! - [`problems`]: shifted/rotated benchmark suite, radar polyphase-code
//!   design, and HIV ODE structure + parameter inference;
//! - [`stats`]: swarm diversity, error aggregates, Wilcoxon signed-rank and
//!   Friedman rank analyses;
//! - [`harness`]: experiment configuration, deterministic reports, and report
//!   comparison.

pub mod exemplar;
pub mod harness;
pub mod optimizer;
pub mod problems;
pub mod spa;
pub mod stats;
pub mod swarm;
pub mod topology;

use thiserror::Error;

/// Crate-wide error type. Everything fallible returns [`Result`].
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition (sizes, ranges, emptiness).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An experiment or optimizer configuration is unusable.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An objective produced NaN or infinity; optimizers refuse to continue.
    #[error("objective `{objective}` returned a non-finite fitness ({value})")]
    NonFiniteFitness { objective: String, value: f64 },

    /// A voter row of the decision graph has no outgoing edges.
    #[error("particle {voter} has no neighbours in the decision graph")]
    IsolatedVoter { voter: usize },

    /// A problem id was not recognised by the registry.
    #[error("unknown problem id `{id}` (valid: {valid})")]
    UnknownProblem { id: String, valid: String },

    /// Two reports cannot be compared because they cover different entries.
    #[error("reports cover different problem sets: {0}")]
    ReportMismatch(String),

    /// A config file, report file, or data file could not be parsed.
    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    /// An I/O failure, annotated with the path involved.
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wraps an [`std::io::Error`] with the path that triggered it.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that indicate user (usage) mistakes rather than
    /// runtime failures; the CLI maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::InvalidConfig(_)
                | Error::UnknownProblem { .. }
                | Error::ReportMismatch(_)
                | Error::Parse { .. }
        )
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
