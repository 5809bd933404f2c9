//! # entropica
//!
//! A numerical laboratory for differential-entropy functionals of 1-D densities
//! on uniform grids, and for the entropy-comparison and channel-robustness
//! inequalities they feed:
//!
//! - grid densities with entropy, entropy power, Fisher information, variance
//!   profile, relative entropy from Gaussianity, and a Lévy-distance proxy for
//!   weak convergence ([`density`]);
//! - the entropic doubling constant and inequality checks: EPI, submodularity
//!   of entropy of sums, fractional superadditivity of entropy power, the
//!   golden-ratio and sharp large-doubling comparison bounds ([`inequality`]);
//! - power-constrained capacity of discretized additive-noise channels via
//!   Lagrangian Blahut–Arimoto, with the Gaussian-codebook robustness bounds
//!   (worst-case-noise, half-bit additive, snr/(3snr+2) multiplicative)
//!   ([`capacity`]);
//! - two-user additive-noise MAC rate computations and the fractional
//!   inner-bound checks ([`mac`]);
//! - matrix-level MIMO robustness factors and additive-loss comparisons
//!   ([`mimo`]).
//!
//! All entropies are in nats; bit conversions happen only at reporting
//! boundaries. Every check is emitted as a [`report::GapReport`] with an
//! explicit lhs/rhs/slack/tolerance so a run can be archived and re-audited.
//!
//! The `entropica` binary exposes the whole battery as subcommands; see the
//! [`cli`] module or `entropica --help`.

pub mod capacity;
pub mod cli;
pub mod config;
pub mod density;
pub mod inequality;
pub mod mac;
pub mod mimo;
pub mod report;

use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density grid: {0}")]
    InvalidGrid(String),

    #[error("unknown density family `{0}`")]
    UnknownFamily(String),

    #[error("invalid family parameter: {0}")]
    InvalidParameter(String),

    #[error("density spec syntax error at position {position}: {message}")]
    SpecSyntax { position: usize, message: String },

    #[error("tabulated density file `{path}`: {message}")]
    TabulatedFile { path: String, message: String },

    #[error("grid step mismatch ({0} vs {1}) beyond resampling tolerance")]
    StepMismatch(f64, f64),

    #[error("degenerate variance {0} below floor {1}")]
    DegenerateVariance(f64, f64),

    #[error("scale factor must be nonzero")]
    ZeroScale,

    #[error("subset size k={k} out of range for n={n} summands")]
    SubsetSize { k: usize, n: usize },

    #[error("{0} summands exceed the configured subset budget of {1}")]
    TooManySummands(usize, usize),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("power constraint violated: input second moment {used} exceeds budget {budget}")]
    PowerViolated { used: f64, budget: f64 },

    #[error("invalid MAC triplet: {0}")]
    InvalidTriplet(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("manifest serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
