//! Grid representation of one-dimensional densities and the entropy-type
//! functionals consumed by the inequality checks.
//!
//! A [`DensityGrid`] tabulates a compactly supported density on a uniform
//! grid; all functionals are rectangle-rule sums over the sample points, so
//! normalization and the moment algebra under convolution hold to floating
//! point accuracy, and only comparisons against continuous closed forms carry
//! discretization error.

mod family;
mod gaussian;
mod grid;

pub use family::{FamilySpec, GridConfig, MixtureComponent};
pub use gaussian::GaussianSpec;
pub use grid::{DensityGrid, FisherEstimate, MomentSummary, VarianceProfilePoint};

/// Variances below this floor are treated as degenerate for operations that
/// divide by, or take logarithms of, a variance.
pub const VARIANCE_FLOOR: f64 = 1e-12;
