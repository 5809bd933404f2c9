//! Analytic density families and their grid constructors.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DensityGrid;
use crate::{Error, Result};

/// Grid construction parameters: number of sample points and the truncation
/// radius in standard deviations beyond the family mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub points: usize,
    pub truncation_sigmas: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: 1 << 14,
            truncation_sigmas: 10.0,
        }
    }
}

/// One Gaussian component of a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// A density family with analytic moments, or a tabulated file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Gaussian { mean: f64, variance: f64 },
    Uniform { lower: f64, upper: f64 },
    Laplace { location: f64, scale: f64 },
    GaussMixture { components: Vec<MixtureComponent> },
    Tabulated { path: PathBuf },
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Gaussian { mean, variance } => write!(f, "gaussian({mean},{variance})"),
            FamilySpec::Uniform { lower, upper } => write!(f, "uniform({lower},{upper})"),
            FamilySpec::Laplace { location, scale } => write!(f, "laplace({location},{scale})"),
            FamilySpec::GaussMixture { components } => {
                write!(f, "mix(")?;
                for (i, c) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}:gaussian({},{})", c.weight, c.mean, c.variance)?;
                }
                write!(f, ")")
            }
            FamilySpec::Tabulated { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::Gaussian { mean, variance } => {
                require_finite(*mean, "gaussian mean")?;
                if !(*variance > 0.0) || !variance.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian variance must be positive, got {variance}"
                    )));
                }
            }
            FamilySpec::Uniform { lower, upper } => {
                require_finite(*lower, "uniform lower bound")?;
                require_finite(*upper, "uniform upper bound")?;
                if upper <= lower {
                    return Err(Error::InvalidParameter(format!(
                        "uniform requires lower < upper, got ({lower},{upper})"
                    )));
                }
            }
            FamilySpec::Laplace { location, scale } => {
                require_finite(*location, "laplace location")?;
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "laplace scale must be positive, got {scale}"
                    )));
                }
            }
            FamilySpec::GaussMixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidParameter("mixture needs at least one component".into()));
                }
                let mut total = 0.0;
                for c in components {
                    require_finite(c.mean, "mixture component mean")?;
                    if !(c.weight > 0.0) || !c.weight.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "mixture weight must be positive, got {}",
                            c.weight
                        )));
                    }
                    if !(c.variance > 0.0) || !c.variance.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "mixture component variance must be positive, got {}",
                            c.variance
                        )));
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "mixture weights must sum to 1, got {total}"
                    )));
                }
            }
            FamilySpec::Tabulated { .. } => {}
        }
        Ok(())
    }

    /// Analytic mean; tabulated files have none until loaded.
    pub fn mean(&self) -> Option<f64> {
        match self {
            FamilySpec::Gaussian { mean, .. } => Some(*mean),
            FamilySpec::Uniform { lower, upper } => Some(0.5 * (lower + upper)),
            FamilySpec::Laplace { location, .. } => Some(*location),
            FamilySpec::GaussMixture { components } => {
                Some(components.iter().map(|c| c.weight * c.mean).sum())
            }
            FamilySpec::Tabulated { .. } => None,
        }
    }

    /// Analytic variance; tabulated files have none until loaded.
    pub fn variance(&self) -> Option<f64> {
        match self {
            FamilySpec::Gaussian { variance, .. } => Some(*variance),
            FamilySpec::Uniform { lower, upper } => Some((upper - lower).powi(2) / 12.0),
            FamilySpec::Laplace { scale, .. } => Some(2.0 * scale * scale),
            FamilySpec::GaussMixture { components } => {
                let m: f64 = components.iter().map(|c| c.weight * c.mean).sum();
                Some(
                    components
                        .iter()
                        .map(|c| c.weight * (c.variance + (c.mean - m).powi(2)))
                        .sum(),
                )
            }
            FamilySpec::Tabulated { .. } => None,
        }
    }

    /// Tabulates the family on a uniform grid. The truncation radius is
    /// recorded in the label; first two moments of the result match the
    /// analytic moments to better than 1e-6 at default resolution.
    pub fn to_grid(&self, config: &GridConfig) -> Result<DensityGrid> {
        self.validate()?;
        let n = config.points;
        let t = config.truncation_sigmas;
        match self {
            FamilySpec::Gaussian { mean, variance } => {
                let sd = variance.sqrt();
                let lo = mean - t * sd;
                let hi = mean + t * sd;
                let step = (hi - lo) / n as f64;
                let weights = midpoint_samples(lo, step, n, |x| gaussian_pdf(x, *mean, *variance));
                DensityGrid::new(lo + 0.5 * step, step, weights, format!("{self}[r={t}σ,n={n}]"))
            }
            FamilySpec::Uniform { lower, upper } => {
                let step = (upper - lower) / n as f64;
                let height = 1.0 / (upper - lower);
                DensityGrid::new(
                    lower + 0.5 * step,
                    step,
                    vec![height; n],
                    format!("{self}[exact,n={n}]"),
                )
            }
            FamilySpec::Laplace { location, scale } => laplace_grid(*location, *scale, t, n),
            FamilySpec::GaussMixture { components } => {
                let lo = components
                    .iter()
                    .map(|c| c.mean - t * c.variance.sqrt())
                    .fold(f64::INFINITY, f64::min);
                let hi = components
                    .iter()
                    .map(|c| c.mean + t * c.variance.sqrt())
                    .fold(f64::NEG_INFINITY, f64::max);
                let step = (hi - lo) / n as f64;
                let weights = midpoint_samples(lo, step, n, |x| {
                    components
                        .iter()
                        .map(|c| c.weight * gaussian_pdf(x, c.mean, c.variance))
                        .sum()
                });
                DensityGrid::new(lo + 0.5 * step, step, weights, format!("{self}[r={t}σ,n={n}]"))
            }
            FamilySpec::Tabulated { path } => load_tabulated(path),
        }
    }
}

fn require_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be finite, got {v}")))
    }
}

fn gaussian_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = (x - mean) * (x - mean) / variance;
    (-0.5 * z).exp() / (2.0 * PI * variance).sqrt()
}

fn midpoint_samples(lo: f64, step: f64, n: usize, pdf: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..n).map(|i| pdf(lo + (i as f64 + 0.5) * step)).collect()
}

/// Laplace grids put the cusp on a sample point and correct that sample for
/// the O(h²) mass excess of the rectangle rule across the kink, so the grid
/// moments track the analytic ones to O(h⁴). The truncation radius extends
/// past the configured sigma multiple until the analytic tail second moment
/// is below 1e-9 of the variance.
fn laplace_grid(location: f64, scale: f64, truncation_sigmas: f64, n: usize) -> Result<DensityGrid> {
    let mut t = (truncation_sigmas * std::f64::consts::SQRT_2).max(10.0);
    while (t * t + 2.0 * t + 2.0) * (-t).exp() > 2e-9 {
        t += 0.5;
    }
    let radius = t * scale;
    let half = n / 2;
    let step = radius / half as f64;
    let mut weights: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let x = (i as f64 - half as f64) * step;
            (-x.abs() / scale).exp() / (2.0 * scale)
        })
        .collect();
    weights[half] -= step / (12.0 * scale * scale);
    DensityGrid::new(
        location - radius,
        step,
        weights,
        format!("laplace({location},{scale})[r={t}b,n={}]", 2 * half + 1),
    )
}

/// Loads a tabulated density from a CSV file with header `x,f`, strictly
/// increasing equally spaced x, and non-negative f. The pre-normalization
/// mass is recorded in the label.
fn load_tabulated(path: &Path) -> Result<DensityGrid> {
    let file_err = |message: String| Error::TabulatedFile {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| file_err(format!("cannot read: {e}")))?;
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| file_err("empty file".into()))?
        .1
        .trim();
    if header != "x,f" {
        return Err(file_err(format!("expected header `x,f`, got `{header}`")));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut fs: Vec<f64> = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (xs_str, fs_str) = line
            .split_once(',')
            .ok_or_else(|| file_err(format!("line {}: expected `x,f`", lineno + 1)))?;
        let x: f64 = xs_str
            .trim()
            .parse()
            .map_err(|_| file_err(format!("line {}: bad x `{xs_str}`", lineno + 1)))?;
        let f: f64 = fs_str
            .trim()
            .parse()
            .map_err(|_| file_err(format!("line {}: bad f `{fs_str}`", lineno + 1)))?;
        if !x.is_finite() || !f.is_finite() {
            return Err(file_err(format!("line {}: non-finite value", lineno + 1)));
        }
        if f < 0.0 {
            return Err(file_err(format!("line {}: negative density {f}", lineno + 1)));
        }
        if let Some(&prev) = xs.last() {
            if x <= prev {
                return Err(file_err(format!("line {}: x not strictly increasing", lineno + 1)));
            }
        }
        xs.push(x);
        fs.push(f);
    }
    if xs.len() < 2 {
        return Err(file_err("need at least two rows".into()));
    }
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    for pair in xs.windows(2) {
        let d = pair[1] - pair[0];
        if (d - step).abs() > 1e-9 * step {
            return Err(file_err(format!(
                "non-uniform spacing: {d} vs mean step {step}"
            )));
        }
    }
    let mass: f64 = fs.iter().sum::<f64>() * step;
    DensityGrid::new(
        xs[0],
        step,
        fs,
        format!("file:{}[mass={mass:.12e}]", path.display()),
    )
}
