//! Uniform-grid densities and their functionals.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{GaussianSpec, VARIANCE_FLOOR};
use crate::{Error, Result};

/// Relative step mismatch tolerated by `convolve` before requiring an
/// explicit resample.
const STEP_TOLERANCE: f64 = 1e-9;

/// Weights below this fraction of the maximum are excluded from the Fisher
/// information sum; the entropy sum applies no floor since its integrand is
/// continuous at zero.
const FISHER_FLOOR_FRACTION: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// A compactly supported 1-D probability density tabulated on a uniform grid.
///
/// Sample points sit at `origin + i * step`; the represented measure is the
/// rectangle-rule measure `step * weights[i]` at each point, normalized to
/// total mass 1 at construction. Instances are immutable; every operation
/// returns a new grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    origin: f64,
    step: f64,
    weights: Vec<f64>,
    label: String,
}

/// First and second moments of a grid density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub second_moment: f64,
}

/// One point of the variance profile ψ(R) = E[X²; |X| > R].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfilePoint {
    pub radius: f64,
    pub tail_mass: f64,
}

/// Central-difference Fisher information estimate. Points with density below
/// the floor are excluded; `excluded_mass` reports how much probability mass
/// those points carried.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherEstimate {
    pub value: f64,
    pub excluded_mass: f64,
}

impl DensityGrid {
    /// Builds a grid from raw samples, enforcing normalization.
    ///
    /// Negative weights larger than round-off are rejected; round-off
    /// negatives are clamped to zero.
    pub fn new(origin: f64, step: f64, weights: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "origin and step must be finite with step > 0, got ({origin}, {step})"
            )));
        }
        if weights.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least two grid points, got {}",
                weights.len()
            )));
        }
        let mut weights = weights;
        let max_w = weights.iter().cloned().fold(0.0, f64::max);
        if !max_w.is_finite() || max_w <= 0.0 {
            return Err(Error::InvalidGrid("weights must be finite with positive total mass".into()));
        }
        for w in weights.iter_mut() {
            if !w.is_finite() {
                return Err(Error::InvalidGrid("weights must be finite".into()));
            }
            if *w < 0.0 {
                if *w < -1e-12 * max_w {
                    return Err(Error::InvalidGrid(format!("negative weight {w}")));
                }
                *w = 0.0;
            }
        }
        let mass: f64 = weights.iter().sum::<f64>() * step;
        for w in weights.iter_mut() {
            *w /= mass;
        }
        Ok(DensityGrid {
            origin,
            step,
            weights,
            label: label.into(),
        })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Coordinate of the `i`-th sample point.
    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    /// Rightmost sample point.
    pub fn x_max(&self) -> f64 {
        self.x(self.weights.len() - 1)
    }

    /// Total rectangle-rule mass; 1 up to round-off by construction.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.step
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| self.x(i) * w)
            .sum::<f64>()
            * self.step
    }

    /// Variance about the mean, computed in a second pass for stability.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let d = self.x(i) - m;
                d * d * w
            })
            .sum::<f64>()
            * self.step
    }

    pub fn moments(&self) -> MomentSummary {
        let mean = self.mean();
        let variance = self.variance();
        MomentSummary {
            mean,
            variance,
            second_moment: variance + mean * mean,
        }
    }

    /// Differential entropy in nats, with 0·log 0 := 0. No density floor is
    /// applied: the entropy integrand is continuous at zero.
    pub fn entropy(&self) -> f64 {
        let sum: f64 = self
            .weights
            .iter()
            .map(|&w| if w > 0.0 { w * w.ln() } else { 0.0 })
            .sum();
        -sum * self.step
    }

    /// Entropy power exp(2 h) for dimension one.
    pub fn entropy_power(&self) -> f64 {
        (2.0 * self.entropy()).exp()
    }

    /// Gaussian with the same mean and variance.
    pub fn matched_gaussian(&self) -> Result<GaussianSpec> {
        let v = self.variance();
        if v < VARIANCE_FLOOR {
            return Err(Error::DegenerateVariance(v, VARIANCE_FLOOR));
        }
        GaussianSpec::new(self.mean(), v)
    }

    /// Relative entropy from Gaussianity D(f) = h(g) - h(f), with g the
    /// moment-matched Gaussian. Non-negative up to discretization error.
    pub fn relative_entropy_to_gaussianity(&self) -> Result<f64> {
        Ok(self.matched_gaussian()?.entropy() - self.entropy())
    }

    /// Tail second moment ψ(R) = Σ_{|x|>R} x² f(x) step.
    pub fn variance_profile(&self, radius: f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| self.x(*i).abs() > radius)
            .map(|(i, w)| {
                let x = self.x(i);
                x * x * w
            })
            .sum::<f64>()
            * self.step
    }

    /// Variance profile evaluated on a set of radii.
    pub fn variance_profile_curve(&self, radii: &[f64]) -> Vec<VarianceProfilePoint> {
        radii
            .iter()
            .map(|&radius| VarianceProfilePoint {
                radius,
                tail_mass: self.variance_profile(radius),
            })
            .collect()
    }

    /// Central-difference estimate of the Fisher information ∫ (f'/f)² f.
    pub fn fisher_information(&self) -> FisherEstimate {
        let max_w = self.weights.iter().cloned().fold(0.0, f64::max);
        let floor = FISHER_FLOOR_FRACTION * max_w;
        let mut value = 0.0;
        let mut included_mass = 0.0;
        for i in 1..self.weights.len() - 1 {
            let w = self.weights[i];
            if w < floor {
                continue;
            }
            let d = (self.weights[i + 1] - self.weights[i - 1]) / (2.0 * self.step);
            value += d * d / w;
            included_mass += w;
        }
        FisherEstimate {
            value: value * self.step,
            excluded_mass: (1.0 - included_mass * self.step).max(0.0),
        }
    }

    /// Density of cX for c ≠ 0. Entropy shifts by log|c| exactly in the
    /// rectangle-rule arithmetic.
    pub fn scale(&self, c: f64) -> Result<DensityGrid> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::ZeroScale);
        }
        let a = c.abs();
        let (origin, weights): (f64, Vec<f64>) = if c > 0.0 {
            (c * self.origin, self.weights.iter().map(|w| w / a).collect())
        } else {
            (c * self.x_max(), self.weights.iter().rev().map(|w| w / a).collect())
        };
        DensityGrid::new(origin, a * self.step, weights, format!("scale({},{c})", self.label))
    }

    /// Translates the grid so the mean is zero. Exact: only the origin moves.
    pub fn centered(&self) -> DensityGrid {
        let m = self.mean();
        DensityGrid {
            origin: self.origin - m,
            step: self.step,
            weights: self.weights.clone(),
            label: format!("centered({})", self.label),
        }
    }

    /// Linear interpolation of the density at an arbitrary point.
    pub fn value_at(&self, x: f64) -> f64 {
        let t = (x - self.origin) / self.step;
        if t < 0.0 || t > (self.weights.len() - 1) as f64 {
            return 0.0;
        }
        let i = (t.floor() as usize).min(self.weights.len() - 2);
        let frac = t - i as f64;
        self.weights[i] * (1.0 - frac) + self.weights[i + 1] * frac
    }

    /// CDF at an arbitrary point, treating each sample as mass spread over
    /// its cell; piecewise linear, 0 left of the support, 1 right of it.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let cum = self.cumulative();
        cdf_interp(self.origin, self.step, &cum, x)
    }

    /// CDF values at the sample points (mass of the half-open cells up to and
    /// including half of the cell at each point).
    fn cumulative(&self) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for &w in &self.weights {
            cum.push((acc + 0.5 * w) * self.step);
            acc += w;
        }
        cum
    }

    /// Resamples onto a new step by linear interpolation, then renormalizes.
    pub fn resample(&self, new_step: f64) -> Result<DensityGrid> {
        if !(new_step > 0.0) || !new_step.is_finite() {
            return Err(Error::InvalidGrid(format!("resample step must be positive, got {new_step}")));
        }
        let span = self.x_max() - self.origin;
        let n = (span / new_step).floor() as usize + 1;
        if n < 2 {
            return Err(Error::InvalidGrid(
                "resample step too coarse for the grid span".into(),
            ));
        }
        let weights = (0..n)
            .map(|k| self.value_at(self.origin + k as f64 * new_step))
            .collect();
        DensityGrid::new(self.origin, new_step, weights, format!("resample({})", self.label))
    }

    /// Convolution of two independent grid densities via FFT. Requires equal
    /// steps (resample first if they differ); the output support is the
    /// Minkowski sum of the input supports.
    pub fn convolve(&self, other: &DensityGrid) -> Result<DensityGrid> {
        let rel = (self.step - other.step).abs() / self.step.max(other.step);
        if rel > STEP_TOLERANCE {
            return Err(Error::StepMismatch(self.step, other.step));
        }
        let conv = fft_linear_convolution(&self.weights, &other.weights);
        let weights: Vec<f64> = conv.into_iter().map(|v| (v * self.step).max(0.0)).collect();
        DensityGrid::new(
            self.origin + other.origin,
            self.step,
            weights,
            format!("conv({},{})", self.label, other.label),
        )
    }

    /// Convolution with an exact Gaussian: the analytic kernel is sampled on
    /// this grid's step (rather than convolving two pre-discretized grids),
    /// which removes one layer of truncation error.
    pub fn convolve_gaussian(&self, gauss: &GaussianSpec, kernel_sigmas: f64) -> Result<DensityGrid> {
        let radius = kernel_sigmas * gauss.std_dev();
        let m = ((2.0 * radius / self.step).ceil() as usize).max(9);
        let kernel_origin = gauss.mean() - radius + 0.5 * self.step;
        let kernel: Vec<f64> = (0..m)
            .map(|j| gauss.pdf(kernel_origin + j as f64 * self.step))
            .collect();
        let kernel_grid = DensityGrid::new(
            kernel_origin,
            self.step,
            kernel,
            format!("kernel_n({},{})", gauss.mean(), gauss.variance()),
        )?;
        self.convolve(&kernel_grid)
    }

    /// Lévy distance between this grid's CDF and the CDF of its matched
    /// Gaussian. A computable 1-D surrogate for the Lévy–Prokhorov metric;
    /// both metrize weak convergence on the line.
    pub fn levy_distance_to_gaussian(&self) -> Result<(f64, GaussianSpec)> {
        let matched = self.matched_gaussian()?;
        let sd = matched.std_dev();
        let lo = self.origin.min(matched.mean() - 12.0 * sd);
        let hi = self.x_max().max(matched.mean() + 12.0 * sd);
        // Sample both CDFs on a uniform net no finer than ~2^19 points.
        let mut step = self.step;
        while (hi - lo) / step > (1 << 19) as f64 {
            step *= 2.0;
        }
        let n = ((hi - lo) / step).ceil() as usize + 1;
        let cum = self.cumulative();
        let f: Vec<f64> = (0..n)
            .map(|k| cdf_interp(self.origin, self.step, &cum, lo + k as f64 * step))
            .collect();
        let g: Vec<f64> = (0..n).map(|k| matched.cdf(lo + k as f64 * step)).collect();

        // Band condition: G(x) <= F(x+eps)+eps and F(x) <= G(x+eps)+eps for
        // all x. Checked on the net with linear interpolation of the shifts.
        let band_ok = |eps: f64| -> bool {
            let shift = eps / step;
            let base = shift.floor();
            let frac = shift - base;
            let base = base as usize;
            let sample = |arr: &[f64], i: usize| -> f64 {
                let j = i + base;
                if j + 1 >= arr.len() {
                    1.0
                } else {
                    arr[j] * (1.0 - frac) + arr[j + 1] * frac
                }
            };
            for i in 0..n {
                if g[i] > sample(&f, i) + eps + 1e-14 {
                    return false;
                }
                if f[i] > sample(&g, i) + eps + 1e-14 {
                    return false;
                }
            }
            true
        };

        let (mut lo_eps, mut hi_eps) = (0.0f64, 1.0f64);
        for _ in 0..50 {
            let mid = 0.5 * (lo_eps + hi_eps);
            if band_ok(mid) {
                hi_eps = mid;
            } else {
                lo_eps = mid;
            }
        }
        Ok((hi_eps, matched))
    }
}

fn cdf_interp(origin: f64, step: f64, cum: &[f64], x: f64) -> f64 {
    let t = (x - origin) / step;
    if t <= 0.0 {
        // Below the first sample the only mass is the left half-cell.
        if t <= -0.5 {
            return 0.0;
        }
        return cum[0] * (1.0 + 2.0 * t).max(0.0);
    }
    let last = (cum.len() - 1) as f64;
    if t >= last {
        if t >= last + 0.5 {
            return 1.0;
        }
        let tail = 1.0 - cum[cum.len() - 1];
        return cum[cum.len() - 1] + tail * (2.0 * (t - last)).min(1.0);
    }
    let i = t.floor() as usize;
    let frac = t - i as f64;
    cum[i] * (1.0 - frac) + cum[i + 1] * frac
}

/// Linear convolution of two real sequences via zero-padded FFTs. Output
/// length is `a.len() + b.len() - 1`.
fn fft_linear_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fa.resize(size, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fb.resize(size, Complex::new(0.0, 0.0));

    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = planner.plan_fft_forward(size);
        fft.process(&mut fa);
        fft.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(fb.iter()) {
            *x *= *y;
        }
        let ifft = planner.plan_fft_inverse(size);
        ifft.process(&mut fa);
    });

    let scale = 1.0 / size as f64;
    fa.truncate(out_len);
    fa.into_iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{FamilySpec, GridConfig};
    use approx::assert_relative_eq;

    fn grid(spec: FamilySpec) -> DensityGrid {
        spec.to_grid(&GridConfig::default()).unwrap()
    }

    fn uniform01() -> DensityGrid {
        grid(FamilySpec::Uniform { lower: 0.0, upper: 1.0 })
    }

    fn std_normal() -> DensityGrid {
        grid(FamilySpec::Gaussian { mean: 0.0, variance: 1.0 })
    }

    #[test]
    fn construction_normalizes_mass() {
        let g = DensityGrid::new(0.0, 0.5, vec![1.0, 2.0, 3.0], "t").unwrap();
        assert_relative_eq!(g.mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DensityGrid::new(0.0, 0.0, vec![1.0, 1.0], "t").is_err());
        assert!(DensityGrid::new(0.0, 1.0, vec![1.0], "t").is_err());
        assert!(DensityGrid::new(0.0, 1.0, vec![1.0, -1.0], "t").is_err());
        assert!(DensityGrid::new(0.0, 1.0, vec![0.0, 0.0], "t").is_err());
        assert!(DensityGrid::new(0.0, 1.0, vec![1.0, f64::NAN], "t").is_err());
    }

    #[test]
    fn gaussian_entropy_matches_closed_form() {
        let g = std_normal();
        assert_relative_eq!(g.entropy(), 1.4189385332046727, epsilon = 1e-4);
        assert_relative_eq!(g.entropy_power(), 17.079468445347132, epsilon = 1e-2);
    }

    #[test]
    fn uniform_entropy_is_zero() {
        assert!(uniform01().entropy().abs() < 1e-4);
        assert_relative_eq!(uniform01().entropy_power(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn uniform_variance_is_one_twelfth() {
        assert_relative_eq!(uniform01().variance(), 1.0 / 12.0, epsilon = 1e-6);
    }

    #[test]
    fn convolution_adds_moments() {
        let u = uniform01();
        let n = std_normal();
        let c = u.convolve(&n).unwrap();
        assert_relative_eq!(c.mean(), u.mean() + n.mean(), epsilon = 1e-9);
        assert_relative_eq!(c.variance(), u.variance() + n.variance(), epsilon = 1e-9);
        assert_relative_eq!(c.mass(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn uniform_self_convolution_is_triangular() {
        let u = uniform01();
        let t = u.convolve(&u).unwrap();
        // h of the triangular density on [0,2] is 1/2; variance 1/6.
        assert_relative_eq!(t.entropy(), 0.5, epsilon = 1e-3);
        assert_relative_eq!(t.variance(), 1.0 / 6.0, epsilon = 1e-6);
    }

    #[test]
    fn gaussian_self_convolution_entropy() {
        let n = std_normal();
        let c = n.convolve(&n).unwrap();
        // h(N(0,2)) = 1/2 log(4 pi e)
        assert_relative_eq!(c.entropy(), 0.5 * (4.0 * std::f64::consts::PI * std::f64::consts::E).ln(), epsilon = 1e-3);
    }

    #[test]
    fn convolve_rejects_step_mismatch() {
        let u = uniform01();
        let wide = grid(FamilySpec::Uniform { lower: 0.0, upper: 2.0 });
        assert!(matches!(u.convolve(&wide), Err(Error::StepMismatch(_, _))));
        // After resampling it goes through.
        let resampled = wide.resample(u.step()).unwrap();
        assert!(u.convolve(&resampled).is_ok());
    }

    #[test]
    fn scaling_law_for_entropy_and_variance() {
        let u = uniform01();
        for c in [0.5, 2.0, 3.0, -2.0] {
            let s = u.scale(c).unwrap();
            assert_relative_eq!(s.entropy(), u.entropy() + c.abs().ln(), epsilon = 1e-4);
            assert_relative_eq!(s.variance(), c * c * u.variance(), epsilon = 1e-6);
            assert_relative_eq!(s.mass(), 1.0, epsilon = 1e-12);
        }
        let n = std_normal();
        assert_relative_eq!(n.scale(3.0).unwrap().variance(), 9.0, epsilon = 1e-5);
        // Scale by one is the identity on every functional.
        let id = n.scale(1.0).unwrap();
        assert_relative_eq!(id.entropy(), n.entropy(), epsilon = 1e-12);
        assert!(matches!(n.scale(0.0), Err(Error::ZeroScale)));
    }

    #[test]
    fn entropy_power_scaling_by_two_multiplies_by_four() {
        let n = std_normal();
        let s = n.scale(2.0).unwrap();
        assert_relative_eq!(s.entropy_power() / n.entropy_power(), 4.0, max_relative = 1e-3);
    }

    #[test]
    fn matched_gaussian_of_uniform() {
        let m = uniform01().matched_gaussian().unwrap();
        assert_relative_eq!(m.mean(), 0.5, epsilon = 1e-9);
        assert_relative_eq!(m.variance(), 1.0 / 12.0, epsilon = 1e-6);
    }

    #[test]
    fn matched_gaussian_is_fixed_point_for_gaussian_grids() {
        let g = grid(FamilySpec::Gaussian { mean: -1.5, variance: 2.5 });
        let m = g.matched_gaussian().unwrap();
        assert_relative_eq!(m.mean(), -1.5, epsilon = 1e-6);
        assert_relative_eq!(m.variance(), 2.5, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_variance_is_rejected() {
        let spike = DensityGrid::new(0.0, 1e-9, vec![0.0, 1.0, 0.0], "spike").unwrap();
        assert!(matches!(
            spike.matched_gaussian(),
            Err(Error::DegenerateVariance(_, _))
        ));
    }

    #[test]
    fn relative_entropy_values() {
        assert!(std_normal().relative_entropy_to_gaussianity().unwrap().abs() < 1e-4);
        // D(uniform) = 1/2 log(2 pi e / 12)
        assert_relative_eq!(
            uniform01().relative_entropy_to_gaussianity().unwrap(),
            0.17648520831067255,
            epsilon = 1e-3
        );
    }

    #[test]
    fn variance_profile_is_monotone_and_anchored() {
        let n = std_normal();
        let m = n.moments();
        assert_relative_eq!(n.variance_profile(0.0), m.second_moment, epsilon = 1e-9);
        assert_eq!(n.variance_profile(50.0), 0.0);
        let radii: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let curve = n.variance_profile_curve(&radii);
        for pair in curve.windows(2) {
            assert!(pair[1].tail_mass <= pair[0].tail_mass + 1e-15);
        }
        // Gaussian tail integral at R=1: 2[R φ(R) + Q(R)] (quadrature oracle).
        assert_relative_eq!(n.variance_profile(1.0), 0.8012519569012009, epsilon = 1e-4);
    }

    #[test]
    fn fisher_information_of_gaussians() {
        let n = std_normal();
        let est = n.fisher_information();
        assert_relative_eq!(est.value, 1.0, max_relative = 1e-2);
        assert!(est.excluded_mass < 1e-9);
        let wide = grid(FamilySpec::Gaussian { mean: 0.0, variance: 4.0 });
        assert_relative_eq!(wide.fisher_information().value, 0.25, epsilon = 5e-3);
    }

    #[test]
    fn levy_distance_of_gaussian_grid_is_small() {
        let (d, matched) = std_normal().levy_distance_to_gaussian().unwrap();
        assert!(d < 1e-3, "self distance {d}");
        assert_relative_eq!(matched.variance(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn levy_distance_of_uniform_is_stable_under_refinement() {
        // Oracle value ~0.032536 from a CDF scan of U(0,1) vs N(1/2, 1/12).
        let coarse = uniform01().levy_distance_to_gaussian().unwrap().0;
        let fine = FamilySpec::Uniform { lower: 0.0, upper: 1.0 }
            .to_grid(&GridConfig { points: 1 << 15, truncation_sigmas: 10.0 })
            .unwrap()
            .levy_distance_to_gaussian()
            .unwrap()
            .0;
        assert_relative_eq!(coarse, 0.0325362, epsilon = 1e-3);
        assert!((coarse - fine).abs() < 1e-3);
    }

    #[test]
    fn centered_grid_has_zero_mean() {
        let g = grid(FamilySpec::Gaussian { mean: 3.0, variance: 1.0 });
        let c = g.centered();
        assert!(c.mean().abs() < 1e-10);
        assert_relative_eq!(c.entropy(), g.entropy(), epsilon = 1e-12);
    }

    #[test]
    fn convolve_gaussian_matches_grid_convolution() {
        let u = uniform01();
        let analytic = u
            .convolve_gaussian(&GaussianSpec::new(0.0, 1.0).unwrap(), 10.0)
            .unwrap();
        let gridded = u.convolve(&std_normal().resample(u.step()).unwrap()).unwrap();
        assert_relative_eq!(analytic.entropy(), gridded.entropy(), epsilon = 1e-4);
        assert_relative_eq!(analytic.variance(), 1.0 + 1.0 / 12.0, epsilon = 1e-6);
    }

    #[test]
    fn cdf_is_monotone_and_spans_unit_interval() {
        let u = uniform01();
        assert_eq!(u.cdf_at(-1.0), 0.0);
        assert_eq!(u.cdf_at(2.0), 1.0);
        assert_relative_eq!(u.cdf_at(0.5), 0.5, epsilon = 1e-3);
        let mut prev = -1.0;
        for i in 0..200 {
            let v = u.cdf_at(-0.1 + i as f64 * 0.006);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}
