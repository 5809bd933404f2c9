//! Entropic doubling and the entropy-comparison inequality checks.
//!
//! Every check returns a [`GapReport`] carrying lhs, rhs, slack and the
//! tolerance it was judged against, so violations are auditable. Inputs are
//! grid densities; sums against exact Gaussians use an analytic kernel
//! sampled on the grid step rather than a pre-discretized Gaussian grid.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::{DensityGrid, FamilySpec, GaussianSpec, GridConfig, MixtureComponent};
use crate::report::{GapReport, InputDigest};
use crate::{Error, Result};

/// The golden ratio (1+√5)/2; the constant in the combined doubling bound.
pub const PHI: f64 = 1.618033988749894848;

/// Largest number of summands accepted by the fractional superadditivity
/// check; the subset sum has C(n,k) terms.
pub const MAX_SUMMANDS: usize = 6;

/// Options shared by the inequality checks.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    /// Truncation radius, in standard deviations, of analytic Gaussian
    /// kernels sampled onto the grid.
    pub kernel_sigmas: f64,
    /// Tolerance in nats below which a negative slack still counts as
    /// satisfied.
    pub tolerance: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            kernel_sigmas: 10.0,
            tolerance: 1e-3,
        }
    }
}

impl CheckOptions {
    pub fn from_config(config: &crate::config::RunConfig) -> Self {
        CheckOptions {
            kernel_sigmas: config.truncation_sigmas,
            tolerance: config.tolerance_nats,
        }
    }
}

/// Entropic doubling constant σ[X] = ½ exp(2 [h(X+X') − h(X)]) for d = 1.
///
/// Equals 1 exactly when X is Gaussian and is ≥ 1 for every density.
pub fn doubling_constant(f: &DensityGrid) -> Result<f64> {
    let doubled = f.convolve(f)?;
    Ok(0.5 * (2.0 * (doubled.entropy() - f.entropy())).exp())
}

/// EPI in doubling form: σ[X] ≥ 1.
pub fn check_epi_doubling(f: &DensityGrid, opts: &CheckOptions) -> Result<GapReport> {
    let sigma = doubling_constant(f)?;
    let digest = InputDigest::new().grid(f).finish();
    Ok(GapReport::new("epi_doubling", sigma, 1.0, opts.tolerance, digest))
}

/// Submodularity of the entropy of sums:
/// h(X1+X2) + h(X1+X3) ≥ h(X1+X2+X3) + h(X1).
pub fn check_submodularity(
    f1: &DensityGrid,
    f2: &DensityGrid,
    f3: &DensityGrid,
    opts: &CheckOptions,
) -> Result<GapReport> {
    let f2 = align(f2, f1.step())?;
    let f3 = align(f3, f1.step())?;
    let s12 = f1.convolve(&f2)?;
    let s13 = f1.convolve(&f3)?;
    let s123 = s12.convolve(&f3)?;
    let lhs = s12.entropy() + s13.entropy();
    let rhs = s123.entropy() + f1.entropy();
    let digest = InputDigest::new().grid(f1).grid(&f2).grid(&f3).finish();
    Ok(GapReport::new("submodularity", lhs, rhs, opts.tolerance, digest))
}

/// Fractional superadditivity of entropy power over size-k subsets:
/// N(X1+…+Xn) ≥ (1/C(n−1,k−1)) Σ_{|S|=k} N(Σ_{j∈S} Xj).
pub fn check_fractional_superadditivity(
    fs: &[DensityGrid],
    k: usize,
    opts: &CheckOptions,
) -> Result<GapReport> {
    let n = fs.len();
    if n > MAX_SUMMANDS {
        return Err(Error::TooManySummands(n, MAX_SUMMANDS));
    }
    if k == 0 || k > n || n < 2 {
        return Err(Error::SubsetSize { k, n });
    }
    let step = fs[0].step();
    let aligned: Vec<DensityGrid> = fs
        .iter()
        .map(|f| align(f, step).map(|c| c.into_owned()))
        .collect::<Result<_>>()?;

    let total = convolve_all(&aligned)?;
    let lhs = total.entropy_power();

    let mut subset_sum = 0.0;
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let members: Vec<&DensityGrid> = (0..n)
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| &aligned[j])
            .collect();
        let conv = convolve_refs(&members)?;
        subset_sum += conv.entropy_power();
    }
    let rhs = subset_sum / binomial(n - 1, k - 1) as f64;

    let mut digest = InputDigest::new();
    for f in &aligned {
        digest = digest.grid(f);
    }
    let digest = digest.scalar(k as f64).finish();
    Ok(GapReport::new(
        format!("fractional_superadditivity_n{n}_k{k}"),
        lhs,
        rhs,
        opts.tolerance,
        digest,
    ))
}

/// Golden-ratio comparison: h(X+Z) ≥ h(X+X') − ½ log(2/φ) with Z the
/// moment-matched Gaussian.
pub fn check_golden_ratio_bound(f: &DensityGrid, opts: &CheckOptions) -> Result<GapReport> {
    let z = f.matched_gaussian()?;
    let lhs = f.convolve_gaussian(&z, opts.kernel_sigmas)?.entropy();
    let rhs = f.convolve(f)?.entropy() - 0.5 * (2.0 / PHI).ln();
    let digest = InputDigest::new().grid(f).finish();
    Ok(GapReport::new("golden_ratio_bound", lhs, rhs, opts.tolerance, digest))
}

/// Sharp large-doubling bound: h(X+Z) − h(X) ≥ ½ log(1 + a σ[X]) with
/// a = Var(Z)/Var(X); equality when X is Gaussian with proportional variance.
pub fn check_large_doubling(
    f: &DensityGrid,
    z: &GaussianSpec,
    opts: &CheckOptions,
) -> Result<GapReport> {
    let var_f = f.matched_gaussian()?.variance();
    let a = z.variance() / var_f;
    let sigma = doubling_constant(f)?;
    let lhs = f.convolve_gaussian(z, opts.kernel_sigmas)?.entropy() - f.entropy();
    let rhs = 0.5 * (1.0 + a * sigma).ln();
    let digest = InputDigest::new()
        .grid(f)
        .scalar(z.mean())
        .scalar(z.variance())
        .finish();
    Ok(GapReport::new("large_doubling", lhs, rhs, opts.tolerance, digest))
}

/// Which branch of max{φσ, 1+σ} is active in the combined doubling bound.
/// The switch sits at σ = φ; ties within 1e-12 are labeled `Boundary`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoublingBranch {
    OnePlusSigma,
    PhiSigma,
    Boundary,
}

impl std::fmt::Display for DoublingBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DoublingBranch::OnePlusSigma => write!(f, "1+sigma"),
            DoublingBranch::PhiSigma => write!(f, "phi*sigma"),
            DoublingBranch::Boundary => write!(f, "boundary"),
        }
    }
}

/// Combined doubling bound with Z the moment-matched Gaussian:
/// h(X+Z) − h(X) ≥ ½ log max{φ σ[X], 1 + σ[X]}.
pub fn check_combined_doubling(
    f: &DensityGrid,
    opts: &CheckOptions,
) -> Result<(GapReport, DoublingBranch)> {
    let z = f.matched_gaussian()?;
    let sigma = doubling_constant(f)?;
    let phi_branch = PHI * sigma;
    let one_branch = 1.0 + sigma;
    let branch = if (phi_branch - one_branch).abs() < 1e-12 {
        DoublingBranch::Boundary
    } else if phi_branch > one_branch {
        DoublingBranch::PhiSigma
    } else {
        DoublingBranch::OnePlusSigma
    };
    let lhs = f.convolve_gaussian(&z, opts.kernel_sigmas)?.entropy() - f.entropy();
    let rhs = 0.5 * phi_branch.max(one_branch).ln();
    let digest = InputDigest::new().grid(f).finish();
    Ok((
        GapReport::new("combined_doubling", lhs, rhs, opts.tolerance, digest),
        branch,
    ))
}

/// Signed gap h(X+Z) − h(X+Y) with Z the Gaussian matched to Y. Positive
/// means the naive Gaussian-replacement inequality held for this pair; it
/// can be negative for general independent pairs.
pub fn gaussianization_gap(
    fx: &DensityGrid,
    fy: &DensityGrid,
    opts: &CheckOptions,
) -> Result<f64> {
    let z = fy.matched_gaussian()?;
    let fy = align(fy, fx.step())?;
    let with_gaussian = fx.convolve_gaussian(&z, opts.kernel_sigmas)?.entropy();
    let with_original = fx.convolve(&fy)?.entropy();
    Ok(with_gaussian - with_original)
}

/// Zamir–Erez comparison: h(X+Z) ≥ h(X+Y) − ½ log 2, always satisfied.
pub fn ze_gap_check(fx: &DensityGrid, fy: &DensityGrid, opts: &CheckOptions) -> Result<GapReport> {
    let z = fy.matched_gaussian()?;
    let aligned = align(fy, fx.step())?;
    let lhs = fx.convolve_gaussian(&z, opts.kernel_sigmas)?.entropy();
    let rhs = fx.convolve(&aligned)?.entropy() - 0.5 * 2.0f64.ln();
    let digest = InputDigest::new().grid(fx).grid(&aligned).finish();
    Ok(GapReport::new("ze_gap", lhs, rhs, opts.tolerance, digest))
}

/// The increasing map a ↦ a − ¼ log(1 + 2 e^{2a}) whose inverse turns the
/// submodularity/superadditivity sandwich into the golden-ratio constant.
pub fn g(a: f64) -> f64 {
    a - 0.25 * (1.0 + 2.0 * (2.0 * a).exp()).ln()
}

/// Inverse of [`g`]: g⁻¹(y) = ½ log[e^{4y} + e^{2y} √(e^{4y}+1)], evaluated
/// in the stable form y + ½ asinh(e^{2y}).
pub fn g_inverse(y: f64) -> Result<f64> {
    if y.abs() > 50.0 {
        return Err(Error::OutOfRange(format!(
            "g_inverse argument {y} outside the configured range ±50"
        )));
    }
    Ok(y + 0.5 * (2.0 * y).exp().asinh())
}

/// One row of a small-doubling stability sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilitySweepRow {
    pub parameter: f64,
    pub doubling_gap: f64,
    pub levy_distance: f64,
    pub relative_entropy: f64,
}

impl StabilitySweepRow {
    pub const CSV_HEADER: &'static str = "parameter,doubling_gap,levy_distance,relative_entropy";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.parameter, self.doubling_gap, self.levy_distance, self.relative_entropy
        )
    }
}

/// Parametric families for the stability sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFamily {
    /// Symmetric two-Gaussian mixture with means ±p/2; the parameter is the
    /// separation p.
    MixtureSeparation { component_variance: f64 },
    /// Uniform(-p/2, p/2); the parameter is the width p.
    UniformWidth,
    /// N(0,1) regardless of the parameter; a fixed point of the sweep.
    ConstantGaussian,
}

impl std::str::FromStr for SweepFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mix_sep" => Ok(SweepFamily::MixtureSeparation { component_variance: 1.0 }),
            "uniform_width" => Ok(SweepFamily::UniformWidth),
            "gaussian" => Ok(SweepFamily::ConstantGaussian),
            other => Err(Error::UnknownFamily(format!("sweep family {other}"))),
        }
    }
}

impl SweepFamily {
    pub fn density(&self, parameter: f64) -> Result<FamilySpec> {
        match self {
            SweepFamily::MixtureSeparation { component_variance } => {
                if !(parameter >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "mixture separation must be non-negative, got {parameter}"
                    )));
                }
                Ok(FamilySpec::GaussMixture {
                    components: vec![
                        MixtureComponent {
                            weight: 0.5,
                            mean: -0.5 * parameter,
                            variance: *component_variance,
                        },
                        MixtureComponent {
                            weight: 0.5,
                            mean: 0.5 * parameter,
                            variance: *component_variance,
                        },
                    ],
                })
            }
            SweepFamily::UniformWidth => {
                if !(parameter > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform width must be positive, got {parameter}"
                    )));
                }
                Ok(FamilySpec::Uniform {
                    lower: -0.5 * parameter,
                    upper: 0.5 * parameter,
                })
            }
            SweepFamily::ConstantGaussian => Ok(FamilySpec::Gaussian { mean: 0.0, variance: 1.0 }),
        }
    }
}

/// Evaluates σ[X]−1, the Lévy distance to the matched Gaussian, and D(X)
/// across a parametric family. Rows keep the order of `params`.
pub fn small_doubling_sweep(
    family: &SweepFamily,
    params: &[f64],
    grid: &GridConfig,
) -> Result<Vec<StabilitySweepRow>> {
    params
        .iter()
        .map(|&parameter| {
            let density = family.density(parameter)?.to_grid(grid)?;
            let sigma = doubling_constant(&density)?;
            let (levy, _) = density.levy_distance_to_gaussian()?;
            let relative_entropy = density.relative_entropy_to_gaussianity()?;
            Ok(StabilitySweepRow {
                parameter,
                doubling_gap: sigma - 1.0,
                levy_distance: levy,
                relative_entropy,
            })
        })
        .collect()
}

/// Seed-partitioned random Gaussian mixture for the property suites:
/// 1–4 components, means in [−3,3], variances in [0.25,2], Dirichlet-uniform
/// weights. The same (seed, index) pair always yields the same mixture, so
/// suites are order-independent.
pub fn random_mixture(seed: u64, index: u64) -> FamilySpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e3779b97f4a7c15));
    let k = rng.random_range(1..=4usize);
    // Dirichlet(1,…,1) via normalized exponentials.
    let raw: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    let total: f64 = raw.iter().sum();
    let components = raw
        .into_iter()
        .map(|w| MixtureComponent {
            weight: w / total,
            mean: rng.random_range(-3.0..3.0),
            variance: rng.random_range(0.25..2.0),
        })
        .collect();
    FamilySpec::GaussMixture { components }
}

/// Runs a grid-dependent check, retrying once at twice the resolution if the
/// first attempt is unsatisfied. Distinguishes discretization error from a
/// genuine violation.
pub fn gap_with_refinement(
    grid: &GridConfig,
    run: impl Fn(&GridConfig) -> Result<GapReport>,
) -> Result<GapReport> {
    let first = run(grid)?;
    if first.satisfied {
        return Ok(first);
    }
    let refined = GridConfig {
        points: grid.points * 2,
        truncation_sigmas: grid.truncation_sigmas,
    };
    run(&refined)
}

fn align<'a>(f: &'a DensityGrid, step: f64) -> Result<std::borrow::Cow<'a, DensityGrid>> {
    let rel = (f.step() - step).abs() / f.step().max(step);
    if rel <= 1e-9 {
        Ok(std::borrow::Cow::Borrowed(f))
    } else {
        Ok(std::borrow::Cow::Owned(f.resample(step)?))
    }
}

fn convolve_all(fs: &[DensityGrid]) -> Result<DensityGrid> {
    let refs: Vec<&DensityGrid> = fs.iter().collect();
    convolve_refs(&refs)
}

fn convolve_refs(fs: &[&DensityGrid]) -> Result<DensityGrid> {
    let mut acc = fs[0].clone();
    for f in &fs[1..] {
        acc = acc.convolve(f)?;
    }
    Ok(acc)
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num *= (n - i) as u64;
        den *= (i + 1) as u64;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::GridConfig;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(spec: FamilySpec) -> DensityGrid {
        spec.to_grid(&GridConfig::default()).unwrap()
    }

    fn std_normal() -> DensityGrid {
        grid(FamilySpec::Gaussian { mean: 0.0, variance: 1.0 })
    }

    fn uniform01() -> DensityGrid {
        grid(FamilySpec::Uniform { lower: 0.0, upper: 1.0 })
    }

    #[test]
    fn doubling_of_gaussian_is_one() {
        let sigma = doubling_constant(&std_normal()).unwrap();
        assert_relative_eq!(sigma, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn doubling_of_uniform_is_e_over_two() {
        let sigma = doubling_constant(&uniform01()).unwrap();
        assert_relative_eq!(sigma, std::f64::consts::E / 2.0, epsilon = 1e-3);
    }

    #[test]
    fn doubling_of_laplace_is_stable_under_refinement() {
        // Self-convolution quadrature oracle: h(L*L) = 2.08812068 nats,
        // giving sigma = 1.10163982.
        let spec = FamilySpec::Laplace { location: 0.0, scale: 1.0 };
        let coarse = doubling_constant(&grid(spec.clone())).unwrap();
        let fine = doubling_constant(
            &spec.to_grid(&GridConfig { points: 1 << 15, truncation_sigmas: 10.0 }).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(coarse, 1.1016398233442843, epsilon = 1e-3);
        assert!(coarse > 1.0);
        assert!((coarse - fine).abs() < 1e-3);
    }

    #[test]
    fn identity_chain_holds_exactly() {
        // h(X+X') − h(X) = ½ log(2 σ[X]) is an algebraic identity of the
        // implementation, not a numerical estimate.
        let f = uniform01();
        let doubled = f.convolve(&f).unwrap();
        let delta = doubled.entropy() - f.entropy();
        let sigma = doubling_constant(&f).unwrap();
        assert_relative_eq!(delta, 0.5 * (2.0 * sigma).ln(), epsilon = 1e-12);
    }

    #[test]
    fn epi_reports() {
        let opts = CheckOptions::default();
        let g = check_epi_doubling(&std_normal(), &opts).unwrap();
        assert!(g.satisfied);
        assert!(g.slack.abs() < 1e-3);
        let u = check_epi_doubling(&uniform01(), &opts).unwrap();
        assert!(u.satisfied);
        assert_relative_eq!(u.slack, std::f64::consts::E / 2.0 - 1.0, epsilon = 1e-3);
    }

    #[test]
    fn submodularity_of_three_gaussians() {
        let opts = CheckOptions::default();
        let f = std_normal();
        let report = check_submodularity(&f, &f, &f, &opts).unwrap();
        assert!(report.satisfied);
        // Gaussian closed forms give slack = ½ log(4/3).
        assert_relative_eq!(report.slack, 0.14384103622589042, epsilon = 1e-3);
    }

    #[test]
    fn submodularity_with_point_like_summand() {
        let opts = CheckOptions::default();
        let f1 = std_normal();
        let tiny = grid(FamilySpec::Gaussian { mean: 0.0, variance: 1e-4 });
        let report = check_submodularity(&f1, &tiny, &f1, &opts).unwrap();
        assert!(report.satisfied);
        assert!(report.slack.abs() < 1e-3, "slack {}", report.slack);
    }

    #[test]
    fn fractional_superadditivity_gaussian_equality_cases() {
        let opts = CheckOptions::default();
        let f = std_normal();
        // n=2, k=1 is the classical EPI with equality for Gaussians.
        let pair = check_fractional_superadditivity(&[f.clone(), f.clone()], 1, &opts).unwrap();
        assert!(pair.satisfied);
        assert!(pair.slack.abs() < 0.05, "slack {}", pair.slack);
        // n=3, k=2: lhs = 6πe and rhs = ½·3·4πe = 6πe.
        let triple =
            check_fractional_superadditivity(&[f.clone(), f.clone(), f.clone()], 2, &opts).unwrap();
        assert!(triple.satisfied);
        assert!(triple.slack.abs() < 0.15, "slack {}", triple.slack);
    }

    #[test]
    fn fractional_superadditivity_mixed_families() {
        let opts = CheckOptions::default();
        let fs = [
            uniform01(),
            grid(FamilySpec::Laplace { location: 0.0, scale: 1.0 }),
            std_normal(),
        ];
        let report = check_fractional_superadditivity(&fs, 2, &opts).unwrap();
        assert!(report.satisfied);
    }

    #[test]
    fn fractional_superadditivity_argument_checks() {
        let f = uniform01();
        assert!(matches!(
            check_fractional_superadditivity(&[f.clone(), f.clone()], 0, &CheckOptions::default()),
            Err(Error::SubsetSize { .. })
        ));
        assert!(matches!(
            check_fractional_superadditivity(&[f.clone(), f.clone()], 3, &CheckOptions::default()),
            Err(Error::SubsetSize { .. })
        ));
        let seven = vec![f; 7];
        assert!(matches!(
            check_fractional_superadditivity(&seven, 2, &CheckOptions::default()),
            Err(Error::TooManySummands(7, MAX_SUMMANDS))
        ));
    }

    #[test]
    fn golden_ratio_bound_gaussian_slack_is_the_constant() {
        let opts = CheckOptions::default();
        let report = check_golden_ratio_bound(&std_normal(), &opts).unwrap();
        assert!(report.satisfied);
        assert_relative_eq!(report.slack, 0.5 * (2.0 / PHI).ln(), epsilon = 1e-3);
    }

    #[test]
    fn golden_ratio_bound_uniform() {
        // Quadrature oracle: h(U+Z) = 0.52040585 with Z ~ N(·, 1/12), so the
        // slack is 0.52040585 − 0.5 + ½ log(2/φ) = 0.12637353.
        let report = check_golden_ratio_bound(&uniform01(), &CheckOptions::default()).unwrap();
        assert!(report.satisfied);
        assert_relative_eq!(report.slack, 0.12637353081579558, epsilon = 1e-3);
    }

    #[test]
    fn large_doubling_equality_for_gaussians() {
        let opts = CheckOptions::default();
        let f = std_normal();
        for a in [0.25, 1.0, 4.0] {
            let z = GaussianSpec::new(0.0, a).unwrap();
            let report = check_large_doubling(&f, &z, &opts).unwrap();
            assert!(report.satisfied);
            assert!(report.slack.abs() < 1e-3, "a={a} slack {}", report.slack);
            if a == 1.0 {
                assert_relative_eq!(report.lhs, 0.5 * 2.0f64.ln(), epsilon = 1e-3);
                assert_relative_eq!(report.rhs, 0.5 * 2.0f64.ln(), epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn large_doubling_uniform_has_positive_slack() {
        let f = uniform01();
        let z = f.matched_gaussian().unwrap();
        let report = check_large_doubling(&f, &z, &CheckOptions::default()).unwrap();
        assert!(report.satisfied);
        assert!(report.slack > 0.0);
    }

    #[test]
    fn combined_doubling_branches() {
        let opts = CheckOptions::default();
        let (g_report, branch) = check_combined_doubling(&std_normal(), &opts).unwrap();
        assert_eq!(branch, DoublingBranch::OnePlusSigma);
        assert!(g_report.satisfied);
        assert!(g_report.slack.abs() < 1e-3);
        assert_relative_eq!(g_report.rhs, 0.5 * 2.0f64.ln(), epsilon = 1e-3);

        // e/2 ≈ 1.359 < φ ≈ 1.618, so uniform stays on the 1+σ branch.
        let (u_report, branch) = check_combined_doubling(&uniform01(), &opts).unwrap();
        assert_eq!(branch, DoublingBranch::OnePlusSigma);
        assert!(u_report.satisfied);

        // Well-separated symmetric mixture has σ ≈ 2 > φ.
        let heavy = grid(FamilySpec::GaussMixture {
            components: vec![
                MixtureComponent { weight: 0.5, mean: -3.0, variance: 0.05 },
                MixtureComponent { weight: 0.5, mean: 3.0, variance: 0.05 },
            ],
        });
        let (h_report, branch) = check_combined_doubling(&heavy, &opts).unwrap();
        assert_eq!(branch, DoublingBranch::PhiSigma);
        assert!(h_report.satisfied);
    }

    #[test]
    fn gaussianization_gap_signs() {
        let opts = CheckOptions::default();
        // Y already Gaussian: Z ≡ Y so the gap vanishes.
        let gap = gaussianization_gap(&uniform01(), &std_normal(), &opts).unwrap();
        assert!(gap >= -1e-3);
        assert!(gap.abs() < 1e-3);
        // i.i.d. uniform pair: oracle gives +0.0204059 (the open i.i.d. case
        // holds here).
        let gap = gaussianization_gap(&uniform01(), &uniform01(), &opts).unwrap();
        assert_relative_eq!(gap, 0.0204058530656247, epsilon = 1e-3);
    }

    #[test]
    fn ze_gap_reports() {
        let opts = CheckOptions::default();
        let g = ze_gap_check(&std_normal(), &std_normal(), &opts).unwrap();
        assert!(g.satisfied);
        assert_relative_eq!(g.slack, 0.5 * 2.0f64.ln(), epsilon = 1e-3);

        let u = ze_gap_check(&uniform01(), &uniform01(), &opts).unwrap();
        assert!(u.satisfied);
        assert!(u.slack >= 0.5 * (2.0 / PHI).ln() - 1e-3);
    }

    #[test]
    fn g_inverse_hits_the_golden_ratio_constant() {
        let y = -0.5 * 2.0f64.ln();
        let expected = -0.5 * (2.0 / PHI).ln();
        assert_relative_eq!(g_inverse(y).unwrap(), expected, epsilon = 1e-12);
        // Round trip through the forward map at a = 0: g(0) = −¼ log 3.
        let y0 = g(0.0);
        assert_relative_eq!(y0, -0.25 * 3.0f64.ln(), epsilon = 1e-15);
        assert!(g_inverse(y0).unwrap().abs() < 1e-12);
        assert!(matches!(g_inverse(51.0), Err(Error::OutOfRange(_))));
    }

    proptest! {
        #[test]
        fn g_round_trip(y in -5.0f64..5.0) {
            let a = g_inverse(y).unwrap();
            prop_assert!((g(a) - y).abs() < 1e-10);
        }
    }

    #[test]
    fn sweep_constant_gaussian_stays_near_zero() {
        let rows = small_doubling_sweep(
            &SweepFamily::ConstantGaussian,
            &[2.0, 1.0, 0.5],
            &GridConfig::default(),
        )
        .unwrap();
        for row in rows {
            assert!(row.doubling_gap.abs() < 1e-3);
            assert!(row.levy_distance < 1e-3);
        }
    }

    #[test]
    fn sweep_uniform_width_is_scale_invariant() {
        let rows = small_doubling_sweep(
            &SweepFamily::UniformWidth,
            &[2.0, 1.0, 0.5],
            &GridConfig::default(),
        )
        .unwrap();
        for row in &rows {
            assert!(row.doubling_gap > 0.0);
            assert_relative_eq!(row.doubling_gap, std::f64::consts::E / 2.0 - 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn random_mixture_is_deterministic_per_index() {
        let a = random_mixture(7, 3);
        let b = random_mixture(7, 3);
        assert_eq!(a, b);
        let c = random_mixture(7, 4);
        assert_ne!(a, c);
        a.validate().unwrap();
    }

    #[test]
    fn refinement_retry_runs_at_double_resolution() {
        let grid_cfg = GridConfig { points: 1 << 10, truncation_sigmas: 10.0 };
        let mut seen = std::cell::RefCell::new(Vec::new());
        let _ = gap_with_refinement(&grid_cfg, |g| {
            seen.borrow_mut().push(g.points);
            // Forced failure: lhs below rhs beyond tolerance.
            Ok(GapReport::new("forced", 0.0, 1.0, 1e-3, "d".into()))
        })
        .unwrap();
        assert_eq!(*seen.get_mut(), vec![1 << 10, 1 << 11]);
    }
}
