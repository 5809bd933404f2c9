//! The full verification battery behind `entropica suite`: closed-form
//! oracles, equality cases, the randomized inequality suites, the AWGN and
//! robustness capacity checks, MAC and MIMO spot checks, and the stability
//! sweep. One manifest reproduces every verifiable claim, with wall-clock
//! budgets reported alongside.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::capacity::{CapacitySolver, ChannelSpec, SolverOptions};
use crate::config::RunConfig;
use crate::density::{DensityGrid, FamilySpec, GaussianSpec, GridConfig, MixtureComponent};
use crate::inequality::{self, gap_with_refinement, CheckOptions, SweepFamily, PHI};
use crate::mac::{self, MacTriplet};
use crate::mimo;
use crate::report::{GapReport, InputDigest, Report, ValueReport};
use crate::Result;

const HALF_LOG_2: f64 = core::f64::consts::LN_2 / 2.0;

/// |measured − target| ≤ allowed, encoded as a gap report.
fn within(name: &str, measured: f64, target: f64, allowed: f64) -> GapReport {
    let digest = InputDigest::new()
        .text(name)
        .scalar(measured)
        .scalar(target)
        .finish();
    GapReport::new(name, allowed, (measured - target).abs(), 1e-15, digest)
}

/// lhs ≥ rhs with a strict-equality-free margin, encoded as a gap report.
fn at_least(name: &str, lhs: f64, rhs: f64) -> GapReport {
    let digest = InputDigest::new().text(name).scalar(lhs).scalar(rhs).finish();
    GapReport::new(name, lhs, rhs, 1e-15, digest)
}

fn runtime_within(name: &str, started: Instant, budget_seconds: f64) -> GapReport {
    at_least(name, budget_seconds, started.elapsed().as_secs_f64())
}

fn gaussian01(grid: &GridConfig) -> Result<DensityGrid> {
    FamilySpec::Gaussian { mean: 0.0, variance: 1.0 }.to_grid(grid)
}

/// Unit-variance noise families used across the channel criteria.
fn noise_families() -> Vec<(&'static str, FamilySpec)> {
    let a = 3.0f64.sqrt();
    vec![
        ("uniform", FamilySpec::Uniform { lower: -a, upper: a }),
        ("laplace", FamilySpec::Laplace { location: 0.0, scale: 0.5f64.sqrt() }),
        (
            "mixture",
            FamilySpec::GaussMixture {
                components: vec![
                    MixtureComponent { weight: 0.5, mean: -0.75, variance: 0.4375 },
                    MixtureComponent { weight: 0.5, mean: 0.75, variance: 0.4375 },
                ],
            },
        ),
    ]
}

pub fn run_battery(config: &RunConfig) -> Result<Vec<Report>> {
    let mut reports = Vec::new();
    closed_form_oracles(config, &mut reports)?;
    large_doubling_equality(config, &mut reports)?;
    golden_ratio_constant(config, &mut reports)?;
    awgn_capacity(config, &mut reports)?;
    robustness_suite(config, &mut reports)?;
    inequality_battery(config, &mut reports)?;
    mac_checks(config, &mut reports)?;
    mimo_arithmetic(&mut reports)?;
    stability_sweep(config, &mut reports)?;
    Ok(reports)
}

/// Criterion 1: grid functionals against closed forms.
fn closed_form_oracles(config: &RunConfig, reports: &mut Vec<Report>) -> Result<()> {
    let started = Instant::now();
    let grid = config.grid();
    let gaussian = gaussian01(&grid)?;
    let half_log_2pie = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    reports.push(Report::Gap(within(
        "c1_gaussian_entropy",
        gaussian.entropy(),
        half_log_2pie,
        1e-4,
    )));

    let uniform = FamilySpec::Uniform { lower: 0.0, upper: 1.0 }.to_grid(&grid)?;
    reports.push(Report::Gap(within(
        "c1_uniform_doubling",
        inequality::doubling_constant(&uniform)?,
        std::f64::consts::E / 2.0,
        1e-3,
    )));

    let triangular = uniform.convolve(&uniform)?;
    reports.push(Report::Gap(within(
        "c1_triangular_entropy",
        triangular.entropy(),
        0.5,
        1e-3,
    )));
    reports.push(Report::Gap(runtime_within("c1_runtime_seconds", started, 5.0)));
    Ok(())
}

/// Criterion 2: sharp large-doubling equality for Gaussian X with
/// K_X = a K_Z.
fn large_doubling_equality(config: &RunConfig, reports: &mut Vec<Report>) -> Result<()> {
    let opts = CheckOptions::from_config(config);
    let f = gaussian01(&config.grid())?;
    for a in [0.25, 1.0, 4.0] {
        let z = GaussianSpec::new(0.0, a)?;
        let report = inequality::check_large_doubling(&f, &z, &opts)?;
        reports.push(Report::Gap(within(
            &format!("c2_equality_slack_a{a}"),
            report.slack,
            0.0,
            1e-3,
        )));
        if a == 1.0 {
            reports.push(Report::Gap(within("c2_lhs_half_log2", report.lhs, HALF_LOG_2, 1e-3)));
            reports.push(Report::Gap(within("c2_rhs_half_log2", report.rhs, HALF_LOG_2, 1e-3)));
        }
    }
    Ok(())
}

/// Criterion 3: the golden-ratio constant, in the bound and in g⁻¹.
fn golden_ratio_constant(config: &RunConfig, reports: &mut Vec<Report>) -> Result<()> {
    let opts = CheckOptions::from_config(config);
    let f = gaussian01(&config.grid())?;
    let report = inequality::check_golden_ratio_bound(&f, &opts)?;
    let constant = 0.5 * (2.0 / PHI).ln();
    reports.push(Report::Gap(within("c3_golden_slack", report.slack, constant, 1e-3)));
    reports.push(Report::Gap(within(
        "c3_g_inverse",
        inequality::g_inverse(-HALF_LOG_2)?,
        -constant,
        1e-12,
    )));
    Ok(())
}

/// Criterion 4: Blahut–Arimoto against the AWGN closed form.
fn awgn_capacity(config: &RunConfig, reports: &mut Vec<Report>) -> Result<()> {
    let solver = CapacitySolver::new(SolverOptions::from_config(config));
    let grid = config.grid();
    for snr in [0.5, 1.0, 4.0] {
        let started = Instant::now();
        let channel = ChannelSpec::new(gaussian01(&grid)?, snr)?;
        let result = solver.capacity_power_constrained(&channel)?;
        reports.push(Report::Gap(within(
            &format!("c4_awgn_capacity_snr{snr}"),
            result.capacity,
            0.5 * (1.0 + snr).ln(),
            2e-3,
        )));
        reports.push(Report::Gap(runtime_within(
            &format!("c4_runtime_seconds_snr{snr}"),
            started,
            30.0,
        )));
        reports.push(Report::Value(ValueReport::new(
            format!("c4_ba_iterations_snr{snr}"),
            result.iterations as f64,
        )));
    }
    Ok(())
}

/// Criterion 5: the three robustness bounds over noise × snr, plus the
/// low-SNR regime where the additive bound is vacuous while the
/// multiplicative one still gives information.
fn robustness_suite(config: &RunConfig, reports: &mut Vec<Report>) -> Result<()> {
    let started = Instant::now();
    let solver = CapacitySolver::new(SolverOptions::from_config(config));
    let grid = config.grid();
    for (noise_name, family) in noise_families() {
        for snr in [0.1, 1.0, 10.0] {
            let noise = family.to_grid(&grid)?;
            let channel = ChannelSpec::new(noise, snr * 1.0)?;
            let solve = solver.capacity_power_constrained(&channel)?;
            let mut robustness = solver.robustness_report(&channel, &solve)?;
            for gap in robustness.bound_reports.iter_mut() {
                gap.name = format!("c5_{}_{snr}_{}", noise_name, gap.name);
            }
            if snr == 0.1 {
                reports.push(Report::Gap(at_least(
                    &format!("c5_{noise_name}_low_snr_additive_vacuous"),
                    HALF_LOG_2,
                    solve.capacity,
                )));
                reports.push(Report::Gap(at_least(
                    &format!("c5_{noise_name}_low_snr_mult_informative"),
                    robustness.multiplicative_factor * solve.capacity,
                    1e-6,
                )));
            }
            reports.push(Report::Robustness(robustness));
        }
    }
    reports.push(Report::Gap(runtime_within("c5_runtime_seconds", started, 600.0)));
    Ok(())
}

/// Criterion 6: randomized property battery with grid-refinement retry;
/// zero violations allowed.
fn inequality_battery(config: &RunConfig, reports: &mut Vec<Report>) -> Result<()> {
    let opts = CheckOptions::from_config(config);
    let grid = config.grid();
    let seed = config.seed;
    let instances = 100u64;

    let build = |index: u64, g: &GridConfig| -> Result<DensityGrid> {
        inequality::random_mixture(seed, index).to_grid(g)
    };

    let mut epi_violations = 0u32;
    for i in 0..instances {
        let gap = gap_with_refinement(&grid, |g| {
            inequality::check_epi_doubling(&build(i, g)?, &opts)
        })?;
        if !gap.satisfied {
            epi_violations += 1;
        }
    }
    reports.push(Report::Gap(at_least("c6_epi_violations_zero", 0.0, epi_violations as f64)));

    let mut submodularity_violations = 0u32;
    for i in 0..instances {
        let base = 1000 + 3 * i;
        let gap = gap_with_refinement(&grid, |g| {
            inequality::check_submodularity(
                &build(base, g)?,
                &build(base + 1, g)?,
                &build(base + 2, g)?,
                &opts,
            )
        })?;
        if !gap.satisfied {
            submodularity_violations += 1;
        }
    }
    reports.push(Report::Gap(at_least(
        "c6_submodularity_violations_zero",
        0.0,
        submodularity_violations as f64,
    )));

    let mut fractional_violations = 0u32;
    for i in 0..instances {
        let n = 3 + (i % 2) as usize;
        let base = 2000 + 6 * i;
        for k in [1, n - 1] {
            let gap = gap_with_refinement(&grid, |g| {
                let fs: Vec<DensityGrid> = (0..n)
                    .map(|j| build(base + j as u64, g))
                    .collect::<Result<_>>()?;
                inequality::check_fractional_superadditivity(&fs, k, &opts)
            })?;
            if !gap.satisfied {
                fractional_violations += 1;
            }
        }
    }
    reports.push(Report::Gap(at_least(
        "c6_fractional_violations_zero",
        0.0,
        fractional_violations as f64,
    )));

    let mut combined_violations = 0u32;
    for i in 0..instances {
        let gap = gap_with_refinement(&grid, |g| {
            Ok(inequality::check_combined_doubling(&build(3000 + i, g)?, &opts)?.0)
        })?;
        if !gap.satisfied {
            combined_violations += 1;
        }
    }
    reports.push(Report::Gap(at_least(
        "c6_combined_violations_zero",
        0.0,
        combined_violations as f64,
    )));

    let mut ze_violations = 0u32;
    for i in 0..instances {
        let base = 4000 + 2 * i;
        let gap = gap_with_refinement(&grid, |g| {
            inequality::ze_gap_check(&build(base, g)?, &build(base + 1, g)?, &opts)
        })?;
        if !gap.satisfied {
            ze_violations += 1;
        }
    }
    reports.push(Report::Gap(at_least("c6_ze_violations_zero", 0.0, ze_violations as f64)));
    Ok(())
}

/// Criterion 7: Gaussian MAC closed forms plus randomized fractional bounds.
fn mac_checks(config: &RunConfig, reports: &mut Vec<Report>) -> Result<()> {
    let grid = config.grid();
    let gaussian = gaussian01(&grid)?;
    let triplet = MacTriplet::new(
        vec![1.0],
        vec![gaussian.clone()],
        vec![gaussian.clone()],
        1.0,
        1.0,
    )?;
    let bound = mac::check_mac_fractional_bound(&triplet, &gaussian, &grid, config.tolerance_nats)?;
    reports.push(Report::Gap(within(
        "c7_gaussian_isum",
        bound.per_v_rates[0].isum,
        0.5 * 3.0f64.ln(),
        2e-3,
    )));
    reports.push(Report::Gap(within(
        "c7_gaussian_r1_slack",
        bound.bound_reports[0].slack,
        0.8 * HALF_LOG_2,
        2e-3,
    )));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6d61635f74726970);
    let noises: Vec<DensityGrid> = noise_families()
        .into_iter()
        .map(|(_, family)| family.to_grid(&grid))
        .collect::<Result<_>>()?;
    let mut violations = 0u32;
    for t in 0..20u64 {
        let p = rng.random_range(0.2..0.8);
        let p1 = rng.random_range(0.5..2.0);
        let p2 = rng.random_range(0.5..2.0);
        let scaled = |index: u64, target: f64| -> Result<DensityGrid> {
            let raw = inequality::random_mixture(config.seed, 5000 + index).to_grid(&grid)?;
            raw.scale((target / raw.variance()).sqrt())
        };
        let triplet = MacTriplet::new(
            vec![p, 1.0 - p],
            vec![scaled(4 * t, p1)?, scaled(4 * t + 1, p1)?],
            vec![scaled(4 * t + 2, p2)?, scaled(4 * t + 3, p2)?],
            p1,
            p2,
        )?;
        let noise = &noises[(t % 3) as usize];
        let bound = mac::check_mac_fractional_bound(&triplet, noise, &grid, config.tolerance_nats)?;
        violations += bound.bound_reports.iter().filter(|r| !r.satisfied).count() as u32;
    }
    reports.push(Report::Gap(at_least(
        "c7_fractional_violations_zero",
        0.0,
        violations as f64,
    )));
    Ok(())
}

/// Criterion 8: MIMO factor arithmetic at exact rational points.
fn mimo_arithmetic(reports: &mut Vec<Report>) -> Result<()> {
    use nalgebra::DMatrix;

    let scalar = mimo::MimoChannel::new(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
        1.0,
    )?;
    reports.push(Report::Gap(within(
        "c8_scalar_factor",
        mimo::mimo_robustness_factor(&scalar).value,
        0.2,
        1e-12,
    )));

    let identity2 = mimo::MimoChannel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2), 2.0)?;
    reports.push(Report::Gap(within(
        "c8_identity2_factor",
        mimo::mimo_robustness_factor(&identity2).value,
        1.0 / 7.0,
        1e-12,
    )));

    for d in [1usize, 2, 3, 5] {
        let eye = DMatrix::<f64>::identity(d, d);
        reports.push(Report::Gap(within(
            &format!("c8_dim_snr_identity_d{d}"),
            mimo::dim_snr_factor(&eye, &eye, &eye, d)?,
            0.2,
            1e-12,
        )));
    }

    // ½ a bit, matching the additive half-log-2 robustness constant.
    reports.push(Report::Gap(within(
        "c8_additive_loss_1x1",
        mimo::philosof_zamir_additive_loss(1, 1)?,
        0.5,
        1e-15,
    )));
    Ok(())
}

/// Criterion 9: the small-doubling stability sweep is monotone and ends
/// near-Gaussian.
fn stability_sweep(config: &RunConfig, reports: &mut Vec<Report>) -> Result<()> {
    let params = [2.0, 1.0, 0.5, 0.25];
    let rows = inequality::small_doubling_sweep(
        &SweepFamily::MixtureSeparation { component_variance: 1.0 },
        &params,
        &config.grid(),
    )?;
    for pair in rows.windows(2) {
        reports.push(Report::Gap(at_least(
            &format!("c9_doubling_gap_decreasing_{}_{}", pair[0].parameter, pair[1].parameter),
            pair[0].doubling_gap - pair[1].doubling_gap,
            1e-12,
        )));
        reports.push(Report::Gap(at_least(
            &format!("c9_levy_decreasing_{}_{}", pair[0].parameter, pair[1].parameter),
            pair[0].levy_distance - pair[1].levy_distance,
            1e-12,
        )));
    }
    reports.push(Report::Gap(at_least(
        "c9_levy_below_0.05_at_smallest_separation",
        0.05,
        rows.last().unwrap().levy_distance,
    )));
    reports.push(Report::Sweep { rows });
    Ok(())
}
