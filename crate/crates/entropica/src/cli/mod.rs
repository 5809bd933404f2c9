//! Command-line front end: configuration layering, density spec parsing,
//! subcommand dispatch, and report serialization.
//!
//! Exit codes: 0 all checks satisfied; 1 at least one gap report unsatisfied
//! after a grid-refinement retry; 2 usage or parse error; 3 solver
//! non-convergence.

mod specparse;
pub mod suite;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::capacity::{
    load_channel_corpus, CapacitySolver, ChannelSpec, RobustnessReport, SolverOptions,
};
use crate::config::{OutputFormat, RunConfig};
use crate::density::{DensityGrid, GaussianSpec, GridConfig};
use crate::inequality::{
    self, gap_with_refinement, CheckOptions, StabilitySweepRow, SweepFamily,
};
use crate::mac::{self, MacTriplet, RatePair};
use crate::mimo;
use crate::report::{GapReport, Report, RunManifest, ValueReport};
use crate::{Error, Result};

pub use specparse::parse_density_spec;

#[derive(Parser, Debug)]
#[command(
    name = "entropica",
    version,
    about = "Entropy functionals, doubling constants, and Gaussian-codebook robustness checks for additive-noise channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args, Debug, Default)]
struct ConfigOverrides {
    /// Grid points per density (power of two ≥ 1024).
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Truncation radius in standard deviations (≥ 4).
    #[arg(long, global = true)]
    truncation_sigmas: Option<f64>,
    /// Inequality tolerance in nats.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Blahut–Arimoto terminal gap in nats.
    #[arg(long, global = true)]
    ba_gap: Option<f64>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format: text, json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// TOML config file (lowest-precedence overrides).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the rendered manifest to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropy, entropy power and moments of densities.
    Entropy {
        #[arg(long = "density", required = true)]
        densities: Vec<String>,
    },
    /// Entropic doubling constant σ[X].
    Doubling {
        #[arg(long = "density", required = true)]
        densities: Vec<String>,
    },
    /// Run one named inequality check (epi, submodularity, fractional,
    /// golden-ratio, large-doubling, combined, ze-gap, gaussianization).
    Check {
        name: String,
        #[arg(long = "density")]
        densities: Vec<String>,
        /// Subset size for the fractional superadditivity check.
        #[arg(long)]
        k: Option<usize>,
        /// Gaussian variance for the large-doubling check (default: matched).
        #[arg(long)]
        z_variance: Option<f64>,
    },
    /// Power-constrained Blahut–Arimoto capacity of an additive-noise channel.
    Capacity {
        #[arg(long)]
        noise: String,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        input_points: Option<usize>,
    },
    /// Gaussian-codebook robustness bounds for one channel or a corpus.
    Robustness {
        #[arg(long)]
        noise: Option<String>,
        #[arg(long)]
        power: Option<f64>,
        /// JSON corpus: a list of {noise_family, params, P}.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        input_points: Option<usize>,
    },
    /// MAC rates and fractional inner-bound checks for a triplet file.
    Mac {
        /// JSON triplet: {v_probs, x1, x2, P1, P2} with density specs.
        #[arg(long)]
        triplet: PathBuf,
        #[arg(long)]
        noise: String,
        /// Also emit the matched-Gaussian rate-region corners.
        #[arg(long)]
        corners: bool,
    },
    /// MIMO robustness factor and additive-loss comparison.
    Mimo {
        /// JSON channel: {H, N, P} with row-major matrices.
        #[arg(long)]
        channel: PathBuf,
        /// Capacity in nats, if known, to decide which bound binds tighter.
        #[arg(long)]
        capacity: Option<f64>,
    },
    /// Small-doubling stability sweep over a parametric family.
    Sweep {
        /// One of mix_sep, uniform_width, gaussian.
        #[arg(long)]
        family: String,
        #[arg(long, value_delimiter = ',', required = true)]
        params: Vec<f64>,
    },
    /// Full verification battery; exit 0 only if every criterion passes.
    Suite,
}

/// Entry point used by the binary. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let config = match build_config(&cli.overrides) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return 2;
        }
    };
    match execute(&cli.command, &config) {
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
        Ok(manifest) => {
            let rendered = match render(&manifest) {
                Ok(r) => r,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 2;
                }
            };
            if let Some(path) = &cli.overrides.out {
                if let Err(err) = std::fs::write(path, rendered) {
                    eprintln!("error: cannot write {}: {err}", path.display());
                    return 2;
                }
            } else {
                print!("{rendered}");
            }
            if manifest.all_satisfied() {
                0
            } else {
                1
            }
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NoConvergence(_) => 3,
        _ => 2,
    }
}

fn build_config(overrides: &ConfigOverrides) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &overrides.config {
        config.load_file(path)?;
    }
    config.load_env()?;
    if let Some(v) = overrides.grid_points {
        config.grid_points = v;
    }
    if let Some(v) = overrides.truncation_sigmas {
        config.truncation_sigmas = v;
    }
    if let Some(v) = overrides.tolerance {
        config.tolerance_nats = v;
    }
    if let Some(v) = overrides.ba_gap {
        config.ba_gap_threshold = v;
    }
    if let Some(v) = overrides.seed {
        config.seed = v;
    }
    if let Some(v) = &overrides.format {
        config.output_format = v.parse()?;
    }
    config.validate()?;
    Ok(config)
}

fn execute(command: &Command, config: &RunConfig) -> Result<RunManifest> {
    let reports = match command {
        Command::Entropy { densities } => entropy_reports(densities, config)?,
        Command::Doubling { densities } => doubling_reports(densities, config)?,
        Command::Check {
            name,
            densities,
            k,
            z_variance,
        } => check_reports(name, densities, *k, *z_variance, config)?,
        Command::Capacity {
            noise,
            power,
            input_points,
        } => capacity_reports(noise, *power, *input_points, config)?,
        Command::Robustness {
            noise,
            power,
            corpus,
            input_points,
        } => robustness_reports(noise.as_deref(), *power, corpus.as_deref(), *input_points, config)?,
        Command::Mac {
            triplet,
            noise,
            corners,
        } => mac_reports(triplet, noise, *corners, config)?,
        Command::Mimo { channel, capacity } => mimo_reports(channel, *capacity)?,
        Command::Sweep { family, params } => sweep_reports(family, params, config)?,
        Command::Suite => suite::run_battery(config)?,
    };
    Ok(RunManifest::new(describe(command), config.clone(), reports))
}

/// Convenience for tests: parse an argv fragment (without the binary name)
/// and execute it under explicit config.
pub fn execute_args(args: &[&str], config: &RunConfig) -> Result<RunManifest> {
    let mut argv = vec!["entropica"];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
    execute(&cli.command, config)
}

fn describe(command: &Command) -> String {
    match command {
        Command::Entropy { densities } => format!("entropy {}", join_densities(densities)),
        Command::Doubling { densities } => format!("doubling {}", join_densities(densities)),
        Command::Check {
            name,
            densities,
            k,
            z_variance,
        } => {
            let mut out = format!("check {name} {}", join_densities(densities));
            if let Some(k) = k {
                out.push_str(&format!(" --k {k}"));
            }
            if let Some(z) = z_variance {
                out.push_str(&format!(" --z-variance {z}"));
            }
            out
        }
        Command::Capacity {
            noise,
            power,
            input_points,
        } => {
            let mut out = format!("capacity --noise {noise} --power {power}");
            if let Some(p) = input_points {
                out.push_str(&format!(" --input-points {p}"));
            }
            out
        }
        Command::Robustness {
            noise,
            power,
            corpus,
            ..
        } => match corpus {
            Some(path) => format!("robustness --corpus {}", path.display()),
            None => format!(
                "robustness --noise {} --power {}",
                noise.as_deref().unwrap_or("?"),
                power.map(|p| p.to_string()).unwrap_or_else(|| "?".into())
            ),
        },
        Command::Mac {
            triplet,
            noise,
            corners,
        } => format!(
            "mac --triplet {} --noise {noise}{}",
            triplet.display(),
            if *corners { " --corners" } else { "" }
        ),
        Command::Mimo { channel, capacity } => match capacity {
            Some(c) => format!("mimo --channel {} --capacity {c}", channel.display()),
            None => format!("mimo --channel {}", channel.display()),
        },
        Command::Sweep { family, params } => format!(
            "sweep --family {family} --params {}",
            params
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
        Command::Suite => "suite".into(),
    }
}

fn join_densities(densities: &[String]) -> String {
    densities
        .iter()
        .map(|d| format!("--density {d}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn build_density(spec_text: &str, grid: &GridConfig) -> Result<DensityGrid> {
    parse_density_spec(spec_text)?.to_grid(grid)
}

fn entropy_reports(densities: &[String], config: &RunConfig) -> Result<Vec<Report>> {
    let grid = config.grid();
    let mut reports = Vec::new();
    for spec in densities {
        let density = build_density(spec, &grid)?;
        let moments = density.moments();
        reports.push(Report::Value(ValueReport::nats(
            format!("entropy[{spec}]"),
            density.entropy(),
        )));
        reports.push(Report::Value(ValueReport::new(
            format!("entropy_power[{spec}]"),
            density.entropy_power(),
        )));
        reports.push(Report::Value(ValueReport::new(format!("mean[{spec}]"), moments.mean)));
        reports.push(Report::Value(ValueReport::new(
            format!("variance[{spec}]"),
            moments.variance,
        )));
    }
    Ok(reports)
}

fn doubling_reports(densities: &[String], config: &RunConfig) -> Result<Vec<Report>> {
    let grid = config.grid();
    let mut reports = Vec::new();
    for spec in densities {
        let density = build_density(spec, &grid)?;
        let sigma = inequality::doubling_constant(&density)?;
        reports.push(Report::Value(ValueReport::new(
            format!("doubling_constant[{spec}]"),
            sigma,
        )));
    }
    Ok(reports)
}

fn expect_arity(name: &str, densities: &[String], expected: usize) -> Result<()> {
    if densities.len() == expected {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "check {name} takes exactly {expected} --density arguments, got {}",
            densities.len()
        )))
    }
}

fn check_reports(
    name: &str,
    densities: &[String],
    k: Option<usize>,
    z_variance: Option<f64>,
    config: &RunConfig,
) -> Result<Vec<Report>> {
    let opts = CheckOptions::from_config(config);
    let grid = config.grid();
    let mut reports = Vec::new();
    match name {
        "epi" => {
            if densities.is_empty() {
                return Err(Error::Usage("check epi needs at least one --density".into()));
            }
            for spec in densities {
                let gap = gap_with_refinement(&grid, |g| {
                    inequality::check_epi_doubling(&build_density(spec, g)?, &opts)
                })?;
                reports.push(Report::Gap(gap));
            }
        }
        "submodularity" => {
            expect_arity(name, densities, 3)?;
            let gap = gap_with_refinement(&grid, |g| {
                inequality::check_submodularity(
                    &build_density(&densities[0], g)?,
                    &build_density(&densities[1], g)?,
                    &build_density(&densities[2], g)?,
                    &opts,
                )
            })?;
            reports.push(Report::Gap(gap));
        }
        "fractional" => {
            if densities.len() < 2 {
                return Err(Error::Usage(
                    "check fractional needs at least two --density arguments".into(),
                ));
            }
            let k = k.ok_or_else(|| Error::Usage("check fractional requires --k".into()))?;
            let gap = gap_with_refinement(&grid, |g| {
                let fs: Vec<DensityGrid> = densities
                    .iter()
                    .map(|spec| build_density(spec, g))
                    .collect::<Result<_>>()?;
                inequality::check_fractional_superadditivity(&fs, k, &opts)
            })?;
            reports.push(Report::Gap(gap));
        }
        "golden-ratio" => {
            expect_arity(name, densities, 1)?;
            let gap = gap_with_refinement(&grid, |g| {
                inequality::check_golden_ratio_bound(&build_density(&densities[0], g)?, &opts)
            })?;
            reports.push(Report::Gap(gap));
        }
        "large-doubling" => {
            expect_arity(name, densities, 1)?;
            let gap = gap_with_refinement(&grid, |g| {
                let f = build_density(&densities[0], g)?;
                let z = match z_variance {
                    Some(v) => GaussianSpec::new(0.0, v)?,
                    None => f.matched_gaussian()?,
                };
                inequality::check_large_doubling(&f, &z, &opts)
            })?;
            reports.push(Report::Gap(gap));
        }
        "combined" => {
            expect_arity(name, densities, 1)?;
            let f = build_density(&densities[0], &grid)?;
            let (gap, branch) = inequality::check_combined_doubling(&f, &opts)?;
            let gap = if gap.satisfied {
                gap
            } else {
                let refined = build_density(&densities[0], &config.refined().grid())?;
                inequality::check_combined_doubling(&refined, &opts)?.0
            };
            reports.push(Report::Gap(gap));
            reports.push(Report::Note {
                name: "active_branch".into(),
                text: branch.to_string(),
            });
        }
        "ze-gap" => {
            expect_arity(name, densities, 2)?;
            let gap = gap_with_refinement(&grid, |g| {
                inequality::ze_gap_check(
                    &build_density(&densities[0], g)?,
                    &build_density(&densities[1], g)?,
                    &opts,
                )
            })?;
            reports.push(Report::Gap(gap));
        }
        "gaussianization" => {
            expect_arity(name, densities, 2)?;
            let fx = build_density(&densities[0], &grid)?;
            let fy = build_density(&densities[1], &grid)?;
            let gap = inequality::gaussianization_gap(&fx, &fy, &opts)?;
            reports.push(Report::Value(ValueReport::nats("gaussianization_gap", gap)));
            if gap < -opts.tolerance {
                let text = if densities[0] == densities[1] {
                    "negative gap on i.i.d. inputs: potential numerical artifact or counterexample \
                     to the open i.i.d. question"
                } else {
                    "naive Gaussian-replacement inequality fails for this pair (possible for \
                     general independent inputs)"
                };
                reports.push(Report::Note {
                    name: "gaussianization_flag".into(),
                    text: text.into(),
                });
            }
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown check `{other}` (expected epi, submodularity, fractional, golden-ratio, \
                 large-doubling, combined, ze-gap or gaussianization)"
            )));
        }
    }
    Ok(reports)
}

fn solver_for(config: &RunConfig, input_points: Option<usize>) -> CapacitySolver {
    let mut opts = SolverOptions::from_config(config);
    if let Some(p) = input_points {
        opts.input_points = p;
    }
    CapacitySolver::new(opts)
}

fn capacity_reports(
    noise: &str,
    power: f64,
    input_points: Option<usize>,
    config: &RunConfig,
) -> Result<Vec<Report>> {
    let channel = ChannelSpec::new(build_density(noise, &config.grid())?, power)?;
    let solver = solver_for(config, input_points);
    let result = solver.capacity_power_constrained(&channel)?;
    Ok(vec![
        Report::Value(ValueReport::new("snr", channel.snr())),
        Report::Capacity(result),
    ])
}

fn robustness_for_channel(
    solver: &CapacitySolver,
    channel: &ChannelSpec,
) -> Result<RobustnessReport> {
    let solve = solver.capacity_power_constrained(channel)?;
    solver.robustness_report(channel, &solve)
}

fn robustness_reports(
    noise: Option<&str>,
    power: Option<f64>,
    corpus: Option<&std::path::Path>,
    input_points: Option<usize>,
    config: &RunConfig,
) -> Result<Vec<Report>> {
    let solver = solver_for(config, input_points);
    let grid = config.grid();
    let mut reports = Vec::new();
    match corpus {
        Some(path) => {
            let entries = load_channel_corpus(&std::fs::read_to_string(path)?)?;
            for entry in entries {
                let channel = ChannelSpec::new(entry.family()?.to_grid(&grid)?, entry.power)?;
                reports.push(Report::Robustness(robustness_for_channel(&solver, &channel)?));
            }
        }
        None => {
            let noise = noise.ok_or_else(|| {
                Error::Usage("robustness needs --noise and --power, or --corpus".into())
            })?;
            let power = power.ok_or_else(|| {
                Error::Usage("robustness needs --power with --noise".into())
            })?;
            let channel = ChannelSpec::new(build_density(noise, &grid)?, power)?;
            reports.push(Report::Robustness(robustness_for_channel(&solver, &channel)?));
        }
    }
    Ok(reports)
}

/// JSON triplet file: density specs per atom plus per-user budgets.
#[derive(Debug, Deserialize)]
struct TripletFile {
    v_probs: Vec<f64>,
    x1: Vec<String>,
    x2: Vec<String>,
    #[serde(rename = "P1")]
    p1: f64,
    #[serde(rename = "P2")]
    p2: f64,
}

fn mac_reports(
    triplet_path: &std::path::Path,
    noise: &str,
    corners: bool,
    config: &RunConfig,
) -> Result<Vec<Report>> {
    let grid = config.grid();
    let file: TripletFile = serde_json::from_str(&std::fs::read_to_string(triplet_path)?)?;
    let build_all = |specs: &[String]| -> Result<Vec<DensityGrid>> {
        specs.iter().map(|s| build_density(s, &grid)).collect()
    };
    let triplet = MacTriplet::new(
        file.v_probs,
        build_all(&file.x1)?,
        build_all(&file.x2)?,
        file.p1,
        file.p2,
    )?;
    let noise_density = build_density(noise, &grid)?;
    let report = mac::check_mac_fractional_bound(&triplet, &noise_density, &grid, config.tolerance_nats)?;
    let mut reports = vec![Report::MacRates(report)];
    if corners {
        let corner_list: Vec<RatePair> = mac::mac_inner_corners(&triplet, &noise_density, &grid)?;
        reports.push(Report::RateCorners { corners: corner_list });
    }
    Ok(reports)
}

fn mimo_reports(channel_path: &std::path::Path, capacity: Option<f64>) -> Result<Vec<Report>> {
    let channel = mimo::mimo_channel_from_json(&std::fs::read_to_string(channel_path)?)?;
    let factor = mimo::mimo_robustness_factor(&channel);
    let comparison = mimo::compare_bounds(&channel, capacity)?;
    Ok(vec![
        Report::Value(ValueReport::new("snr_m", channel.snr_m())),
        Report::Value(ValueReport::new("mimo_robustness_factor", factor.value)),
        Report::Mimo(comparison),
    ])
}

fn sweep_reports(family: &str, params: &[f64], config: &RunConfig) -> Result<Vec<Report>> {
    let family: SweepFamily = family.parse()?;
    let rows = inequality::small_doubling_sweep(&family, params, &config.grid())?;
    Ok(vec![Report::Sweep { rows }])
}

/// Formats a float with six significant digits for text output.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-4..=8).contains(&exponent) {
        format!("{x:.5e}")
    } else {
        let precision = (5 - exponent).max(0) as usize;
        format!("{x:.precision$}")
    }
}

fn render(manifest: &RunManifest) -> Result<String> {
    match manifest.config.output_format {
        OutputFormat::Json => Ok(format!("{}\n", manifest.to_json()?)),
        OutputFormat::Text => Ok(render_text(manifest)),
        OutputFormat::Csv => Ok(render_csv(manifest)),
    }
}

fn render_gap_text(out: &mut String, gap: &GapReport, indent: &str) {
    out.push_str(&format!(
        "{indent}{}: lhs={} rhs={} slack={} tol={} -> {}\n",
        gap.name,
        sig6(gap.lhs),
        sig6(gap.rhs),
        sig6(gap.slack),
        sig6(gap.tolerance),
        if gap.satisfied { "satisfied" } else { "VIOLATED" }
    ));
}

fn render_text(manifest: &RunManifest) -> String {
    let mut out = String::new();
    out.push_str(&format!("# entropica {} — {}\n", manifest.version, manifest.command));
    for report in &manifest.reports {
        match report {
            Report::Gap(gap) => render_gap_text(&mut out, gap, ""),
            Report::Value(v) => {
                let unit = v.unit.as_deref().map(|u| format!(" {u}")).unwrap_or_default();
                out.push_str(&format!("{} = {}{unit}\n", v.name, sig6(v.value)));
            }
            Report::Note { name, text } => out.push_str(&format!("{name}: {text}\n")),
            Report::Capacity(c) => {
                out.push_str(&format!(
                    "capacity = {} nats (power_used={}, multiplier={}, ba_gap={}, iterations={})\n",
                    sig6(c.capacity),
                    sig6(c.power_used),
                    sig6(c.multiplier),
                    sig6(c.ba_gap),
                    c.iterations
                ));
            }
            Report::Robustness(r) => {
                out.push_str(&format!(
                    "robustness: snr={} capacity={} gaussian_mi={} additive_gap={} factor={}\n",
                    sig6(r.snr),
                    sig6(r.capacity_estimate),
                    sig6(r.gaussian_mi),
                    sig6(r.additive_gap),
                    sig6(r.multiplicative_factor)
                ));
                for gap in &r.bound_reports {
                    render_gap_text(&mut out, gap, "  ");
                }
            }
            Report::MacRates(m) => {
                for rate in &m.per_v_rates {
                    out.push_str(&format!(
                        "v={}: I1={} I2={} Isum={} snr1v={} snr2v={} snrv={}\n",
                        rate.v,
                        sig6(rate.i1),
                        sig6(rate.i2),
                        sig6(rate.isum),
                        sig6(rate.snr1v),
                        sig6(rate.snr2v),
                        sig6(rate.snrv)
                    ));
                }
                for gap in &m.bound_reports {
                    render_gap_text(&mut out, gap, "  ");
                }
            }
            Report::RateCorners { corners } => {
                for corner in corners {
                    out.push_str(&format!("corner: ({}, {})\n", sig6(corner.r1), sig6(corner.r2)));
                }
            }
            Report::Mimo(cmp) => {
                out.push_str(&format!(
                    "mimo: factor={} additive_loss={} bits, stronger_bound={:?}{}{}\n",
                    sig6(cmp.multiplicative_factor),
                    sig6(cmp.additive_loss_bits),
                    cmp.stronger_bound_at,
                    if cmp.h_singular { " [HH^T singular]" } else { "" },
                    if cmp.dims_differ { " [d_t != d_r]" } else { "" }
                ));
            }
            Report::Sweep { rows } => {
                out.push_str(StabilitySweepRow::CSV_HEADER);
                out.push('\n');
                for row in rows {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        sig6(row.parameter),
                        sig6(row.doubling_gap),
                        sig6(row.levy_distance),
                        sig6(row.relative_entropy)
                    ));
                }
            }
        }
    }
    let verdict = if manifest.all_satisfied() { "PASS" } else { "FAIL" };
    out.push_str(&format!("result: {verdict}\n"));
    out
}

fn render_csv(manifest: &RunManifest) -> String {
    let mut out = String::new();
    let gaps: Vec<&GapReport> = manifest.reports.iter().flat_map(|r| r.gap_reports()).collect();
    if !gaps.is_empty() {
        out.push_str(GapReport::CSV_HEADER);
        out.push('\n');
        for gap in gaps {
            out.push_str(&gap.csv_row());
            out.push('\n');
        }
    }
    let robustness: Vec<&RobustnessReport> = manifest
        .reports
        .iter()
        .filter_map(|r| match r {
            Report::Robustness(rob) => Some(rob),
            _ => None,
        })
        .collect();
    if !robustness.is_empty() {
        out.push_str(RobustnessReport::CSV_HEADER);
        out.push('\n');
        for rob in robustness {
            out.push_str(&rob.csv_row());
            out.push('\n');
        }
    }
    for report in &manifest.reports {
        match report {
            Report::Sweep { rows } => {
                out.push_str(StabilitySweepRow::CSV_HEADER);
                out.push('\n');
                for row in rows {
                    out.push_str(&row.csv_row());
                    out.push('\n');
                }
            }
            Report::RateCorners { corners } => {
                out.push_str(RatePair::CSV_HEADER);
                out.push('\n');
                for corner in corners {
                    out.push_str(&corner.csv_row());
                    out.push('\n');
                }
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> RunConfig {
        RunConfig {
            grid_points: 1 << 11,
            ..RunConfig::default()
        }
    }

    #[test]
    fn doubling_command_reports_sigma() {
        let manifest =
            execute_args(&["doubling", "--density", "uniform(0,1)"], &quick_config()).unwrap();
        match &manifest.reports[0] {
            Report::Value(v) => {
                assert!((v.value - std::f64::consts::E / 2.0).abs() < 1e-3);
            }
            other => panic!("unexpected report {other:?}"),
        }
        assert!(manifest.all_satisfied());
    }

    #[test]
    fn submodularity_arity_error_is_usage() {
        let err = execute_args(
            &[
                "check",
                "submodularity",
                "--density",
                "uniform(0,1)",
                "--density",
                "gaussian(0,1)",
            ],
            &quick_config(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        assert_eq!(exit_code_for(&err), 2);
    }

    #[test]
    fn unknown_check_is_usage_error() {
        let err = execute_args(&["check", "frobnicate"], &quick_config()).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn manifests_are_deterministic_modulo_timestamp() {
        let strip = |manifest: &RunManifest| {
            let mut json: serde_json::Value = serde_json::from_str(&manifest.to_json().unwrap()).unwrap();
            json.as_object_mut().unwrap().remove("timestamp");
            serde_json::to_string(&json).unwrap()
        };
        let args = ["check", "epi", "--density", "mix(0.5:gaussian(-1,1),0.5:gaussian(1,0.5))"];
        let a = execute_args(&args, &quick_config()).unwrap();
        let b = execute_args(&args, &quick_config()).unwrap();
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let manifest = execute_args(
            &["sweep", "--family", "uniform_width", "--params", "2.0,1.0"],
            &quick_config(),
        )
        .unwrap();
        let json = manifest.to_json().unwrap();
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(manifest, back);
    }

    #[test]
    fn sig6_formats_six_significant_digits() {
        assert_eq!(sig6(1.3591409), "1.35914");
        assert_eq!(sig6(0.105966), "0.105966");
        assert_eq!(sig6(1234.5678), "1234.57");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
    }

    #[test]
    fn csv_rendering_includes_gap_header() {
        let mut config = quick_config();
        config.output_format = OutputFormat::Csv;
        let manifest = execute_args(&["check", "epi", "--density", "uniform(0,1)"], &config).unwrap();
        let rendered = render(&manifest).unwrap();
        assert!(rendered.starts_with(GapReport::CSV_HEADER));
        assert!(rendered.contains("epi_doubling"));
    }

    #[test]
    fn gaussianization_command_flags_negative_pairs_only() {
        let manifest = execute_args(
            &[
                "check",
                "gaussianization",
                "--density",
                "uniform(0,1)",
                "--density",
                "uniform(0,1)",
            ],
            &quick_config(),
        )
        .unwrap();
        assert_eq!(manifest.reports.len(), 1, "positive gap should not be flagged");
    }
}
