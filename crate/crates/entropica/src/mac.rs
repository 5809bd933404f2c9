//! Two-user additive-noise multiple access channel: conditional mutual
//! informations for time-sharing triplets and the fractional Gaussian
//! inner-bound checks.
//!
//! Given V, the users are conditionally independent, so every rate reduces
//! to a one-dimensional computation: knowing the other user's signal removes
//! it from the sum and I(X1; Y | X2, V=v) = h(X1+Z | v) − h(Z). No joint
//! two-dimensional density is ever formed.

use serde::{Deserialize, Serialize};

use crate::density::{DensityGrid, FamilySpec, GridConfig, VARIANCE_FLOOR};
use crate::report::{GapReport, InputDigest};
use crate::{Error, Result};

/// Time-sharing triplet (V, X1, X2) with V on at most two atoms and the
/// users conditionally independent given V. Conditional densities are
/// centered at construction; per-user average power must respect the budget.
#[derive(Debug, Clone)]
pub struct MacTriplet {
    v_probabilities: Vec<f64>,
    x1_given_v: Vec<DensityGrid>,
    x2_given_v: Vec<DensityGrid>,
    p1: f64,
    p2: f64,
}

impl MacTriplet {
    pub fn new(
        v_probabilities: Vec<f64>,
        x1_given_v: Vec<DensityGrid>,
        x2_given_v: Vec<DensityGrid>,
        p1: f64,
        p2: f64,
    ) -> Result<Self> {
        let atoms = v_probabilities.len();
        if atoms == 0 || atoms > 2 {
            return Err(Error::InvalidTriplet(format!(
                "V takes at most 2 values, got {atoms} atoms"
            )));
        }
        if x1_given_v.len() != atoms || x2_given_v.len() != atoms {
            return Err(Error::InvalidTriplet(format!(
                "conditional density count must match the {atoms} atoms of V"
            )));
        }
        if v_probabilities.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidTriplet("atom probabilities must be positive".into()));
        }
        let total: f64 = v_probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTriplet(format!(
                "atom probabilities must sum to 1, got {total}"
            )));
        }
        if !(p1 > 0.0) || !(p2 > 0.0) {
            return Err(Error::InvalidTriplet("power budgets must be positive".into()));
        }
        let x1_given_v: Vec<DensityGrid> = x1_given_v.iter().map(|g| g.centered()).collect();
        let x2_given_v: Vec<DensityGrid> = x2_given_v.iter().map(|g| g.centered()).collect();
        for (user, (densities, budget)) in [(&x1_given_v, p1), (&x2_given_v, p2)].iter().enumerate() {
            let used: f64 = v_probabilities
                .iter()
                .zip(densities.iter())
                .map(|(p, g)| p * g.variance())
                .sum();
            if used > budget + 1e-9 {
                return Err(Error::InvalidTriplet(format!(
                    "user {} average power {used} exceeds budget {budget}",
                    user + 1
                )));
            }
        }
        Ok(MacTriplet {
            v_probabilities,
            x1_given_v,
            x2_given_v,
            p1,
            p2,
        })
    }

    pub fn atoms(&self) -> usize {
        self.v_probabilities.len()
    }

    pub fn v_probabilities(&self) -> &[f64] {
        &self.v_probabilities
    }

    pub fn x1_given_v(&self) -> &[DensityGrid] {
        &self.x1_given_v
    }

    pub fn x2_given_v(&self) -> &[DensityGrid] {
        &self.x2_given_v
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }
}

/// Rates and conditional SNRs for one atom of V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerAtomRates {
    pub v: usize,
    pub i1: f64,
    pub i2: f64,
    pub isum: f64,
    pub snr1v: f64,
    pub snr2v: f64,
    pub snrv: f64,
}

/// Per-atom rates plus any fractional bound reports computed from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacRatesReport {
    pub per_v_rates: Vec<PerAtomRates>,
    pub bound_reports: Vec<GapReport>,
}

impl MacRatesReport {
    /// Expectations over V of (I1, I2, Isum).
    pub fn averaged(&self, v_probabilities: &[f64]) -> (f64, f64, f64) {
        let mut acc = (0.0, 0.0, 0.0);
        for (p, r) in v_probabilities.iter().zip(self.per_v_rates.iter()) {
            acc.0 += p * r.i1;
            acc.1 += p * r.i2;
            acc.2 += p * r.isum;
        }
        acc
    }
}

/// A corner of the achievable rate region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub const CSV_HEADER: &'static str = "R1,R2";

    pub fn csv_row(&self) -> String {
        format!("{},{}", self.r1, self.r2)
    }
}

fn conditional_variance(grid: &DensityGrid, who: &str, atom: usize) -> Result<f64> {
    let v = grid.variance();
    if v < VARIANCE_FLOOR {
        return Err(Error::InvalidTriplet(format!(
            "degenerate conditional variance {v} for {who} at atom {atom}"
        )));
    }
    Ok(v)
}

fn align_to(noise: &DensityGrid, grid: &DensityGrid) -> Result<DensityGrid> {
    let rel = (grid.step() - noise.step()).abs() / grid.step().max(noise.step());
    if rel <= 1e-9 {
        Ok(grid.clone())
    } else {
        grid.resample(noise.step())
    }
}

/// Per-atom mutual informations I(X1;Y|X2,V=v), I(X2;Y|X1,V=v) and
/// I(X1,X2;Y|V=v) against a zero-mean noise density.
pub fn mac_mutual_informations(triplet: &MacTriplet, noise: &DensityGrid) -> Result<MacRatesReport> {
    let noise = noise.centered();
    let noise_entropy = noise.entropy();
    let noise_power = noise.variance();
    if noise_power < VARIANCE_FLOOR {
        return Err(Error::DegenerateVariance(noise_power, VARIANCE_FLOOR));
    }

    let mut per_v_rates = Vec::with_capacity(triplet.atoms());
    for v in 0..triplet.atoms() {
        let x1 = align_to(&noise, &triplet.x1_given_v[v])?;
        let x2 = align_to(&noise, &triplet.x2_given_v[v])?;
        let var1 = conditional_variance(&x1, "x1", v)?;
        let var2 = conditional_variance(&x2, "x2", v)?;
        let y1 = x1.convolve(&noise)?;
        let y2 = x2.convolve(&noise)?;
        let ysum = x1.convolve(&x2)?.convolve(&noise)?;
        per_v_rates.push(PerAtomRates {
            v,
            i1: y1.entropy() - noise_entropy,
            i2: y2.entropy() - noise_entropy,
            isum: ysum.entropy() - noise_entropy,
            snr1v: var1 / noise_power,
            snr2v: var2 / noise_power,
            snrv: (var1 + var2) / noise_power,
        });
    }
    Ok(MacRatesReport {
        per_v_rates,
        bound_reports: Vec::new(),
    })
}

/// Replaces each conditional density by the zero-mean Gaussian with the same
/// conditional variance. Per-component power is preserved, so the matched
/// triplet satisfies the same budgets; applying it twice is a fixed point.
pub fn matched_gaussian_triplet(triplet: &MacTriplet, grid: &GridConfig) -> Result<MacTriplet> {
    let gaussify = |densities: &[DensityGrid]| -> Result<Vec<DensityGrid>> {
        densities
            .iter()
            .map(|g| {
                FamilySpec::Gaussian {
                    mean: 0.0,
                    variance: g.variance(),
                }
                .to_grid(grid)
            })
            .collect()
    };
    MacTriplet::new(
        triplet.v_probabilities.clone(),
        gaussify(&triplet.x1_given_v)?,
        gaussify(&triplet.x2_given_v)?,
        triplet.p1,
        triplet.p2,
    )
}

/// Fractional inner-bound checks: for each of R1, R2 and R1+R2, the matched
/// Gaussian triplet's rate dominates the v-average of
/// Var/(3Var+2N) times the original rate.
pub fn check_mac_fractional_bound(
    triplet: &MacTriplet,
    noise: &DensityGrid,
    grid: &GridConfig,
    tolerance: f64,
) -> Result<MacRatesReport> {
    let noise_centered = noise.centered();
    let n_power = noise_centered.variance();
    let original = mac_mutual_informations(triplet, &noise_centered)?;
    let matched = matched_gaussian_triplet(triplet, grid)?;
    let gaussian = mac_mutual_informations(&matched, &noise_centered)?;

    let probs = triplet.v_probabilities();
    let fraction = |variance: f64| variance / (3.0 * variance + 2.0 * n_power);

    let mut lhs = [0.0f64; 3];
    let mut rhs = [0.0f64; 3];
    for (v, p) in probs.iter().enumerate() {
        let orig = &original.per_v_rates[v];
        let gauss = &gaussian.per_v_rates[v];
        let var1 = orig.snr1v * n_power;
        let var2 = orig.snr2v * n_power;
        lhs[0] += p * gauss.i1;
        lhs[1] += p * gauss.i2;
        lhs[2] += p * gauss.isum;
        rhs[0] += p * fraction(var1) * orig.i1;
        rhs[1] += p * fraction(var2) * orig.i2;
        rhs[2] += p * fraction(var1 + var2) * orig.isum;
    }

    let mut digest_builder = InputDigest::new().grid(&noise_centered);
    for v in 0..triplet.atoms() {
        digest_builder = digest_builder
            .scalar(probs[v])
            .grid(&triplet.x1_given_v[v])
            .grid(&triplet.x2_given_v[v]);
    }
    let digest = digest_builder.finish();

    let bound_reports = vec![
        GapReport::new("mac_fractional_r1", lhs[0], rhs[0], tolerance, digest.clone()),
        GapReport::new("mac_fractional_r2", lhs[1], rhs[1], tolerance, digest.clone()),
        GapReport::new("mac_fractional_sum", lhs[2], rhs[2], tolerance, digest),
    ];
    Ok(MacRatesReport {
        per_v_rates: original.per_v_rates,
        bound_reports,
    })
}

/// Corner points of the pentagon {R1 ≤ a, R2 ≤ b, R1+R2 ≤ c} built from the
/// matched-Gaussian time-sharing rates. Corners are listed counterclockwise
/// from the origin, deduplicated.
pub fn mac_inner_corners(
    triplet: &MacTriplet,
    noise: &DensityGrid,
    grid: &GridConfig,
) -> Result<Vec<RatePair>> {
    let matched = matched_gaussian_triplet(triplet, grid)?;
    let rates = mac_mutual_informations(&matched, &noise.centered())?;
    let (a, b, c) = rates.averaged(triplet.v_probabilities());
    Ok(pentagon_corners(a, b, c))
}

fn pentagon_corners(a: f64, b: f64, c: f64) -> Vec<RatePair> {
    let r1_max = a.min(c).max(0.0);
    let r2_max = b.min(c).max(0.0);
    let r2_at_r1max = b.min((c - r1_max).max(0.0));
    let r1_at_r2max = a.min((c - r2_max).max(0.0));
    let candidates = [
        RatePair { r1: 0.0, r2: 0.0 },
        RatePair { r1: r1_max, r2: 0.0 },
        RatePair { r1: r1_max, r2: r2_at_r1max },
        RatePair { r1: r1_at_r2max, r2: r2_max },
        RatePair { r1: 0.0, r2: r2_max },
    ];
    let mut corners: Vec<RatePair> = Vec::new();
    for corner in candidates {
        if corners
            .iter()
            .all(|c| (c.r1 - corner.r1).abs() > 1e-12 || (c.r2 - corner.r2).abs() > 1e-12)
        {
            corners.push(corner);
        }
    }
    corners
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{FamilySpec, GridConfig};
    use approx::assert_relative_eq;

    fn grid(spec: FamilySpec) -> DensityGrid {
        spec.to_grid(&GridConfig::default()).unwrap()
    }

    fn std_normal() -> DensityGrid {
        grid(FamilySpec::Gaussian { mean: 0.0, variance: 1.0 })
    }

    fn single_atom_gaussian() -> MacTriplet {
        MacTriplet::new(vec![1.0], vec![std_normal()], vec![std_normal()], 1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_malformed_triplets() {
        let g = std_normal();
        assert!(MacTriplet::new(vec![], vec![], vec![], 1.0, 1.0).is_err());
        assert!(MacTriplet::new(
            vec![0.4, 0.3, 0.3],
            vec![g.clone(), g.clone(), g.clone()],
            vec![g.clone(), g.clone(), g.clone()],
            1.0,
            1.0
        )
        .is_err());
        assert!(MacTriplet::new(vec![0.5, 0.4], vec![g.clone(), g.clone()], vec![g.clone(), g.clone()], 1.0, 1.0).is_err());
        // Power budget violated: a unit-variance user against P = 0.5.
        assert!(MacTriplet::new(vec![1.0], vec![g.clone()], vec![g.clone()], 0.5, 1.0).is_err());
    }

    #[test]
    fn gaussian_mac_rates_match_closed_forms() {
        let report = mac_mutual_informations(&single_atom_gaussian(), &std_normal()).unwrap();
        let rates = &report.per_v_rates[0];
        assert_relative_eq!(rates.isum, 0.5 * 3.0f64.ln(), epsilon = 2e-3);
        assert_relative_eq!(rates.i1, 0.5 * 2.0f64.ln(), epsilon = 2e-3);
        assert_relative_eq!(rates.i2, 0.5 * 2.0f64.ln(), epsilon = 2e-3);
        assert_relative_eq!(rates.snr1v, 1.0, epsilon = 1e-6);
        assert_relative_eq!(rates.snrv, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn two_atom_rates_average_per_atom_rates() {
        let hot = grid(FamilySpec::Gaussian { mean: 0.0, variance: 1.5 });
        let cold = grid(FamilySpec::Gaussian { mean: 0.0, variance: 0.5 });
        let noise = std_normal();
        let shared = MacTriplet::new(
            vec![0.3, 0.7],
            vec![hot.clone(), cold.clone()],
            vec![cold.clone(), hot.clone()],
            2.0,
            2.0,
        )
        .unwrap();
        let report = mac_mutual_informations(&shared, &noise).unwrap();
        let (avg1, _, avg_sum) = report.averaged(shared.v_probabilities());

        let atom0 = MacTriplet::new(vec![1.0], vec![hot.clone()], vec![cold.clone()], 2.0, 2.0).unwrap();
        let atom1 = MacTriplet::new(vec![1.0], vec![cold], vec![hot], 2.0, 2.0).unwrap();
        let r0 = mac_mutual_informations(&atom0, &noise).unwrap().per_v_rates[0];
        let r1 = mac_mutual_informations(&atom1, &noise).unwrap().per_v_rates[0];
        assert_relative_eq!(avg1, 0.3 * r0.i1 + 0.7 * r1.i1, epsilon = 1e-9);
        assert_relative_eq!(avg_sum, 0.3 * r0.isum + 0.7 * r1.isum, epsilon = 1e-9);
    }

    #[test]
    fn matched_triplet_is_idempotent_and_power_preserving() {
        let uniform = grid(FamilySpec::Uniform { lower: -1.0, upper: 1.0 });
        let triplet = MacTriplet::new(vec![1.0], vec![uniform.clone()], vec![std_normal()], 1.0, 1.0).unwrap();
        let cfg = GridConfig::default();
        let once = matched_gaussian_triplet(&triplet, &cfg).unwrap();
        // Uniform(-1,1) has variance 1/3 = (width)^2 / 12.
        assert_relative_eq!(once.x1_given_v[0].variance(), 1.0 / 3.0, epsilon = 1e-6);
        assert!(once.x1_given_v[0].relative_entropy_to_gaussianity().unwrap() < 1e-6);
        // Per-component power preserved.
        assert_relative_eq!(
            once.x1_given_v[0].variance(),
            triplet.x1_given_v[0].variance(),
            epsilon = 1e-9
        );
        let twice = matched_gaussian_triplet(&once, &cfg).unwrap();
        let noise = std_normal();
        let a = mac_mutual_informations(&once, &noise).unwrap();
        let b = mac_mutual_informations(&twice, &noise).unwrap();
        for (x, y) in a.per_v_rates.iter().zip(b.per_v_rates.iter()) {
            assert_relative_eq!(x.i1, y.i1, epsilon = 1e-9);
            assert_relative_eq!(x.isum, y.isum, epsilon = 1e-9);
        }
    }

    #[test]
    fn fractional_bound_all_gaussian_single_atom() {
        let report =
            check_mac_fractional_bound(&single_atom_gaussian(), &std_normal(), &GridConfig::default(), 1e-3)
                .unwrap();
        assert_eq!(report.bound_reports.len(), 3);
        for bound in &report.bound_reports {
            assert!(bound.satisfied, "{} violated", bound.name);
        }
        // R1 report: lhs = ½ log 2, rhs = (1/5)·½ log 2, slack = (4/5)·½ log 2.
        let r1 = &report.bound_reports[0];
        assert_relative_eq!(r1.lhs, 0.5 * 2.0f64.ln(), epsilon = 2e-3);
        assert_relative_eq!(r1.slack, 0.8 * 0.5 * 2.0f64.ln(), epsilon = 2e-3);
    }

    #[test]
    fn fractional_bound_uniform_conditionals() {
        let u = grid(FamilySpec::Uniform { lower: -1.5, upper: 1.5 });
        let triplet = MacTriplet::new(vec![1.0], vec![u.clone()], vec![u], 1.0, 1.0).unwrap();
        let report =
            check_mac_fractional_bound(&triplet, &std_normal(), &GridConfig::default(), 1e-3).unwrap();
        for bound in &report.bound_reports {
            assert!(bound.satisfied, "{} violated with slack {}", bound.name, bound.slack);
        }
    }

    #[test]
    fn fractional_bound_two_atoms_with_asymmetric_powers() {
        let hot = grid(FamilySpec::Gaussian { mean: 0.0, variance: 1.8 });
        let cold = grid(FamilySpec::Gaussian { mean: 0.0, variance: 0.2 });
        let triplet = MacTriplet::new(
            vec![0.5, 0.5],
            vec![hot.clone(), cold.clone()],
            vec![cold, hot],
            1.0,
            1.0,
        )
        .unwrap();
        let report =
            check_mac_fractional_bound(&triplet, &std_normal(), &GridConfig::default(), 1e-3).unwrap();
        for bound in &report.bound_reports {
            assert!(bound.satisfied);
        }
        let rates = &report.per_v_rates;
        assert!((rates[0].snr1v - rates[1].snr1v).abs() > 1.0);
    }

    #[test]
    fn corners_match_hand_computation_for_symmetric_gaussians() {
        let corners =
            mac_inner_corners(&single_atom_gaussian(), &std_normal(), &GridConfig::default()).unwrap();
        let a = 0.5 * 2.0f64.ln();
        let c = 0.5 * 3.0f64.ln();
        assert_eq!(corners.len(), 5);
        assert_relative_eq!(corners[1].r1, a, epsilon = 2e-3);
        assert_relative_eq!(corners[2].r1, a, epsilon = 2e-3);
        assert_relative_eq!(corners[2].r2, c - a, epsilon = 4e-3);
        assert_relative_eq!(corners[3].r2, a, epsilon = 2e-3);
        for corner in corners {
            assert!(corner.r1 >= 0.0 && corner.r2 >= 0.0);
        }
    }

    #[test]
    fn region_collapses_when_one_power_vanishes() {
        let weak = grid(FamilySpec::Gaussian { mean: 0.0, variance: 1e-6 });
        let triplet = MacTriplet::new(vec![1.0], vec![std_normal()], vec![weak], 1.0, 1e-5).unwrap();
        let corners = mac_inner_corners(&triplet, &std_normal(), &GridConfig::default()).unwrap();
        let r2_max = corners.iter().map(|c| c.r2).fold(0.0, f64::max);
        assert!(r2_max < 1e-4, "r2_max {r2_max}");
    }

    #[test]
    fn time_sharing_corners_dominate_atom_mixtures() {
        let hot = grid(FamilySpec::Gaussian { mean: 0.0, variance: 1.5 });
        let cold = grid(FamilySpec::Gaussian { mean: 0.0, variance: 0.5 });
        let noise = std_normal();
        let cfg = GridConfig::default();
        let shared = MacTriplet::new(
            vec![0.4, 0.6],
            vec![hot.clone(), cold.clone()],
            vec![cold.clone(), hot.clone()],
            1.5,
            1.5,
        )
        .unwrap();
        let mixed = mac_inner_corners(&shared, &noise, &cfg).unwrap();
        let atom0 = MacTriplet::new(vec![1.0], vec![hot.clone()], vec![cold.clone()], 1.5, 1.5).unwrap();
        let atom1 = MacTriplet::new(vec![1.0], vec![cold], vec![hot], 1.5, 1.5).unwrap();
        let c0 = mac_inner_corners(&atom0, &noise, &cfg).unwrap();
        let c1 = mac_inner_corners(&atom1, &noise, &cfg).unwrap();
        for i in 0..mixed.len() {
            let blend_r1 = 0.4 * c0[i].r1 + 0.6 * c1[i].r1;
            let blend_r2 = 0.4 * c0[i].r2 + 0.6 * c1[i].r2;
            assert!(mixed[i].r1 >= blend_r1 - 1e-6);
            assert!(mixed[i].r2 >= blend_r2 - 1e-6);
        }
    }

    #[test]
    fn degenerate_conditional_variance_is_an_error() {
        let spike = DensityGrid::new(0.0, 1e-9, vec![0.0, 1.0, 0.0], "spike").unwrap();
        let triplet = MacTriplet::new(vec![1.0], vec![spike], vec![std_normal()], 1.0, 1.0).unwrap();
        assert!(mac_mutual_informations(&triplet, &std_normal()).is_err());
    }
}
