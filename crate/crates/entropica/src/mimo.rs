//! Matrix-level MIMO robustness bounds: the d-dimensional determinant-ratio
//! factor, the channel-matrix robustness factor, and the additive-loss
//! comparison. Purely analytic; no density grids.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero when
/// deciding singularity of a PSD matrix.
const EIGEN_CLAMP_RATIO: f64 = 1e-14;

/// Linear additive-noise MIMO channel Y = H X + Z with a sum power
/// constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannel {
    h: DMatrix<f64>,
    noise_cov: DMatrix<f64>,
    power: f64,
    snr_m: f64,
}

impl MimoChannel {
    pub fn new(h: DMatrix<f64>, noise_cov: DMatrix<f64>, power: f64) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::InvalidMatrix("channel matrix must be at least 1x1".into()));
        }
        if noise_cov.nrows() != h.nrows() || noise_cov.ncols() != h.nrows() {
            return Err(Error::InvalidMatrix(format!(
                "noise covariance must be {0}x{0} to match the {0} receivers",
                h.nrows()
            )));
        }
        check_symmetric_psd(&noise_cov, "noise covariance")?;
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sum power must be positive, got {power}"
            )));
        }
        let trace_n = noise_cov.trace();
        if !(trace_n > 0.0) {
            return Err(Error::InvalidMatrix("noise covariance must have positive trace".into()));
        }
        Ok(MimoChannel {
            snr_m: power / trace_n,
            h,
            noise_cov,
            power,
        })
    }

    pub fn receivers(&self) -> usize {
        self.h.nrows()
    }

    pub fn transmitters(&self) -> usize {
        self.h.ncols()
    }

    pub fn channel_matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn noise_cov(&self) -> &DMatrix<f64> {
        &self.noise_cov
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// snr_M = P / tr(N).
    pub fn snr_m(&self) -> f64 {
        self.snr_m
    }
}

/// Robustness factor of a channel, with a flag when HHᵀ is singular (the
/// bound is then vacuous but well defined: the numerator is literally zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MimoFactor {
    pub value: f64,
    pub h_singular: bool,
}

/// Which lower bound on the Gaussian-input rate binds tighter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrongerBound {
    Multiplicative,
    Additive,
    Unknown,
}

/// Side-by-side multiplicative and additive rate-loss bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub multiplicative_factor: f64,
    pub additive_loss_bits: f64,
    pub stronger_bound_at: StrongerBound,
    pub h_singular: bool,
    /// The robustness factor is stated for a square input of receiver
    /// dimension; channels with d_t ≠ d_r are evaluated verbatim and flagged.
    pub dims_differ: bool,
}

fn check_symmetric_psd(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let scale = m.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidMatrix(format!("{what} is not symmetric")));
            }
        }
    }
    let eigen = m.clone().symmetric_eigen();
    let max_eig = eigen.eigenvalues.iter().cloned().fold(0.0, f64::max);
    for &lambda in eigen.eigenvalues.iter() {
        if lambda < -1e-12 * max_eig.max(1.0) {
            return Err(Error::InvalidMatrix(format!(
                "{what} has negative eigenvalue {lambda}"
            )));
        }
    }
    Ok(())
}

/// det(M)^{1/d} of a symmetric PSD matrix, computed in the log domain from a
/// symmetric eigendecomposition, or `None` when M is singular (any
/// eigenvalue below 1e-14 of the largest).
fn det_root_psd(m: &DMatrix<f64>) -> Option<f64> {
    let d = m.nrows();
    let eigen = m.clone().symmetric_eigen();
    let max_eig = eigen.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if max_eig <= 0.0 {
        return None;
    }
    let mut log_sum = 0.0;
    for &lambda in eigen.eigenvalues.iter() {
        if lambda <= EIGEN_CLAMP_RATIO * max_eig {
            return None;
        }
        log_sum += lambda.ln();
    }
    Some((log_sum / d as f64).exp())
}

/// The d-dimensional determinant-ratio factor
/// det(K*)^{1/d} / (2 det(Kx+N)^{1/d} + det(K*)^{1/d}).
///
/// Reduces to snr/(3snr+2) in the scalar case K* = Kx = P, N = N.
pub fn dim_snr_factor(
    k_xstar: &DMatrix<f64>,
    k_x: &DMatrix<f64>,
    n: &DMatrix<f64>,
    d: usize,
) -> Result<f64> {
    for (name, m) in [("K_xstar", k_xstar), ("K_x", k_x), ("N", n)] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::InvalidMatrix(format!(
                "{name} must be {d}x{d}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_symmetric_psd(m, name)?;
    }
    let denom_root = det_root_psd(&(k_x + n))
        .ok_or_else(|| Error::InvalidMatrix("K_x + N is singular".into()))?;
    let numer_root = det_root_psd(k_xstar).unwrap_or(0.0);
    Ok(numer_root / (2.0 * denom_root + numer_root))
}

/// The channel robustness factor
/// snr_M det(HHᵀ)^{1/d_r} / (snr_M (2 tr(HHᵀ) + det(HHᵀ)^{1/d_r}) + 2).
pub fn mimo_robustness_factor(channel: &MimoChannel) -> MimoFactor {
    let hht = &channel.h * channel.h.transpose();
    match det_root_psd(&hht) {
        None => MimoFactor {
            value: 0.0,
            h_singular: true,
        },
        Some(det_root) => {
            let trace = hht.trace();
            let snr = channel.snr_m;
            MimoFactor {
                value: snr * det_root / (snr * (2.0 * trace + det_root) + 2.0),
                h_singular: false,
            }
        }
    }
}

/// Additive rate loss, in bits, of uncorrelated Gaussian inputs:
/// (d_r/2) log2(1 + d_t/d_r) when d_r ≤ d_t, else d_t/2. Continuous across
/// d_r = d_t, where both branches equal d_t/2.
pub fn philosof_zamir_additive_loss(d_r: usize, d_t: usize) -> Result<f64> {
    if d_r == 0 || d_t == 0 {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be positive, got ({d_r},{d_t})"
        )));
    }
    if d_r <= d_t {
        Ok(d_r as f64 / 2.0 * (1.0 + d_t as f64 / d_r as f64).log2())
    } else {
        Ok(d_t as f64 / 2.0)
    }
}

/// Evaluates both lower bounds on the Gaussian-input rate for one channel
/// and, when a capacity value is supplied, reports which binds tighter:
/// factor·C (multiplicative) vs C − loss (additive, converted to nats).
pub fn compare_bounds(channel: &MimoChannel, capacity_nats: Option<f64>) -> Result<BoundComparison> {
    if let Some(c) = capacity_nats {
        if !(c >= 0.0) {
            return Err(Error::OutOfRange(format!("capacity must be non-negative, got {c}")));
        }
    }
    let factor = mimo_robustness_factor(channel);
    let loss_bits = philosof_zamir_additive_loss(channel.receivers(), channel.transmitters())?;
    let stronger = match capacity_nats {
        None => StrongerBound::Unknown,
        Some(c) => {
            let multiplicative = factor.value * c;
            let additive = c - loss_bits * 2.0f64.ln();
            if multiplicative >= additive {
                StrongerBound::Multiplicative
            } else {
                StrongerBound::Additive
            }
        }
    };
    Ok(BoundComparison {
        multiplicative_factor: factor.value,
        additive_loss_bits: loss_bits,
        stronger_bound_at: stronger,
        h_singular: factor.h_singular,
        dims_differ: channel.receivers() != channel.transmitters(),
    })
}

/// JSON channel description: row-major H and N plus the sum power P.
#[derive(Debug, Deserialize, Serialize)]
pub struct MimoChannelInput {
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    pub p: f64,
}

/// Parses the JSON matrix format {H, N, P}.
pub fn mimo_channel_from_json(text: &str) -> Result<MimoChannel> {
    let input: MimoChannelInput = serde_json::from_str(text)?;
    let h = matrix_from_rows(&input.h, "H")?;
    let n = matrix_from_rows(&input.n, "N")?;
    MimoChannel::new(h, n, input.p)
}

fn matrix_from_rows(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::InvalidMatrix(format!("{name} must be non-empty")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidMatrix(format!("{name} rows have unequal lengths")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
