//! Python bindings for the entropica entropy laboratory.
//!
//! Build with `cargo build -p entropica-py --release`, rename the produced
//! `libentropica_py.so` to `entropica_py.so` somewhere on `PYTHONPATH`, and
//! `import entropica_py`. See `python/smoke_test.py` for a worked example.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use entropica::capacity::{CapacitySolver, ChannelSpec, SolverOptions};
use entropica::cli::parse_density_spec;
use entropica::config::RunConfig;
use entropica::density::{DensityGrid, GaussianSpec, GridConfig};
use entropica::inequality::{self, CheckOptions};
use entropica::mimo;
use entropica::report::GapReport;

fn to_py_err(err: entropica::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn default_grid() -> GridConfig {
    GridConfig::default()
}

/// A 1-D density tabulated on a uniform grid.
#[pyclass(name = "Density", frozen)]
struct PyDensity {
    inner: DensityGrid,
}

#[pymethods]
impl PyDensity {
    /// Builds a density from a spec string like "gaussian(0,1)",
    /// "mix(0.5:gaussian(-2,1),0.5:gaussian(2,1))" or "file:<path>".
    #[new]
    #[pyo3(signature = (spec, grid_points=None, truncation_sigmas=None))]
    fn new(spec: &str, grid_points: Option<usize>, truncation_sigmas: Option<f64>) -> PyResult<Self> {
        let mut grid = default_grid();
        if let Some(points) = grid_points {
            grid.points = points;
        }
        if let Some(sigmas) = truncation_sigmas {
            grid.truncation_sigmas = sigmas;
        }
        let family = parse_density_spec(spec).map_err(to_py_err)?;
        let inner = family.to_grid(&grid).map_err(to_py_err)?;
        Ok(PyDensity { inner })
    }

    fn entropy(&self) -> f64 {
        self.inner.entropy()
    }

    fn entropy_power(&self) -> f64 {
        self.inner.entropy_power()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    fn fisher_information(&self) -> f64 {
        self.inner.fisher_information().value
    }

    fn variance_profile(&self, radius: f64) -> f64 {
        self.inner.variance_profile(radius)
    }

    fn relative_entropy_to_gaussianity(&self) -> PyResult<f64> {
        self.inner.relative_entropy_to_gaussianity().map_err(to_py_err)
    }

    fn levy_distance_to_gaussian(&self) -> PyResult<f64> {
        Ok(self.inner.levy_distance_to_gaussian().map_err(to_py_err)?.0)
    }

    fn doubling_constant(&self) -> PyResult<f64> {
        inequality::doubling_constant(&self.inner).map_err(to_py_err)
    }

    fn convolve(&self, other: &PyDensity) -> PyResult<PyDensity> {
        let other = if (other.inner.step() - self.inner.step()).abs()
            > 1e-9 * self.inner.step().max(other.inner.step())
        {
            other.inner.resample(self.inner.step()).map_err(to_py_err)?
        } else {
            other.inner.clone()
        };
        Ok(PyDensity {
            inner: self.inner.convolve(&other).map_err(to_py_err)?,
        })
    }

    fn scale(&self, c: f64) -> PyResult<PyDensity> {
        Ok(PyDensity {
            inner: self.inner.scale(c).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Density(label='{}', points={}, step={:.3e})",
            self.inner.label(),
            self.inner.len(),
            self.inner.step()
        )
    }
}

fn gap_to_dict<'py>(py: Python<'py>, gap: &GapReport) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("name", &gap.name)?;
    dict.set_item("lhs", gap.lhs)?;
    dict.set_item("rhs", gap.rhs)?;
    dict.set_item("slack", gap.slack)?;
    dict.set_item("tolerance", gap.tolerance)?;
    dict.set_item("satisfied", gap.satisfied)?;
    dict.set_item("inputs_digest", &gap.inputs_digest)?;
    Ok(dict)
}

/// EPI in doubling form: σ[X] ≥ 1.
#[pyfunction]
fn check_epi_doubling<'py>(py: Python<'py>, f: &PyDensity) -> PyResult<Bound<'py, PyDict>> {
    let gap = inequality::check_epi_doubling(&f.inner, &CheckOptions::default()).map_err(to_py_err)?;
    gap_to_dict(py, &gap)
}

/// Golden-ratio comparison: h(X+Z) ≥ h(X+X') − ½ log(2/φ).
#[pyfunction]
fn check_golden_ratio_bound<'py>(py: Python<'py>, f: &PyDensity) -> PyResult<Bound<'py, PyDict>> {
    let gap =
        inequality::check_golden_ratio_bound(&f.inner, &CheckOptions::default()).map_err(to_py_err)?;
    gap_to_dict(py, &gap)
}

/// Sharp large-doubling bound against an exact Gaussian of given variance.
#[pyfunction]
fn check_large_doubling<'py>(
    py: Python<'py>,
    f: &PyDensity,
    z_variance: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let z = GaussianSpec::new(0.0, z_variance).map_err(to_py_err)?;
    let gap =
        inequality::check_large_doubling(&f.inner, &z, &CheckOptions::default()).map_err(to_py_err)?;
    gap_to_dict(py, &gap)
}

/// g⁻¹(y) = ½ log[e^{4y} + e^{2y} √(e^{4y}+1)].
#[pyfunction]
fn g_inverse(y: f64) -> PyResult<f64> {
    inequality::g_inverse(y).map_err(to_py_err)
}

/// Power-constrained Blahut–Arimoto capacity of the channel Y = X + Z.
#[pyfunction]
#[pyo3(signature = (noise, power, input_points=None))]
fn capacity<'py>(
    py: Python<'py>,
    noise: &PyDensity,
    power: f64,
    input_points: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let channel = ChannelSpec::new(noise.inner.clone(), power).map_err(to_py_err)?;
    let mut opts = SolverOptions::from_config(&RunConfig::default());
    if let Some(points) = input_points {
        opts.input_points = points;
    }
    let solver = CapacitySolver::new(opts);
    let result = solver.capacity_power_constrained(&channel).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("capacity", result.capacity)?;
    dict.set_item("power_used", result.power_used)?;
    dict.set_item("multiplier", result.multiplier)?;
    dict.set_item("ba_gap", result.ba_gap)?;
    dict.set_item("iterations", result.iterations)?;
    dict.set_item("snr", channel.snr())?;
    dict.set_item(
        "gaussian_mi",
        solver.gaussian_input_mi(&channel).map_err(to_py_err)?,
    )?;
    Ok(dict)
}

/// The scalar robustness factor snr/(3·snr+2).
#[pyfunction]
fn multiplicative_factor(snr: f64) -> f64 {
    entropica::capacity::multiplicative_factor(snr)
}

/// Additive rate loss in bits of uncorrelated Gaussian inputs on a MIMO
/// channel with d_r receivers and d_t transmitters.
#[pyfunction]
fn philosof_zamir_additive_loss(d_r: usize, d_t: usize) -> PyResult<f64> {
    mimo::philosof_zamir_additive_loss(d_r, d_t).map_err(to_py_err)
}

#[pymodule]
fn entropica_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensity>()?;
    m.add_function(wrap_pyfunction!(check_epi_doubling, m)?)?;
    m.add_function(wrap_pyfunction!(check_golden_ratio_bound, m)?)?;
    m.add_function(wrap_pyfunction!(check_large_doubling, m)?)?;
    m.add_function(wrap_pyfunction!(g_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(multiplicative_factor, m)?)?;
    m.add_function(wrap_pyfunction!(philosof_zamir_additive_loss, m)?)?;
    Ok(())
}
