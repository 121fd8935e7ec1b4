//! Python bindings: `import eavesprobe`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use eavesprobe as core;
use eavesprobe::sweep::{parse_grid, to_csv, OutputFormat};
use eavesprobe::verify::{run_checks, VerifyOptions};
use eavesprobe::{Basis, StrategyVariant, SweepMode};

fn value_error(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_basis(name: &str) -> PyResult<Basis> {
    match name {
        "xy" => Ok(Basis::Xy),
        "uv" => Ok(Basis::Uv),
        other => Err(PyValueError::new_err(format!(
            "unknown basis {other:?} (expected 'xy' or 'uv')"
        ))),
    }
}

fn parse_input(name: &str) -> PyResult<core::AliceInput> {
    use core::AliceInput::*;
    match name {
        "x" => Ok(X),
        "y" => Ok(Y),
        "u" => Ok(U),
        "v" => Ok(V),
        other => Err(PyValueError::new_err(format!(
            "unknown signal {other:?} (expected x, y, u or v)"
        ))),
    }
}

#[pyclass(name = "Statevector", frozen)]
struct PyStatevector {
    inner: core::Statevector,
}

#[pymethods]
impl PyStatevector {
    /// Product state from ket letters, e.g. "yxy".
    #[staticmethod]
    fn from_labels(labels: &str) -> PyResult<Self> {
        core::Statevector::from_labels(labels)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    /// Real amplitudes, qubit 0 most significant.
    #[staticmethod]
    fn from_real(amplitudes: Vec<f64>) -> PyResult<Self> {
        core::Statevector::from_real(&amplitudes)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    /// Amplitudes as `(re, im)` pairs.
    fn amplitudes(&self) -> Vec<(f64, f64)> {
        self.inner.amplitudes().iter().map(|a| (a.re, a.im)).collect()
    }

    fn apply_cnot(&self, control: usize, target: usize) -> PyResult<Self> {
        self.inner
            .apply_cnot(control, target)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    fn apply_hadamard(&self, qubit: usize) -> PyResult<Self> {
        self.inner
            .apply_hadamard(qubit)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    /// Outcome probabilities, outcome bits packed first-listed-qubit first.
    fn measurement_distribution(&self, qubits: Vec<usize>, basis: &str) -> PyResult<Vec<f64>> {
        self.inner
            .measurement_distribution(&qubits, parse_basis(basis)?)
            .map(|d| d.probs)
            .map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("Statevector({:?})", self.amplitudes())
    }
}

#[pyclass(name = "ProbeParams", frozen)]
struct PyProbeParams {
    inner: core::ProbeParams,
}

#[pymethods]
impl PyProbeParams {
    #[new]
    fn new(d_xy: f64, d_uv: f64) -> PyResult<Self> {
        core::ProbeParams::new(d_xy, d_uv)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    #[getter]
    fn d_xy(&self) -> f64 {
        self.inner.d_xy()
    }

    #[getter]
    fn d_uv(&self) -> f64 {
        self.inner.d_uv()
    }

    #[getter]
    fn delta_xy(&self) -> f64 {
        self.inner.delta_xy()
    }

    #[getter]
    fn delta_uv(&self) -> f64 {
        self.inner.delta_uv()
    }

    fn __repr__(&self) -> String {
        format!(
            "ProbeParams(d_xy={}, d_uv={})",
            self.inner.d_xy(),
            self.inner.d_uv()
        )
    }
}

#[pyclass(name = "ChannelAnalysis", frozen, get_all)]
struct PyChannelAnalysis {
    basis: String,
    error_rate: f64,
    joint: [[f64; 2]; 2],
    mutual_information_nats: f64,
    bound_nats: f64,
}

#[pyclass(name = "SessionStats", frozen)]
struct PySessionStats {
    inner: core::SessionStats,
}

#[pymethods]
impl PySessionStats {
    #[getter]
    fn n_rounds(&self) -> u64 {
        self.inner.n_rounds
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn sifted_count(&self, basis: &str) -> PyResult<u64> {
        Ok(self.inner.sifted_count(parse_basis(basis)?))
    }

    fn empirical_error_rate(&self, basis: &str) -> PyResult<Option<f64>> {
        Ok(self.inner.empirical_error_rate(parse_basis(basis)?))
    }

    fn empirical_mi(&self, basis: &str) -> PyResult<Option<f64>> {
        Ok(self.inner.empirical_mi(parse_basis(basis)?))
    }

    fn joint_counts(&self, basis: &str) -> PyResult<[[u64; 2]; 2]> {
        Ok(self.inner.joint[parse_basis(basis)?.index()])
    }

    fn sifting_rate(&self) -> f64 {
        self.inner.sifting_rate()
    }
}

#[pyfunction]
fn delta_from_d(d: f64) -> PyResult<f64> {
    core::delta_from_d(d).map_err(value_error)
}

#[pyfunction]
fn phi(z: f64) -> PyResult<f64> {
    core::phi(z).map_err(value_error)
}

#[pyfunction]
fn info_bound(d_conjugate: f64) -> PyResult<f64> {
    core::info_bound(d_conjugate).map_err(value_error)
}

#[pyfunction]
fn bsc_mutual_information(flip_prob: f64) -> PyResult<f64> {
    core::bsc_mutual_information(flip_prob).map_err(value_error)
}

#[pyfunction]
fn eve_circuit(state: &PyStatevector) -> PyResult<PyStatevector> {
    core::eve_circuit(&state.inner)
        .map(|inner| PyStatevector { inner })
        .map_err(value_error)
}

/// Register state after the circuit for signal "x", "y", "u" or "v".
#[pyfunction]
fn post_interaction_state(params: &PyProbeParams, signal: &str) -> PyResult<PyStatevector> {
    let input = parse_input(signal)?;
    Ok(PyStatevector {
        inner: core::strategy::post_interaction_state(&params.inner, input).state,
    })
}

#[pyfunction]
fn analyze_channel(params: &PyProbeParams, basis: &str) -> PyResult<PyChannelAnalysis> {
    let a = core::analyze_channel(&params.inner, parse_basis(basis)?);
    Ok(PyChannelAnalysis {
        basis: a.basis.to_string(),
        error_rate: a.error_rate,
        joint: a.joint,
        mutual_information_nats: a.mutual_information_nats,
        bound_nats: a.bound_nats,
    })
}

/// MAP decisions indexed `[e][f]`: 0, 1, "tie" or "unreachable".
#[pyfunction]
fn map_estimator<'py>(
    py: Python<'py>,
    params: &PyProbeParams,
    basis: &str,
) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
    let table = core::map_estimator(&params.inner, parse_basis(basis)?);
    table
        .iter()
        .map(|row| {
            row.iter()
                .map(|d| match d {
                    core::MapDecision::Bit(b) => Ok(b.into_pyobject(py)?.into_any()),
                    core::MapDecision::Tie => Ok("tie".into_pyobject(py)?.into_any()),
                    core::MapDecision::Unreachable => {
                        Ok("unreachable".into_pyobject(py)?.into_any())
                    }
                })
                .collect()
        })
        .collect()
}

fn parse_variant(variant: &str) -> PyResult<StrategyVariant> {
    variant.parse().map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (n_rounds, params, variant = "two", seed = 42))]
fn run_session(
    py: Python<'_>,
    n_rounds: u64,
    params: &PyProbeParams,
    variant: &str,
    seed: u64,
) -> PyResult<PySessionStats> {
    let variant = parse_variant(variant)?;
    let inner = params.inner;
    py.detach(|| core::run_session(n_rounds, &inner, variant, seed))
        .map(|inner| PySessionStats { inner })
        .map_err(value_error)
}

/// Exact per-variant joint tables: `{variant: {basis: joint}}` plus the
/// largest deviation between variants.
#[pyfunction]
fn variant_equivalence_report<'py>(
    py: Python<'py>,
    params: &PyProbeParams,
) -> PyResult<Bound<'py, PyDict>> {
    let report = core::variant_equivalence_report(&params.inner);
    let out = PyDict::new(py);
    for v in &report.variants {
        let per_basis = PyDict::new(py);
        for basis in Basis::ALL {
            let ch = v.channel(basis);
            let entry = PyDict::new(py);
            entry.set_item("joint", ch.joint)?;
            entry.set_item("error_rate", ch.error_rate)?;
            entry.set_item("mutual_information_nats", ch.mutual_information_nats)?;
            per_basis.set_item(basis.to_string(), entry)?;
        }
        out.set_item(v.variant.short_name(), per_basis)?;
    }
    out.set_item("max_joint_deviation", report.max_joint_deviation)?;
    Ok(out)
}

fn sweep_config(
    grid: &str,
    mode: &str,
    variant: &str,
    rounds: u64,
    seed: u64,
) -> PyResult<core::SweepConfig> {
    let config = core::SweepConfig {
        d_grid: parse_grid(grid).map_err(value_error)?,
        mode: mode.parse::<SweepMode>().map_err(value_error)?,
        variant: parse_variant(variant)?,
        n_rounds: rounds,
        seed,
        format: OutputFormat::Csv,
    };
    config.validate().map_err(value_error)?;
    Ok(config)
}

/// Tradeoff rows as dicts with the CSV column names.
#[pyfunction]
#[pyo3(signature = (grid = "0:0.05:0.5", mode = "sym", variant = "two", rounds = 0, seed = 42))]
fn sweep<'py>(
    py: Python<'py>,
    grid: &str,
    mode: &str,
    variant: &str,
    rounds: u64,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = sweep_config(grid, mode, variant, rounds, seed)?;
    let rows = py
        .detach(|| core::run_sweep(&config))
        .map_err(value_error)?;
    rows.iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("d_xy", p.d_xy)?;
            d.set_item("d_uv", p.d_uv)?;
            d.set_item("delta_xy", p.delta_xy)?;
            d.set_item("delta_uv", p.delta_uv)?;
            d.set_item("bound_xy_nats", p.bound_xy_nats)?;
            d.set_item("bound_uv_nats", p.bound_uv_nats)?;
            d.set_item("mi_xy_nats", p.mi_xy_nats)?;
            d.set_item("mi_uv_nats", p.mi_uv_nats)?;
            for (key, value) in [
                ("emp_err_xy", p.emp_err_xy),
                ("emp_err_uv", p.emp_err_uv),
                ("emp_mi_xy_nats", p.emp_mi_xy_nats),
                ("emp_mi_uv_nats", p.emp_mi_uv_nats),
            ] {
                if let Some(v) = value {
                    d.set_item(key, v)?;
                }
            }
            Ok(d)
        })
        .collect()
}

/// Same rows rendered as the CLI's CSV.
#[pyfunction]
#[pyo3(signature = (grid = "0:0.05:0.5", mode = "sym", variant = "two", rounds = 0, seed = 42))]
fn sweep_csv(
    py: Python<'_>,
    grid: &str,
    mode: &str,
    variant: &str,
    rounds: u64,
    seed: u64,
) -> PyResult<String> {
    let config = sweep_config(grid, mode, variant, rounds, seed)?;
    let rows = py
        .detach(|| core::run_sweep(&config))
        .map_err(value_error)?;
    Ok(to_csv(&rows))
}

/// `[(name, passed, max_deviation)]` for every self-check.
#[pyfunction]
#[pyo3(signature = (grid_density = 10))]
fn verify(grid_density: usize) -> PyResult<Vec<(String, bool, f64)>> {
    let options = VerifyOptions {
        grid_density,
        fault: None,
    };
    Ok(run_checks(&options)
        .map_err(value_error)?
        .into_iter()
        .map(|r| (r.name.to_string(), r.passed, r.max_deviation))
        .collect())
}

#[pymodule(name = "eavesprobe")]
fn eavesprobe_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStatevector>()?;
    m.add_class::<PyProbeParams>()?;
    m.add_class::<PyChannelAnalysis>()?;
    m.add_class::<PySessionStats>()?;
    m.add_function(wrap_pyfunction!(delta_from_d, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(info_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bsc_mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(eve_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(post_interaction_state, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_channel, m)?)?;
    m.add_function(wrap_pyfunction!(map_estimator, m)?)?;
    m.add_function(wrap_pyfunction!(run_session, m)?)?;
    m.add_function(wrap_pyfunction!(variant_equivalence_report, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
