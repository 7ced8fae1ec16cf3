//! Python bindings for `metrolab`.
//!
//! Built as the extension module `metrolab`. States, operators, POVMs and
//! generator networks are wrapped as classes; reports and experiment results
//! come back as plain dicts keyed by the CSV column names.

use num_complex::Complex64 as C64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use metrolab::experiments::{
    monte_carlo_mse, scenario_row, sweep_scaling, MonteCarloResult, Scenario, ScenarioKind, ScenarioParams, SweepRow,
    ALL_SCENARIOS,
};
use metrolab::generators::{self as gens, AtomicGenerator, GeneratorNetwork};
use metrolab::hilbert::{self, FockTruncation};
use metrolab::measurement::{self, OutcomeDistribution};
use metrolab::metrology::{self, REPORT_FIELDS};
use metrolab::MetroError;

create_exception!(
    metrolab,
    MetrolabError,
    PyException,
    "Numerical or validation failure; the message starts with the error kind."
);

fn err(e: MetroError) -> PyErr {
    MetrolabError::new_err(e.to_string())
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for metrolab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

#[pyclass(name = "StateVector", module = "metrolab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyStateVector(pub hilbert::StateVector);

#[pymethods]
impl PyStateVector {
    /// State on subsystems of dimensions `dims`; `normalize` rescales the amplitudes to unit norm.
    #[new]
    #[pyo3(signature = (dims, amplitudes, normalize = false))]
    fn new(dims: Vec<usize>, amplitudes: Vec<C64>, normalize: bool) -> PyResult<Self> {
        let s = if normalize {
            hilbert::StateVector::normalized(dims, amplitudes)
        } else {
            hilbert::StateVector::new(dims, amplitudes)
        };
        Ok(Self(s.py()?))
    }

    #[staticmethod]
    fn basis(dims: Vec<usize>, index: usize) -> PyResult<Self> {
        Ok(Self(hilbert::StateVector::basis(dims, index).py()?))
    }

    #[staticmethod]
    fn ghz(n: usize) -> PyResult<Self> {
        Ok(Self(hilbert::ghz_state(n).py()?))
    }

    /// `(|0> + |N>)/sqrt(2)` in a Fock space truncated at `cutoff` (default `n`).
    #[staticmethod]
    #[pyo3(signature = (n, cutoff = None))]
    fn zero_n(n: usize, cutoff: Option<usize>) -> PyResult<Self> {
        let trunc = FockTruncation::new(cutoff.unwrap_or(n)).py()?;
        Ok(Self(hilbert::zero_n_superposition(n, &trunc).py()?))
    }

    /// Coherent state; the cutoff defaults to one with negligible tail mass.
    #[staticmethod]
    #[pyo3(signature = (alpha, cutoff = None))]
    fn coherent(alpha: C64, cutoff: Option<usize>) -> PyResult<Self> {
        let mut trunc = match cutoff {
            Some(c) => FockTruncation::new(c),
            None => FockTruncation::for_mean_photons(alpha.norm_sqr()),
        }
        .py()?;
        Ok(Self(hilbert::coherent_state(alpha, &mut trunc).py()?))
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.dims().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<C64> {
        self.0.amplitudes().to_vec()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `<self|other>`.
    fn inner(&self, other: &PyStateVector) -> PyResult<C64> {
        self.0.inner(&other.0).py()
    }

    fn __len__(&self) -> usize {
        self.0.dim()
    }

    fn __repr__(&self) -> String {
        format!("StateVector(dims={:?})", self.0.dims())
    }
}

#[pyclass(name = "HermitianOperator", module = "metrolab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyOperator(pub hilbert::HermitianOperator);

#[pymethods]
impl PyOperator {
    /// Operator from a dense row-major matrix; rejects non-Hermitian input.
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(err(MetroError::Dimension("matrix must be square".into())));
        }
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(Self(hilbert::HermitianOperator::from_dense(m).py()?))
    }

    #[staticmethod]
    fn diagonal(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self(hilbert::HermitianOperator::diagonal(values).py()?))
    }

    #[staticmethod]
    fn identity(dim: usize) -> PyResult<Self> {
        Ok(Self(hilbert::HermitianOperator::identity(dim).py()?))
    }

    /// Number operator on Fock levels `0..=cutoff`.
    #[staticmethod]
    fn number(cutoff: usize) -> PyResult<Self> {
        Ok(Self(hilbert::HermitianOperator::number(cutoff).py()?))
    }

    #[staticmethod]
    fn number_power(cutoff: usize, k: i32) -> PyResult<Self> {
        Ok(Self(hilbert::HermitianOperator::number_power(cutoff, k).py()?))
    }

    /// `|a><b| + |b><a|`.
    #[staticmethod]
    fn coherence(dim: usize, a: usize, b: usize) -> PyResult<Self> {
        Ok(Self(hilbert::HermitianOperator::coherence(dim, a, b).py()?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        self.0.eigenvalues().py()
    }

    fn to_dense(&self) -> PyResult<Vec<Vec<C64>>> {
        let m = self.0.entries().py()?;
        Ok((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }

    fn apply(&self, v: Vec<C64>) -> PyResult<Vec<C64>> {
        self.0.apply(&v).py()
    }

    fn shifted(&self, c: f64) -> Self {
        Self(self.0.shifted(c))
    }

    fn __repr__(&self) -> String {
        format!("HermitianOperator(dim={})", self.0.dim())
    }
}

#[pyclass(name = "Povm", module = "metrolab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyPovm(pub measurement::Povm);

#[pymethods]
impl PyPovm {
    /// Projective measurement in the eigenbasis of `observable`.
    #[staticmethod]
    fn eigenbasis(observable: &PyOperator) -> PyResult<Self> {
        Ok(Self(measurement::Povm::eigenbasis(&observable.0).py()?))
    }

    #[staticmethod]
    fn computational(dim: usize) -> PyResult<Self> {
        Ok(Self(measurement::Povm::computational(dim).py()?))
    }

    /// Two-outcome projective readout whose Fisher information at `phi`
    /// equals the quantum Fisher information.
    #[staticmethod]
    fn phase_optimal(state: &PyStateVector, generator: &PyOperator, phi: f64) -> PyResult<Self> {
        Ok(Self(measurement::Povm::phase_optimal(&state.0, &generator.0, phi).py()?))
    }

    /// Projectors onto the given vectors plus a remainder outcome if they do not span.
    #[staticmethod]
    #[pyo3(signature = (dim, vectors, labels = None))]
    fn projective(dim: usize, vectors: Vec<Vec<C64>>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let labels = labels.unwrap_or_else(|| (0..vectors.len()).map(|i| i.to_string()).collect());
        Ok(Self(measurement::Povm::projective(dim, vectors, labels).py()?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Povm(dim={}, outcomes={:?})", self.0.dim(), self.0.labels())
    }
}

#[pyclass(name = "GeneratorNetwork", module = "metrolab", frozen, skip_from_py_object)]
pub struct PyNetwork(pub GeneratorNetwork);

fn atomic(op: Option<&PyOperator>) -> PyResult<AtomicGenerator> {
    match op {
        Some(op) => AtomicGenerator::new(op.0.clone()).py(),
        None => Ok(AtomicGenerator::unit_qubit()),
    }
}

#[pymethods]
impl PyNetwork {
    /// One query per subsystem. The atomic generator defaults to `diag(0, 1)`.
    #[staticmethod]
    #[pyo3(signature = (n, atomic_generator = None))]
    fn glm(n: usize, atomic_generator: Option<&PyOperator>) -> PyResult<Self> {
        Ok(Self(gens::build_glm(&atomic(atomic_generator)?, n).py()?))
    }

    /// One query per pair of subsystems.
    #[staticmethod]
    #[pyo3(signature = (n, atomic_generator = None))]
    fn bfcg(n: usize, atomic_generator: Option<&PyOperator>) -> PyResult<Self> {
        Ok(Self(gens::build_bfcg(&atomic(atomic_generator)?, n).py()?))
    }

    /// One query per nonempty subset of subsystems.
    #[staticmethod]
    #[pyo3(signature = (n, atomic_generator = None))]
    fn rb(n: usize, atomic_generator: Option<&PyOperator>) -> PyResult<Self> {
        Ok(Self(gens::build_rb(&atomic(atomic_generator)?, n).py()?))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn n_systems(&self) -> usize {
        self.0.n_systems()
    }

    #[getter]
    fn query_count(&self) -> usize {
        gens::query_count(&self.0)
    }

    /// The summed generator on the full register.
    fn total(&self) -> PyOperator {
        PyOperator(self.0.total().clone())
    }

    /// Subsystem indices of every term, in term order.
    fn term_sites(&self) -> Vec<Vec<usize>> {
        self.0.terms().iter().map(|t| t.sites.clone()).collect()
    }

    fn __repr__(&self) -> String {
        format!("GeneratorNetwork(kind={}, n={}, q={})", self.0.kind().name(), self.0.n_systems(), self.0.query_count())
    }
}

#[pyfunction]
fn evolve(state: &PyStateVector, generator: &PyOperator, phi: f64) -> PyResult<PyStateVector> {
    Ok(PyStateVector(hilbert::evolve(&state.0, &generator.0, phi).py()?))
}

#[pyfunction]
fn expectation(state: &PyStateVector, op: &PyOperator) -> PyResult<f64> {
    hilbert::expectation(&state.0, &op.0).py()
}

#[pyfunction]
fn variance(state: &PyStateVector, op: &PyOperator) -> PyResult<f64> {
    hilbert::variance(&state.0, &op.0).py()
}

#[pyfunction]
fn born_probabilities(state: &PyStateVector, povm: &PyPovm) -> PyResult<Vec<f64>> {
    Ok(measurement::born_probabilities(&state.0, &povm.0).py()?.probs)
}

/// `(probabilities, derivatives)` of the state evolved to `phi`.
#[pyfunction]
fn born_derivative(
    state: &PyStateVector,
    generator: &PyOperator,
    phi: f64,
    povm: &PyPovm,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let d = measurement::born_derivative(&state.0, &generator.0, phi, &povm.0).py()?;
    Ok((d.probs, d.derivs.unwrap_or_default()))
}

/// Seeded multinomial outcome counts.
#[pyfunction]
fn sample_outcomes(probs: Vec<f64>, shots: u64, seed: u64) -> PyResult<Vec<u64>> {
    measurement::sample_outcomes(&OutcomeDistribution { probs, derivs: None }, shots, seed).py()
}

#[pyfunction]
fn fisher_information(probs: Vec<f64>, derivs: Vec<f64>) -> PyResult<f64> {
    if probs.len() != derivs.len() {
        return Err(err(MetroError::Dimension("probabilities and derivatives differ in length".into())));
    }
    metrology::fisher_information(&OutcomeDistribution { probs, derivs: Some(derivs) }).py()
}

#[pyfunction]
fn qfi_pure(state: &PyStateVector, generator: &PyOperator) -> PyResult<f64> {
    metrology::qfi_pure(&state.0, &generator.0).py()
}

#[pyfunction]
fn wootters_distance(a: &PyStateVector, b: &PyStateVector) -> PyResult<f64> {
    metrology::wootters_distance(&a.0, &b.0).py()
}

#[pyfunction]
fn resource_count(state: &PyStateVector, generator: &PyOperator) -> PyResult<f64> {
    let g = gens::normalize_ground_energy(&generator.0).py()?;
    gens::resource_count(&state.0, &g).py()
}

/// First phase in `(0, phi_max]` where the evolved state is orthogonal to
/// the initial one, or `None`.
#[pyfunction]
fn orthogonalization_phase(state: &PyStateVector, generator: &PyOperator, phi_max: f64) -> PyResult<Option<f64>> {
    metrology::orthogonalization_phase(&state.0, &generator.0, phi_max).py()
}

fn report_dict<'py>(py: Python<'py>, report: &metrology::BoundReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("phi", report.phi)?;
    d.set_item("t", report.t)?;
    let errors = PyDict::new(py);
    for f in REPORT_FIELDS {
        d.set_item(f, report.value(f))?;
        if let Some(Err(e)) = report.field(f) {
            errors.set_item(f, e.to_string())?;
        }
    }
    d.set_item("errors", errors)?;
    Ok(d)
}

fn row_dict<'py>(py: Python<'py>, row: &SweepRow) -> PyResult<Bound<'py, PyDict>> {
    let d = report_dict(py, &row.report)?;
    d.set_item("scenario", row.scenario.name())?;
    d.set_item("size", row.size)?;
    d.set_item("q", row.q)?;
    Ok(d)
}

/// Bound report for a probe, generator and readout. The generator is
/// ground-normalized before resources are counted.
#[pyfunction]
#[pyo3(signature = (state, generator, phi, povm, observable = None, t = 1))]
fn bound_report<'py>(
    py: Python<'py>,
    state: &PyStateVector,
    generator: &PyOperator,
    phi: f64,
    povm: &PyPovm,
    observable: Option<&PyOperator>,
    t: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = gens::normalize_ground_energy(&generator.0).py()?;
    let r = metrology::bound_report(&state.0, &g, phi, &povm.0, observable.map(|o| &o.0), t).py()?;
    report_dict(py, &r)
}

fn scenario(name: &str, n: Option<usize>, alpha: Option<f64>, phi: Option<f64>) -> PyResult<Scenario> {
    let kind: ScenarioKind = name.parse().py()?;
    Scenario::new(kind, ScenarioParams { n, alpha, phi, ..Default::default() }).py()
}

/// `[(name, parameters, description)]` for every named scenario.
#[pyfunction]
fn scenarios() -> Vec<(&'static str, &'static str, &'static str)> {
    ALL_SCENARIOS.iter().map(|k| (k.name(), k.required_params(), k.description())).collect()
}

/// Bound report row of a named scenario.
#[pyfunction]
#[pyo3(signature = (name, n = None, alpha = None, phi = None, t = 1))]
fn run_scenario<'py>(
    py: Python<'py>,
    name: &str,
    n: Option<usize>,
    alpha: Option<f64>,
    phi: Option<f64>,
    t: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = scenario(name, n, alpha, phi)?;
    let row = py.detach(|| scenario_row(&s, t)).py()?;
    row_dict(py, &row)
}

/// Scenario at each size with the fitted log-log slope.
#[pyfunction]
#[pyo3(signature = (name, sizes, phi = None, t = 1))]
fn sweep<'py>(py: Python<'py>, name: &str, sizes: Vec<f64>, phi: Option<f64>, t: u64) -> PyResult<Bound<'py, PyDict>> {
    let s = scenario(name, None, None, phi)?;
    let result = py.detach(|| sweep_scaling(&s, &sizes, t)).py()?;
    let rows = PyList::empty(py);
    for row in &result.rows {
        rows.append(row_dict(py, row)?)?;
    }
    let d = PyDict::new(py);
    d.set_item("rows", rows)?;
    d.set_item("fitted_slope", result.fitted_slope)?;
    d.set_item("slope_column", result.slope_column)?;
    Ok(d)
}

fn mc_dict<'py>(py: Python<'py>, mc: &MonteCarloResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("scenario", mc.scenario.name())?;
    d.set_item("size", mc.size)?;
    d.set_item("phi_true", mc.phi_true)?;
    d.set_item("estimates", mc.estimates.clone())?;
    d.set_item("mse", mc.mse)?;
    d.set_item("t_shots", mc.t_shots)?;
    d.set_item("trials", mc.trials)?;
    d.set_item("seed", mc.seed)?;
    d.set_item("fisher", mc.fisher)?;
    d.set_item("crb_at_T", mc.crb_at_t)?;
    Ok(d)
}

/// Monte Carlo maximum-likelihood estimation; `phi` defaults to the
/// scenario's operating point.
#[pyfunction]
#[pyo3(signature = (name, shots = 10_000, trials = 200, seed = 42, n = None, phi = None))]
fn simulate<'py>(
    py: Python<'py>,
    name: &str,
    shots: u64,
    trials: usize,
    seed: u64,
    n: Option<usize>,
    phi: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = scenario(name, n, None, phi)?;
    let phi_true = match phi {
        Some(p) => p,
        None => s.setup().py()?.phi,
    };
    let mc = py.detach(|| monte_carlo_mse(&s, phi_true, shots, trials, seed)).py()?;
    mc_dict(py, &mc)
}

#[pymodule]
#[pyo3(name = "metrolab")]
pub fn metrolab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MetrolabError", m.py().get_type::<MetrolabError>())?;
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyPovm>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(expectation, m)?)?;
    m.add_function(wrap_pyfunction!(variance, m)?)?;
    m.add_function(wrap_pyfunction!(born_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(born_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(sample_outcomes, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_information, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_pure, m)?)?;
    m.add_function(wrap_pyfunction!(wootters_distance, m)?)?;
    m.add_function(wrap_pyfunction!(resource_count, m)?)?;
    m.add_function(wrap_pyfunction!(orthogonalization_phase, m)?)?;
    m.add_function(wrap_pyfunction!(bound_report, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
