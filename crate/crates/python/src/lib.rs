//! Python bindings for the randomized LCU toolkit.

use lcu_core::core_algebra::{PauliHamiltonian, C64};
use lcu_core::error::Error;
use lcu_core::estimator::{EstimatorConfig, Mode, Observable};
use lcu_core::harness::{self, Command, ExperimentConfig};
use lcu_core::walks::{self, MarkovChain, SearchConfig, SearchKind, SearchSetup};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(lcu_lab, LcuError, PyException);
create_exception!(lcu_lab, ConfigError, LcuError);
create_exception!(lcu_lab, InputError, LcuError);
create_exception!(lcu_lab, ConvergenceError, LcuError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    let err = match e.exit_code() {
        2 => ConfigError::new_err(msg),
        3 => InputError::new_err(msg),
        4 => ConvergenceError::new_err(msg),
        _ => LcuError::new_err(msg),
    };
    Python::attach(|py| {
        let _ = err.value(py).setattr("exit_code", e.exit_code());
    });
    err
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for lcu_core::error::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_python<'py, S: serde::Serialize + ?Sized>(py: Python<'py>, value: &S) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| LcuError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Qubit Hamiltonian as a real combination of Pauli strings.
#[pyclass(name = "PauliHamiltonian", module = "lcu_lab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyHamiltonian {
    inner: PauliHamiltonian,
}

#[pymethods]
impl PyHamiltonian {
    /// Parses text such as "0.3*XZI + 0.4*ZZI - 1e-2*IIY".
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyHamiltonian { inner: PauliHamiltonian::parse(text).py()? })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn l1_norm(&self) -> f64 {
        self.inner.l1_norm()
    }

    fn terms(&self) -> Vec<(f64, String)> {
        self.inner.terms().iter().map(|(c, p)| (*c, p.ops().iter().map(|o| o.as_char()).collect())).collect()
    }

    fn to_dense(&self) -> Vec<Vec<C64>> {
        let m = self.inner.to_dense();
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
    }

    fn apply(&self, state: Vec<C64>) -> PyResult<Vec<C64>> {
        if state.len() != self.inner.dim() {
            return Err(py_err(Error::InvalidInput(format!("state has length {}, expected {}", state.len(), self.inner.dim()))));
        }
        Ok(self.inner.apply(&state))
    }

    /// ⟨ψ|H|ψ⟩ for a state given in the harness notation ("0+1", "0.6,0.8").
    fn expectation(&self, state: &str) -> PyResult<f64> {
        let psi = harness::parse_state(state).py()?;
        Ok(Observable::pauli(&self.inner).py()?.expectation(psi.amplitudes()))
    }

    fn __repr__(&self) -> String {
        format!("PauliHamiltonian(n_qubits={}, terms={})", self.inner.n_qubits(), self.inner.terms().len())
    }
}

/// Parses a product state ("0+-1") or a comma separated list of reals.
#[pyfunction]
fn parse_state(text: &str) -> PyResult<Vec<C64>> {
    Ok(harness::parse_state(text).py()?.into_amplitudes())
}

/// Randomized estimate of ⟨ψ_t|O|ψ_t⟩ with ψ_t = e^{-iHt}ψ0.
#[pyfunction]
#[pyo3(signature = (hamiltonian, time, observable, state, eps=0.05, delta=0.05, seed=0, mode="expectation", repetitions=None))]
#[allow(clippy::too_many_arguments)]
fn hamsim_estimate<'py>(
    py: Python<'py>,
    hamiltonian: &PyHamiltonian,
    time: f64,
    observable: &PyHamiltonian,
    state: &str,
    eps: f64,
    delta: f64,
    seed: u64,
    mode: &str,
    repetitions: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let psi = harness::parse_state(state).py()?;
    let obs = Observable::pauli(&observable.inner).py()?;
    let mut config = EstimatorConfig::new(eps, delta, seed);
    config.mode = mode.parse::<Mode>().py()?;
    config.repetitions_override = repetitions;
    let report = py.detach(|| lcu_core::applications::hamsim_estimate(&hamiltonian.inner, time, &obs, &psi, &config)).py()?;
    to_python(py, &report)
}

/// Reversible Markov chain on a finite graph.
#[pyclass(name = "MarkovChain", module = "lcu_lab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChain {
    inner: MarkovChain,
}

#[pymethods]
impl PyChain {
    /// Row-stochastic transition matrix given as a list of rows.
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyChain { inner: MarkovChain::from_rows(&rows).py()? })
    }

    /// Accepts "cycle:N", "complete:N" or "file:path".
    #[staticmethod]
    fn graph(spec: &str) -> PyResult<Self> {
        Ok(PyChain { inner: harness::parse_graph(spec).py()? })
    }

    #[staticmethod]
    fn cycle(n: usize) -> PyResult<Self> {
        Ok(PyChain { inner: MarkovChain::cycle(n).py()? })
    }

    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        Ok(PyChain { inner: MarkovChain::complete(n).py()? })
    }

    /// Weighted undirected edges, one "u v weight" per line.
    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        Ok(PyChain { inner: MarkovChain::parse_edge_list(text).py()? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn reversible(&self) -> bool {
        self.inner.is_reversible()
    }

    #[getter]
    fn ergodic(&self) -> bool {
        self.inner.is_ergodic()
    }

    fn stationary(&self) -> Vec<f64> {
        self.inner.stationary().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        let p = self.inner.matrix();
        (0..p.nrows()).map(|r| p.row(r).iter().copied().collect()).collect()
    }

    /// The chain (I + P)/2.
    fn lazy(&self) -> PyResult<Self> {
        Ok(PyChain { inner: walks::lazy(&self.inner) })
    }

    fn hitting_time(&self, marked: Vec<usize>) -> PyResult<f64> {
        walks::hitting_time(&self.inner, &marked).py()
    }

    fn __repr__(&self) -> String {
        format!("MarkovChain(n={}, reversible={})", self.inner.n(), self.inner.is_reversible())
    }
}

fn search_kind(kind: &str) -> PyResult<SearchKind> {
    match kind {
        "power" | "1" => Ok(SearchKind::Power),
        "exp" | "2" => Ok(SearchKind::Exp),
        _ => Err(py_err(Error::Config(format!("unknown search kind {kind:?} (expected power or exp)")))),
    }
}

/// Fast-forwarded quantum walk search for a marked set.
#[pyclass(name = "WalkSearch", module = "lcu_lab", frozen, skip_from_py_object)]
struct PyWalkSearch {
    inner: SearchSetup,
}

#[pymethods]
impl PyWalkSearch {
    /// The chain is made lazy internally. T defaults to c_t times the hitting time.
    #[new]
    #[pyo3(signature = (chain, marked, kind="power", c_t=1.0, big_t=None))]
    fn new(py: Python<'_>, chain: &PyChain, marked: Vec<usize>, kind: &str, c_t: f64, big_t: Option<f64>) -> PyResult<Self> {
        let config = SearchConfig { kind: search_kind(kind)?, c_t, big_t };
        let inner = py.detach(|| SearchSetup::new(&chain.inner, &marked, &config)).py()?;
        Ok(PyWalkSearch { inner })
    }

    #[getter]
    fn hitting_time(&self) -> f64 {
        self.inner.hitting_time
    }

    #[getter]
    fn big_t(&self) -> f64 {
        self.inner.big_t
    }

    #[getter]
    fn degrees(&self) -> (usize, usize) {
        (self.inner.d, self.inner.d_prime)
    }

    #[getter]
    fn s_values(&self) -> Vec<f64> {
        self.inner.s_values.clone()
    }

    /// Exact success probability of one sampled run.
    fn success_oracle(&self, py: Python<'_>) -> f64 {
        py.detach(|| self.inner.success_oracle())
    }

    fn theorem1_slack(&self, py: Python<'_>) -> f64 {
        py.detach(|| self.inner.theorem1_slack())
    }

    /// Runs independent trials and returns (successes, mean walk steps).
    #[pyo3(signature = (trials, seed=0))]
    fn run_trials(&self, py: Python<'_>, trials: u64, seed: u64) -> (u64, f64) {
        let outcomes = py.detach(|| self.inner.run_trials(trials, seed));
        let hits = outcomes.iter().filter(|o| o.found).count() as u64;
        let steps = outcomes.iter().map(|o| o.walk_steps_applied as f64).sum::<f64>() / outcomes.len().max(1) as f64;
        (hits, steps)
    }
}

/// Success probability of the ideal (untruncated) search.
#[pyfunction]
#[pyo3(signature = (chain, marked, big_t, kind="power"))]
fn exact_search_success(chain: &PyChain, marked: Vec<usize>, big_t: f64, kind: &str) -> PyResult<f64> {
    let lazy = walks::lazy(&chain.inner);
    walks::exact_search_success(&lazy, &marked, big_t, search_kind(kind)?).py()
}

fn flags(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    if let Some(kw) = kwargs {
        for (k, v) in kw.iter() {
            let key: String = k.extract()?;
            let value = match v.extract::<bool>() {
                Ok(b) => b.to_string(),
                Err(_) => v.str()?.to_string(),
            };
            out.push((key.replace('_', "-"), value));
        }
    }
    Ok(out)
}

fn command_config(command: &str, config: Option<&str>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<ExperimentConfig> {
    let command: Command = command.parse().py()?;
    let file = match config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(Error::from).py()?),
        None => None,
    };
    harness::parse_config(command, &flags(kwargs)?, file.as_deref()).py()
}

/// Runs one experiment exactly as the `lcu` command line would and returns
/// the report as a dict. Keyword names follow the command-line flags.
#[pyfunction]
#[pyo3(signature = (command, config=None, **kwargs))]
fn run<'py>(py: Python<'py>, command: &str, config: Option<&str>, kwargs: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = command_config(command, config, kwargs)?;
    if cfg.command == Command::Sweep {
        let rows = py.detach(|| harness::sweep(&cfg)).py()?;
        return to_python(py, &rows);
    }
    let output = py.detach(|| harness::run(&cfg)).py()?;
    to_python(py, &output.report)
}

/// Sweep rows as CSV text.
#[pyfunction]
#[pyo3(signature = (config=None, **kwargs))]
fn sweep_csv(py: Python<'_>, config: Option<&str>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
    let cfg = command_config("sweep", config, kwargs)?;
    let rows = py.detach(|| harness::sweep(&cfg)).py()?;
    Ok(harness::sweep_csv(&cfg, &rows))
}

#[pymodule]
fn lcu_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("LcuError", py.get_type::<LcuError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("InputError", py.get_type::<InputError>())?;
    m.add("ConvergenceError", py.get_type::<ConvergenceError>())?;
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PyChain>()?;
    m.add_class::<PyWalkSearch>()?;
    m.add_function(wrap_pyfunction!(parse_state, m)?)?;
    m.add_function(wrap_pyfunction!(hamsim_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(exact_search_success, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    Ok(())
}
