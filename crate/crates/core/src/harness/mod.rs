//! Configuration, dispatch to the estimators, JSON reports, CSV traces and
//! parameter sweeps.

mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{key_spec, parse_config, parse_config_file, Command, ExperimentConfig, Kind, KeySpec, KEYS};

use crate::analog::{analog_gsp, analog_qls_gaussian, analog_qls_ring};
use crate::applications::{gsp_estimate, gsp_estimate_imperfect, hamsim_estimate, qls_estimate, GspProblem, QlsProblem};
use crate::core_algebra::{time_evolution, DenseOperator, EigenDecomposition, PauliHamiltonian, StateVector, C64};
use crate::error::{Error, Result};
use crate::estimator::{EstimateReport, EstimatorConfig, Mode, Observable, SampleRecord};
use crate::lcu_decomp::{chebyshev_eval, chebyshev_power_coeffs, exp_poly_coeffs, gaussian_lcu, inverse_lcu, power_degree, power_exponent};
use crate::rng::counter_hash;
use crate::walks::{exact_search_success, lazy, MarkovChain, SearchConfig, SearchKind, SearchSetup};

/// Stream namespace for per-point sweep seeds.
pub const EXPERIMENT_SWEEP: u64 = 5;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub results: Value,
    pub timings: Timings,
}

/// A report plus the per-sample records when tracing was requested.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub trace: Vec<SampleRecord>,
}

/// Product of 0, 1, + and - per qubit (first symbol is the most significant
/// qubit), or comma-separated real amplitudes that get normalized.
pub fn parse_state(text: &str) -> Result<StateVector> {
    let text = text.trim();
    if text.contains(',') {
        let amps = text
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad amplitude {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if !amps.len().is_power_of_two() || amps.len() < 2 {
            return Err(Error::InvalidInput(format!("{} amplitudes is not a qubit register", amps.len())));
        }
        return StateVector::from_real(&amps);
    }
    if text.is_empty() {
        return Err(Error::Parse("empty state".into()));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = StateVector::new(vec![C64::new(1.0, 0.0)]);
    for ch in text.chars() {
        let q = match ch {
            '0' => [1.0, 0.0],
            '1' => [0.0, 1.0],
            '+' => [h, h],
            '-' => [h, -h],
            _ => return Err(Error::Parse(format!("bad state symbol {ch:?} (expected 0, 1, + or -)"))),
        };
        out = out.kron(&StateVector::from_real(&q)?);
    }
    Ok(out)
}

fn hamiltonian(c: &ExperimentConfig) -> Result<PauliHamiltonian> {
    PauliHamiltonian::parse(c.text("hamiltonian")?)
}

fn estimator_config(c: &ExperimentConfig) -> Result<EstimatorConfig> {
    let mut e = EstimatorConfig::new(c.float("eps")?, c.float("delta")?, c.master_seed);
    e.mode = c.text("mode")?.parse::<Mode>()?;
    e.repetitions_override = c.opt_int("repetitions");
    e.collect_trace = c.trace;
    Ok(e)
}

fn gsp_problem(c: &ExperimentConfig) -> Result<GspProblem> {
    GspProblem::new(hamiltonian(c)?, c.float("gap")?, c.float("overlap")?, c.float("e0")?, c.float("eps_g")?, parse_state(c.text("state")?)?)
}

fn qls_problem(c: &ExperimentConfig) -> Result<QlsProblem> {
    QlsProblem::new(hamiltonian(c)?, c.float("kappa")?, parse_state(c.text("state")?)?)
}

fn dense(h: &PauliHamiltonian) -> Result<DenseOperator> {
    DenseOperator::hermitian(h.to_dense())
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalized projection of ψ0 onto the lowest eigenspace of H.
pub fn ground_projection(h: &PauliHamiltonian, psi0: &StateVector) -> Result<Vec<C64>> {
    let eig = EigenDecomposition::new(&dense(h)?)?;
    let l0 = eig.values()[0];
    let tol = 1e-9 * l0.abs().max(1.0);
    let coeffs = eig.to_eigenbasis(psi0.amplitudes());
    let kept: Vec<C64> = coeffs.iter().zip(eig.values()).map(|(c, l)| if (l - l0).abs() <= tol { *c } else { C64::new(0.0, 0.0) }).collect();
    let v = eig.from_eigenbasis(&kept);
    let n = norm(&v);
    if !(n > 1e-12) {
        return Err(Error::Precondition("initial state has no overlap with the ground space".into()));
    }
    Ok(v.iter().map(|a| a / n).collect())
}

/// ‖a − e^{iφ}b‖ with the phase φ that minimizes it.
fn phase_aligned_distance(a: &[C64], b: &[C64]) -> f64 {
    let ov: C64 = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x - y * phase).norm_sqr()).sum::<f64>().sqrt()
}

fn estimate_results(rep: &EstimateReport, exact: f64) -> Result<Value> {
    let mut v = serde_json::to_value(rep).map_err(|e| Error::Config(e.to_string()))?;
    let err = (rep.ratio - exact).abs();
    v["oracle"] = json!({ "exact": exact, "abs_error": err });
    v["fidelity_or_error"] = json!(err);
    Ok(v)
}

fn run_hamsim(c: &ExperimentConfig) -> Result<(Value, Vec<SampleRecord>)> {
    let h = hamiltonian(c)?;
    let obs = Observable::parse_dense(c.text("observable")?)?;
    let psi0 = parse_state(c.text("state")?)?;
    let t = c.float("time")?;
    let rep = hamsim_estimate(&h, t, &obs, &psi0, &estimator_config(c)?)?;
    let psi_t = time_evolution(&dense(&h)?, t)?.apply(psi0.amplitudes());
    let exact = obs.expectation(&psi_t);
    Ok((estimate_results(&rep, exact)?, rep.trace))
}

fn run_gsp(c: &ExperimentConfig) -> Result<(Value, Vec<SampleRecord>)> {
    let p = gsp_problem(c)?;
    let obs = Observable::parse_dense(c.text("observable")?)?;
    let cfg = estimator_config(c)?;
    let rep = match c.text("perturbation")? {
        "none" => gsp_estimate(&p, &obs, &cfg)?,
        "bound" => gsp_estimate_imperfect(&p, &obs, &cfg, None)?,
        v => {
            let du: f64 = v.parse().map_err(|_| Error::Config(format!("perturbation expects none, bound or a number, got {v:?}")))?;
            gsp_estimate_imperfect(&p, &obs, &cfg, Some(du))?
        }
    };
    let v0 = ground_projection(&p.hamiltonian, &p.initial_state)?;
    Ok((estimate_results(&rep, obs.expectation(&v0))?, rep.trace))
}

fn linear_solution(p: &QlsProblem) -> Result<Vec<C64>> {
    let eig = EigenDecomposition::new(&dense(&p.hamiltonian)?)?;
    if eig.values().iter().any(|l| l.abs() < 1e-12) {
        return Err(Error::Precondition("Hamiltonian is singular".into()));
    }
    Ok(eig.apply_function(|l| C64::new(1.0 / l, 0.0), p.b_state.amplitudes()))
}

fn run_qls(c: &ExperimentConfig) -> Result<(Value, Vec<SampleRecord>)> {
    let p = qls_problem(c)?;
    let obs = Observable::parse_dense(c.text("observable")?)?;
    let rep = qls_estimate(&p, &obs, &estimator_config(c)?)?;
    let x = linear_solution(&p)?;
    let n = norm(&x);
    let x: Vec<C64> = x.iter().map(|a| a / n).collect();
    Ok((estimate_results(&rep, obs.expectation(&x))?, rep.trace))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(e.to_string()))
}

fn run_analog_gsp(c: &ExperimentConfig) -> Result<Value> {
    let p = gsp_problem(c)?;
    let eps = c.float("eps")?;
    let rep = analog_gsp(&p, eps)?;
    let v0 = ground_projection(&p.hamiltonian, &p.initial_state)?;
    let prepared = p.prepare()?;
    let t = rep.big_t * rep.big_t / 2.0;
    let eig = EigenDecomposition::new(&dense(&prepared.hamiltonian)?)?;
    let filtered = eig.apply_function(|l| C64::new((-t * l * l).exp(), 0.0), p.initial_state.amplitudes());
    let oracle_success = norm(&filtered).powi(2);
    let ov: C64 = v0.iter().zip(&rep.state).map(|(a, b)| a.conj() * b).sum();
    let mut v = to_value(&rep)?;
    v["fidelity_or_error"] = json!(phase_aligned_distance(&rep.state, &v0));
    v["fidelity"] = json!(ov.norm_sqr());
    v["oracle_success"] = json!(oracle_success);
    v["success_relative_error"] = json!((rep.success_prob - oracle_success).abs() / oracle_success);
    Ok(v)
}

fn run_analog_qls(c: &ExperimentConfig) -> Result<Value> {
    let p = qls_problem(c)?;
    let eps = c.float("eps")?;
    let ancilla = c.text("ancilla")?;
    let rep = match ancilla {
        "ring" => analog_qls_ring(&p, eps)?,
        "gaussian" => analog_qls_gaussian(&p, eps)?,
        other => return Err(Error::Config(format!("ancilla expects ring or gaussian, got {other:?}"))),
    };
    let x = linear_solution(&p)?;
    let target: Vec<C64> = x.iter().map(|a| a / rep.big_t).collect();
    let err = rep.state.iter().zip(&target).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let mut v = to_value(&rep)?;
    v["ancilla"] = json!(ancilla);
    v["fidelity_or_error"] = json!(err);
    v["error_bound"] = json!(if ancilla == "ring" { 2.0 * eps / rep.big_t } else { eps / rep.big_t });
    v["component"] = json!(rep.state.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>());
    Ok(v)
}

/// cycle:N, complete:N or file:<path>.
pub fn parse_graph(spec: &str) -> Result<MarkovChain> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| Error::Config(format!("graph {spec:?} must be cycle:N, complete:N or file:<path>")))?;
    let size = || arg.parse::<usize>().map_err(|_| Error::Config(format!("bad node count {arg:?}")));
    match kind {
        "cycle" => MarkovChain::cycle(size()?),
        "complete" => MarkovChain::complete(size()?),
        "file" => MarkovChain::parse_edge_list(&std::fs::read_to_string(arg)?),
        _ => Err(Error::Config(format!("unknown graph kind {kind:?}"))),
    }
}

fn parse_marked(text: &str) -> Result<Vec<usize>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|v| v.trim().parse().map_err(|_| Error::Config(format!("bad marked node {v:?}")))).collect()
}

fn run_walks(c: &ExperimentConfig) -> Result<Value> {
    let chain = parse_graph(c.text("graph")?)?;
    let marked = parse_marked(c.text("marked")?)?;
    let kind = match c.int("algo")? {
        1 => SearchKind::Power,
        2 => SearchKind::Exp,
        a => return Err(Error::Config(format!("algo expects 1 or 2, got {a}"))),
    };
    let cfg = SearchConfig { kind, c_t: c.float("c_t")?, big_t: c.opt_float("big_t") };
    let setup = SearchSetup::new(&chain, &marked, &cfg)?;
    let trials = c.int("trials")?;
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let runs = setup.run_trials(trials, c.master_seed);
    let found = runs.iter().filter(|o| o.found).count();
    let rate = found as f64 / trials as f64;
    let q = setup.success_oracle();
    let sigma = (q * (1.0 - q) / trials as f64).sqrt();
    let ideal = exact_search_success(&lazy(&chain), setup.marked(), setup.big_t, kind)?;
    Ok(json!({
        "HT": setup.hitting_time,
        "T": setup.big_t,
        "empirical_success": rate,
        "oracle_success": q,
        "theorem1_slack": setup.theorem1_slack(),
        "sigma": sigma,
        "z_score": if sigma > 0.0 { (rate - q) / sigma } else { 0.0 },
        "found": found,
        "trials": trials,
        "d": setup.d,
        "d_prime": setup.d_prime,
        "s_values": setup.s_values,
        "ideal_success": ideal,
        "marked_mass": setup.marked_mass,
        "max_walk_steps": runs.iter().map(|o| o.walk_steps_applied).max().unwrap_or(0),
        "fidelity_or_error": (rate - q).abs(),
    }))
}

fn run_decomp(c: &ExperimentConfig) -> Result<Value> {
    let eps = c.float("eps")?;
    let points = c.int("points")? as usize;
    if points < 2 {
        return Err(Error::Config("points must be at least 2".into()));
    }
    let t = c.float("t")?;
    let kind = c.text("kind")?;
    Ok(match kind {
        "gaussian" => {
            let g = gaussian_lcu(t, eps)?;
            let err = g.scalar_sup_error(points);
            json!({ "kind": kind, "t": t, "gamma": eps, "M": g.m, "terms": g.lcu.len(), "delta_t": g.delta_t,
                    "l1_norm": g.lcu.l1_norm(), "tau_max": g.tau_max(), "scalar_sup_error": err, "fidelity_or_error": err })
        }
        "inverse" => {
            let kappa = c.float("kappa")?;
            let inv = inverse_lcu(kappa, eps)?;
            json!({ "kind": kind, "kappa": kappa, "gamma": eps, "J": inv.j_count, "K": inv.k_count, "delta_y": inv.delta_y,
                    "delta_z": inv.delta_z, "gamma_internal": inv.gamma_internal, "calibration_rounds": inv.calibration_rounds,
                    "terms": inv.lcu.len(), "l1_norm": inv.lcu.l1_norm(), "tau_max": inv.tau_max(),
                    "scalar_sup_error": inv.scalar_sup_error, "fidelity_or_error": inv.scalar_sup_error })
        }
        "chebyshev" => {
            if t.fract() != 0.0 || t < 0.0 {
                return Err(Error::Config(format!("chebyshev power t = {t} must be a non-negative integer")));
            }
            let ti = t as usize;
            let d = c.opt_int("degree").map(|d| d as usize).unwrap_or_else(|| power_degree(ti, eps));
            let coeffs = chebyshev_power_coeffs(ti, d);
            let mut dense_coeffs = vec![0.0; ti + 1];
            for (l, v) in coeffs.iter().enumerate() {
                dense_coeffs[power_exponent(ti, l)] = *v;
            }
            let err = (0..points)
                .map(|k| -1.0 + 2.0 * k as f64 / (points - 1) as f64)
                .map(|x| (x.powi(ti as i32) - chebyshev_eval(&dense_coeffs, x)).abs())
                .fold(0.0, f64::max);
            json!({ "kind": kind, "t": ti, "eps": eps, "degree": d, "terms": coeffs.len(), "l1_norm": coeffs.iter().sum::<f64>(),
                    "bound": 2.0 * (-((d * d) as f64) / (2.0 * t)).exp(), "scalar_sup_error": err, "fidelity_or_error": err })
        }
        "exp" => {
            let e = exp_poly_coeffs(t, eps)?;
            let err = e.sup_error(points);
            json!({ "kind": kind, "t": t, "eps": eps, "d": e.d, "d_prime": e.d_prime, "terms": e.coeffs.len(),
                    "l1_norm": e.l1_norm(), "poisson_mass": e.poisson.iter().sum::<f64>(), "scalar_sup_error": err, "fidelity_or_error": err })
        }
        other => return Err(Error::Config(format!("kind expects gaussian, inverse, chebyshev or exp, got {other:?}"))),
    })
}

fn dispatch(c: &ExperimentConfig) -> Result<(Value, Vec<SampleRecord>)> {
    match c.command {
        Command::Hamsim => run_hamsim(c),
        Command::Gsp => run_gsp(c),
        Command::Qls => run_qls(c),
        Command::AnalogGsp => Ok((run_analog_gsp(c)?, Vec::new())),
        Command::AnalogQls => Ok((run_analog_qls(c)?, Vec::new())),
        Command::WalksSearch => Ok((run_walks(c)?, Vec::new())),
        Command::DecompCheck => Ok((run_decomp(c)?, Vec::new())),
        Command::Sweep => {
            let rows = sweep(c)?;
            Ok((json!({ "axis": c.text("axis")?, "target": c.text("target")?, "rows": rows }), Vec::new()))
        }
    }
}

/// Runs one experiment. Identical configurations give identical `results`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let (results, trace) = dispatch(config)?;
    Ok(RunOutput {
        report: RunReport {
            version: VERSION.to_string(),
            command: config.command.name().to_string(),
            config: config.echo(),
            results,
            timings: Timings { wall_seconds: start.elapsed().as_secs_f64() },
        },
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub value: String,
    pub seed: u64,
    /// Numeric results, nested objects flattened with '.'.
    pub metrics: BTreeMap<String, f64>,
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, f64>) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                out.insert(prefix.to_string(), x);
            }
        }
        Value::Bool(b) => {
            out.insert(prefix.to_string(), if *b { 1.0 } else { 0.0 });
        }
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        _ => {}
    }
}

/// Runs the target command once per value of the axis key. Point i uses the
/// seed counter_hash(master, sweep, i), so points never share streams.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let target: Command = config.text("target")?.parse()?;
    let axis = config.text("axis")?.to_string();
    let mut base = config.clone();
    base.command = target;
    for k in ["target", "axis", "values"] {
        base.values.remove(k);
    }
    base.trace = false;
    config.text("values")?
        .split(',')
        .map(str::trim)
        .enumerate()
        .map(|(i, value)| {
            let seed = counter_hash(config.master_seed, EXPERIMENT_SWEEP, i as u64);
            let point = base.with_value(&axis, value)?.with_value("seed", &seed.to_string())?;
            let (results, _) = dispatch(&point)?;
            let mut metrics = BTreeMap::new();
            flatten("", &results, &mut metrics);
            Ok(SweepRow { value: value.to_string(), seed, metrics })
        })
        .collect()
}

/// CSV with the resolved configuration as leading '#' lines. Columns are the
/// union of metric names; missing entries stay empty.
pub fn sweep_csv(config: &ExperimentConfig, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for (k, v) in &config.values {
        let _ = writeln!(out, "# {k}={v}");
    }
    let mut cols: Vec<&String> = rows.iter().flat_map(|r| r.metrics.keys()).collect();
    cols.sort();
    cols.dedup();
    let axis = config.values.get("axis").map(String::as_str).unwrap_or("value");
    let _ = write!(out, "{axis},seed");
    for c in &cols {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{}", r.value, r.seed);
        for c in &cols {
            match r.metrics.get(*c) {
                Some(x) => {
                    let _ = write!(out, ",{x:.16e}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// index,term1,term2,value,cost per sample, floats with 17 significant digits.
pub fn trace_csv(trace: &[SampleRecord]) -> String {
    let mut out = String::from("index,term1,term2,value,cost\n");
    for r in trace {
        let _ = writeln!(out, "{},{},{},{:.16e},{:.16e}", r.index, r.term_ids.0, r.term_ids.1, r.value, r.cost);
    }
    out
}

pub fn report_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report values are finite JSON")
}

/// Writes the report (CSV for sweeps) to `out` or returns it for stdout, and
/// the trace to `<out>.trace.csv`.
pub fn write_outputs(config: &ExperimentConfig, output: &RunOutput) -> Result<Option<String>> {
    let body = if config.command == Command::Sweep {
        let rows: Vec<SweepRow> = serde_json::from_value(output.report.results["rows"].clone()).map_err(|e| Error::Config(e.to_string()))?;
        sweep_csv(config, &rows)
    } else {
        report_json(&output.report) + "\n"
    };
    if config.trace && config.out.is_none() {
        return Err(Error::Config("trace output needs an output path".into()));
    }
    match &config.out {
        Some(path) => {
            std::fs::write(path, body)?;
            if config.trace {
                std::fs::write(format!("{path}.trace.csv"), trace_csv(&output.trace))?;
            }
            Ok(None)
        }
        None => Ok(Some(body)),
    }
}
