//! One-ancilla sampling estimator: draws V1, V2 from the ensemble, evaluates
//! Re⟨ψ0|V2† O V1|ψ0⟩ (or a ±1 shot with that mean) and averages.

mod ensemble;
mod observable;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ensemble::{Draw, Ensemble, PreparedLcu, SegmentProduct};
pub use observable::{Observable, ObservableLcu, ObservableTerm};

use crate::core_algebra::{random_unit_hermitian, spectral_norm, time_evolution, DenseOperator};
use crate::error::{Error, Result};
use crate::rng::{stream, CompensatedSum, SampleRng};

/// Samples per parallel work unit. Fixed so the reduction tree, and thus the
/// result, does not depend on the thread count.
const CHUNK: u64 = 4096;
const SHOT_TOL: f64 = 1e-9;

/// Stream namespace of the numerator phase.
pub const EXPERIMENT_MU: u64 = 0;
/// Stream namespace of the normalization phase.
pub const EXPERIMENT_NORM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Shot,
    #[default]
    Expectation,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "shot" => Ok(Mode::Shot),
            "expectation" => Ok(Mode::Expectation),
            _ => Err(Error::Config(format!("unknown mode {s:?} (expected shot or expectation)"))),
        }
    }
}

/// Divisors of the per-phase precisions: the numerator runs at εℓ*/b and the
/// normalization at εℓ*/(a‖O‖). (3, 3) keeps the ratio within ε; larger
/// values leave part of ε to other error sources.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionSplit {
    pub a: f64,
    pub b: f64,
}

impl Default for PrecisionSplit {
    fn default() -> Self {
        PrecisionSplit { a: 3.0, b: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub mode: Mode,
    /// Fixed sample count per phase instead of the Hoeffding count.
    pub repetitions_override: Option<u64>,
    pub master_seed: u64,
    /// Known lower bound ℓ* on ‖f(H)ψ0‖².
    pub ell_star: f64,
    pub split: PrecisionSplit,
    /// Keep every SampleRecord in the report.
    pub collect_trace: bool,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, delta: f64, master_seed: u64) -> EstimatorConfig {
        EstimatorConfig {
            epsilon,
            delta,
            mode: Mode::Expectation,
            repetitions_override: None,
            master_seed,
            ell_star: 1.0,
            split: PrecisionSplit::default(),
            collect_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Precondition(format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Precondition(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.ell_star > 0.0) || !self.ell_star.is_finite() {
            return Err(Error::Precondition(format!("ell_star = {} must be positive", self.ell_star)));
        }
        if !(self.split.a > 1.0 && self.split.b > 0.0) {
            return Err(Error::Precondition("precision split needs a > 1 and b > 0".into()));
        }
        if self.repetitions_override == Some(0) {
            return Err(Error::Precondition("repetitions override must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    pub term_ids: (u64, u64),
    /// Per-sample value before the ‖c‖₁²·scale factor.
    pub value: f64,
    /// Cost of V1 plus cost of V2.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mu: f64,
    pub ell_tilde: f64,
    pub ratio: f64,
    #[serde(rename = "T_used")]
    pub t_used: u64,
    pub t_mu: u64,
    pub t_norm: u64,
    pub tau_max: f64,
    /// Analytic ⟨τ⟩ of one draw.
    pub avg_cost: f64,
    /// Mean sampled cost of one draw.
    pub empirical_avg_cost: f64,
    /// Standard deviation of the scaled numerator samples.
    pub empirical_std: f64,
    pub l1_norm: f64,
    pub seed: u64,
    /// Application parameters (t, γ, r, K, ...).
    pub details: BTreeMap<String, f64>,
    #[serde(skip)]
    pub trace: Vec<SampleRecord>,
}

/// Aggregate of one run of the averaging loop.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseResult {
    pub mu: f64,
    pub repetitions: u64,
    pub mean_value: f64,
    /// Sample standard deviation of ‖c‖₁²·scale·value.
    pub std_scaled: f64,
    /// Mean cost of a single draw.
    pub mean_draw_cost: f64,
    pub records: Vec<SampleRecord>,
}

/// ⌈8‖O‖² ln(2/δ) ‖c‖₁⁴ / ε²⌉.
pub fn required_repetitions(norm_o: f64, c1: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(norm_o > 0.0 && c1 > 0.0) || !norm_o.is_finite() || !c1.is_finite() {
        return Err(Error::Precondition("norms must be positive and finite".into()));
    }
    if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("epsilon = {epsilon} and delta = {delta} out of range")));
    }
    let t = 8.0 * norm_o * norm_o * (2.0 / delta).ln() * c1.powi(4) / (epsilon * epsilon);
    if !(t < 9.0e18) {
        return Err(Error::Precondition(format!("required repetitions {t:.3e} overflow")));
    }
    // absorb last-ulp noise so exact integers are not rounded up
    Ok(((t * (1.0 - 4.0 * f64::EPSILON)).ceil() as u64).max(1))
}

/// One run of the circuit with sample index `index`.
pub fn run_circuit_sample<E: Ensemble + ?Sized>(
    ens: &E,
    obs: &Observable,
    mode: Mode,
    rng: &mut SampleRng,
    index: u64,
) -> Result<SampleRecord> {
    let v1 = ens.draw(rng);
    let v2 = ens.draw(rng);
    let e = obs.realized_value(&v1.image, &v2.image, rng);
    let value = match mode {
        Mode::Expectation => e,
        Mode::Shot => {
            if !obs.is_involutory() {
                return Err(Error::Precondition("shot mode needs an observable with O² = I".into()));
            }
            if e.abs() > 1.0 + SHOT_TOL {
                return Err(Error::Precondition(format!("shot expectation {e} lies outside [-1, 1]")));
            }
            if rng.random::<f64>() < (1.0 + e) / 2.0 { 1.0 } else { -1.0 }
        }
    };
    Ok(SampleRecord { index, term_ids: (v1.term, v2.term), value, cost: v1.cost + v2.cost })
}

#[derive(Default)]
struct Chunk {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    cost: CompensatedSum,
    records: Vec<SampleRecord>,
}

/// μ = (‖c‖₁²·scale/T) Σ_j value_j over T samples, sample j drawn from the
/// stream (master_seed, experiment, j).
pub fn expectation_observable<E: Ensemble + ?Sized>(
    ens: &E,
    obs: &Observable,
    repetitions: u64,
    config: &EstimatorConfig,
    experiment: u64,
) -> Result<PhaseResult> {
    if repetitions == 0 {
        return Err(Error::Precondition("at least one repetition is needed".into()));
    }
    if obs.dim() != ens.dim() {
        return Err(Error::InvalidInput(format!("observable dimension {} differs from state dimension {}", obs.dim(), ens.dim())));
    }
    let n_chunks = repetitions.div_ceil(CHUNK);
    let chunks = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Chunk::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(repetitions) {
                let mut rng = stream(config.master_seed, experiment, i);
                let r = run_circuit_sample(ens, obs, config.mode, &mut rng, i)?;
                acc.sum.add(r.value);
                acc.sum_sq.add(r.value * r.value);
                acc.cost.add(r.cost);
                if config.collect_trace {
                    acc.records.push(r);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Chunk>>>()?;
    let mut total = Chunk::default();
    for c in chunks {
        total.sum.merge(&c.sum);
        total.sum_sq.merge(&c.sum_sq);
        total.cost.merge(&c.cost);
        total.records.extend(c.records);
    }
    let n = repetitions as f64;
    let factor = ens.l1_norm().powi(2) * obs.scale();
    let mean = total.sum.value() / n;
    let var = if repetitions > 1 { ((total.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(PhaseResult {
        mu: factor * mean,
        repetitions,
        mean_value: mean,
        std_scaled: factor * var.sqrt(),
        mean_draw_cost: total.cost.value() / (2.0 * n),
        records: total.records,
    })
}

/// Numerator μ ≈ ⟨ψ0|g†Og|ψ0⟩ and normalization ℓ̃ ≈ ‖gψ0‖², each at the
/// Hoeffding count for its precision, and their ratio.
pub fn single_ancilla_lcu<E: Ensemble + ?Sized>(ens: &E, obs: &Observable, config: &EstimatorConfig) -> Result<EstimateReport> {
    config.validate()?;
    let norm_o = obs.norm_bound();
    let c1 = ens.l1_norm();
    let eps_mu = config.epsilon * config.ell_star / config.split.b;
    let eps_norm = config.epsilon * config.ell_star / (config.split.a * norm_o);
    let (t_mu, t_norm) = match config.repetitions_override {
        Some(t) => (t, t),
        None => (required_repetitions(norm_o, c1, eps_mu, config.delta)?, required_repetitions(1.0, c1, eps_norm, config.delta)?),
    };
    let theorem_mu = required_repetitions(norm_o, c1, eps_mu, config.delta).ok();
    let theorem_norm = required_repetitions(1.0, c1, eps_norm, config.delta).ok();
    let num = expectation_observable(ens, obs, t_mu, config, EXPERIMENT_MU)?;
    let den = expectation_observable(ens, &Observable::Identity(ens.dim()), t_norm, config, EXPERIMENT_NORM)?;
    if den.mu <= eps_norm {
        return Err(Error::NormUnderflow { ell_tilde: den.mu, threshold: eps_norm });
    }
    let mut trace = num.records;
    trace.extend(den.records);
    let draws = (t_mu + t_norm) as f64;
    Ok(EstimateReport {
        mu: num.mu,
        ell_tilde: den.mu,
        ratio: num.mu / den.mu,
        t_used: t_mu + t_norm,
        t_mu,
        t_norm,
        tau_max: ens.tau_max(),
        avg_cost: ens.mean_cost(),
        empirical_avg_cost: (num.mean_draw_cost * t_mu as f64 + den.mean_draw_cost * t_norm as f64) / draws,
        empirical_std: num.std_scaled,
        l1_norm: c1,
        seed: config.master_seed,
        details: theorem_counts(&[("t_theorem_mu", theorem_mu), ("t_theorem_norm", theorem_norm)]),
        trace,
    })
}

/// Numerator only, for unitary targets where ‖gψ0‖ = 1 is known: the run
/// uses precision ε and reports ℓ̃ = 1.
pub fn unnormalized_estimate<E: Ensemble + ?Sized>(ens: &E, obs: &Observable, config: &EstimatorConfig) -> Result<EstimateReport> {
    config.validate()?;
    let c1 = ens.l1_norm();
    let t_mu = match config.repetitions_override {
        Some(t) => t,
        None => required_repetitions(obs.norm_bound(), c1, config.epsilon, config.delta)?,
    };
    let theorem = required_repetitions(obs.norm_bound(), c1, config.epsilon, config.delta).ok();
    let num = expectation_observable(ens, obs, t_mu, config, EXPERIMENT_MU)?;
    Ok(EstimateReport {
        mu: num.mu,
        ell_tilde: 1.0,
        ratio: num.mu,
        t_used: t_mu,
        t_mu,
        t_norm: 0,
        tau_max: ens.tau_max(),
        avg_cost: ens.mean_cost(),
        empirical_avg_cost: num.mean_draw_cost,
        empirical_std: num.std_scaled,
        l1_norm: c1,
        seed: config.master_seed,
        details: theorem_counts(&[("t_theorem_mu", theorem)]),
        trace: num.records,
    })
}

/// Hoeffding counts for the record, also when an override was used.
fn theorem_counts(counts: &[(&str, Option<u64>)]) -> BTreeMap<String, f64> {
    counts.iter().filter_map(|(k, v)| v.map(|t| (k.to_string(), t as f64))).collect()
}

/// Ũ = e^{iεG}U with G a random Hermitian of unit norm and ε the largest
/// value with ‖U − Ũ‖ ≤ delta_u.
pub fn perturb_unitary(u: &DenseOperator, delta_u: f64, rng: &mut SampleRng) -> Result<DenseOperator> {
    if !u.is_unitary() {
        return Err(Error::InvalidInput("perturb_unitary needs a unitary".into()));
    }
    if !(0.0..0.5).contains(&delta_u) {
        return Err(Error::Precondition(format!("delta_u = {delta_u} must lie in [0, 0.5)")));
    }
    if delta_u == 0.0 {
        return Ok(u.clone());
    }
    let g = random_unit_hermitian(u.dim(), rng);
    let dist = |eps: f64| -> Result<(f64, DenseOperator)> {
        // e^{iεG} is the time evolution of G for time −ε
        let w = time_evolution(&g, -eps)?;
        let ut = w.compose(u);
        Ok((spectral_norm(&(u.matrix() - ut.matrix())), ut))
    };
    // ‖e^{iεG} − I‖ = 2 sin(ε/2) when ‖G‖ = 1, so this bracket is tight
    let mut lo = 0.0;
    let mut hi = 2.0 * (delta_u / 2.0).asin() * (1.0 + 1e-6);
    let (mut best_d, mut best) = (0.0, u.clone());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (d, ut) = dist(mid)?;
        if d <= delta_u {
            lo = mid;
            (best_d, best) = (d, ut);
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    debug_assert!(best_d <= delta_u);
    DenseOperator::unitary(best.into_matrix())
}
