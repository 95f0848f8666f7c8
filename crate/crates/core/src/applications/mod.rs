//! End-to-end estimators: Hamiltonian simulation, ground-state property
//! estimation and linear-system expectation values.

use serde::{Deserialize, Serialize};

use crate::core_algebra::{DenseOperator, EigenDecomposition, PauliHamiltonian, StateVector, C64};
use crate::error::{Error, Result};
use crate::estimator::{
    perturb_unitary, single_ancilla_lcu, unnormalized_estimate, EstimateReport, EstimatorConfig, Observable, PrecisionSplit,
    PreparedLcu, SegmentProduct,
};
use crate::lcu_decomp::{gaussian_lcu, hamsim_parameters, inverse_lcu, realize, taylor_segment, GaussianLcu, RealizeContext};
use crate::rng::stream;

/// Stream namespace for drawing unitary perturbations.
const EXPERIMENT_PERTURB: u64 = 2;

/// ⟨ψ_t|O|ψ_t⟩ for ψ_t = e^{−iHt}ψ0 from products of r randomly drawn
/// truncated-Taylor segments. The target is unitary, so no normalization run
/// is needed.
pub fn hamsim_estimate(h: &PauliHamiltonian, t: f64, obs: &Observable, psi0: &StateVector, config: &EstimatorConfig) -> Result<EstimateReport> {
    config.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("evolution time {t} must be finite and non-negative")));
    }
    let p = hamsim_parameters(h, t, config.epsilon, obs.norm_bound())?;
    let seg = taylor_segment(h, t, p.r, p.truncation)?;
    let ens = SegmentProduct::new(seg, psi0.clone())?;
    let mut rep = unnormalized_estimate(&ens, obs, config)?;
    rep.details.insert("t".into(), t);
    rep.details.insert("beta".into(), p.beta);
    rep.details.insert("r".into(), p.r as f64);
    rep.details.insert("truncation".into(), p.truncation as f64);
    rep.details.insert("gamma".into(), p.gamma);
    rep.details.insert("segment_l1".into(), ens.segment().segment_l1());
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct GspProblem {
    pub hamiltonian: PauliHamiltonian,
    /// Lower bound Δ on the spectral gap.
    pub gap: f64,
    /// Lower bound η on |⟨v0|ψ0⟩|.
    pub overlap: f64,
    /// E0 with |λ0 − E0| ≤ ε_g.
    pub ground_energy_estimate: f64,
    pub energy_precision: f64,
    pub initial_state: StateVector,
}

/// Hamiltonian after shifting and rescaling so its spectrum lies in [0, 1].
#[derive(Clone, Debug)]
pub struct PreparedGsp {
    pub hamiltonian: PauliHamiltonian,
    pub gap: f64,
    /// β of the shifted Hamiltonian, the divisor of the rescaling.
    pub norm_guard: f64,
}

impl GspProblem {
    pub fn new(
        hamiltonian: PauliHamiltonian,
        gap: f64,
        overlap: f64,
        ground_energy_estimate: f64,
        energy_precision: f64,
        initial_state: StateVector,
    ) -> Result<GspProblem> {
        if !(gap > 0.0) || !gap.is_finite() {
            return Err(Error::Precondition(format!("gap bound {gap} must be positive")));
        }
        if !(overlap > 0.0 && overlap <= 1.0) {
            return Err(Error::Precondition(format!("overlap bound {overlap} must lie in (0, 1]")));
        }
        if !(energy_precision >= 0.0) || !ground_energy_estimate.is_finite() {
            return Err(Error::Precondition("energy estimate and precision must be finite, precision non-negative".into()));
        }
        if hamiltonian.dim() != initial_state.dim() {
            return Err(Error::InvalidInput("Hamiltonian and initial state dimensions differ".into()));
        }
        if !initial_state.is_normalized() {
            return Err(Error::Precondition("initial state must be normalized".into()));
        }
        Ok(GspProblem { hamiltonian, gap, overlap, ground_energy_estimate, energy_precision, initial_state })
    }

    /// H ← (H − (E0 − ε_g)I)/β_shifted and Δ ← Δ/β_shifted.
    pub fn prepare(&self) -> Result<PreparedGsp> {
        let shifted = self.hamiltonian.shifted(-(self.ground_energy_estimate - self.energy_precision));
        let beta = shifted.l1_norm();
        if !(beta > 0.0) {
            return Err(Error::Precondition("shifted Hamiltonian vanishes".into()));
        }
        Ok(PreparedGsp { hamiltonian: shifted.scaled(1.0 / beta), gap: self.gap / beta, norm_guard: beta })
    }

    /// Filter time t = log(8‖O‖²(1−η²)/(ε²η²))/(2Δ²) + 1 for the prepared
    /// gap. The log is floored at 1 so t > 1 also when η = 1.
    pub fn filter_time(&self, prepared: &PreparedGsp, o_norm: f64, epsilon: f64) -> f64 {
        let eta2 = self.overlap * self.overlap;
        let arg = 8.0 * o_norm * o_norm * (1.0 - eta2) / (epsilon * epsilon * eta2);
        let log = if arg > std::f64::consts::E { arg.ln() } else { 1.0 };
        log / (2.0 * prepared.gap * prepared.gap) + 1.0
    }

    /// γ = εη²/(30‖O‖).
    pub fn lcu_accuracy(&self, o_norm: f64, epsilon: f64) -> f64 {
        epsilon * self.overlap * self.overlap / (30.0 * o_norm)
    }
}

struct GspSetup {
    prepared: PreparedGsp,
    eig: EigenDecomposition,
    gauss: GaussianLcu,
    config: EstimatorConfig,
}

fn gsp_setup(p: &GspProblem, obs: &Observable, config: &EstimatorConfig) -> Result<GspSetup> {
    config.validate()?;
    let prepared = p.prepare()?;
    let o_norm = obs.norm_bound();
    let t = p.filter_time(&prepared, o_norm, config.epsilon);
    let gauss = gaussian_lcu(t, p.lcu_accuracy(o_norm, config.epsilon))?;
    let eig = EigenDecomposition::new(&DenseOperator::hermitian(prepared.hamiltonian.to_dense())?)?;
    let mut config = config.clone();
    config.ell_star = p.overlap * p.overlap;
    config.split = PrecisionSplit { a: 5.0, b: 5.0 };
    Ok(GspSetup { prepared, eig, gauss, config })
}

fn gsp_details(rep: &mut EstimateReport, s: &GspSetup) {
    rep.tau_max = s.gauss.tau_max();
    rep.details.insert("t".into(), s.gauss.t);
    rep.details.insert("gamma".into(), s.gauss.gamma);
    rep.details.insert("M".into(), s.gauss.m as f64);
    rep.details.insert("delta_t".into(), s.gauss.delta_t);
    rep.details.insert("norm_guard".into(), s.prepared.norm_guard);
    rep.details.insert("rescaled_gap".into(), s.prepared.gap);
    rep.details.insert("ell_star".into(), s.config.ell_star);
}

/// ⟨v0|O|v0⟩ from the Gaussian filter e^{−tH²} applied to ψ0.
pub fn gsp_estimate(p: &GspProblem, obs: &Observable, config: &EstimatorConfig) -> Result<EstimateReport> {
    let s = gsp_setup(p, obs, config)?;
    let ens = PreparedLcu::new(&s.gauss.lcu, RealizeContext::Spectral(&s.eig), &p.initial_state)?;
    let mut rep = single_ancilla_lcu(&ens, obs, &s.config)?;
    gsp_details(&mut rep, &s);
    Ok(rep)
}

/// Largest per-unitary error εℓ*/(27‖h‖₁‖f(H)‖‖c‖₁) that still preserves the
/// ε guarantee.
pub fn imperfection_bound(epsilon: f64, ell_star: f64, h1: f64, f_norm: f64, c1: f64) -> f64 {
    epsilon * ell_star / (27.0 * h1 * f_norm * c1)
}

/// [`gsp_estimate`] with every term e^{−iHτ_j} replaced by a random
/// Ũ_j with ‖Ũ_j − e^{−iHτ_j}‖ ≤ delta_u. Passing `None` uses
/// [`imperfection_bound`] with ‖f(H)‖ ≤ 1.
pub fn gsp_estimate_imperfect(p: &GspProblem, obs: &Observable, config: &EstimatorConfig, delta_u: Option<f64>) -> Result<EstimateReport> {
    let s = gsp_setup(p, obs, config)?;
    let c1 = s.gauss.lcu.l1_norm();
    let du = delta_u.unwrap_or_else(|| imperfection_bound(s.config.epsilon, s.config.ell_star, obs.norm_bound(), 1.0, c1));
    let unitaries = s
        .gauss
        .lcu
        .terms()
        .iter()
        .enumerate()
        .map(|(j, t)| perturb_unitary(&realize(&t.unitary, RealizeContext::Spectral(&s.eig))?, du, &mut stream(config.master_seed, EXPERIMENT_PERTURB, j as u64)))
        .collect::<Result<Vec<_>>>()?;
    let costs = s.gauss.lcu.terms().iter().map(|t| t.unitary.cost()).collect();
    let ens = PreparedLcu::from_unitaries(s.gauss.lcu.coefficients(), costs, &unitaries, &p.initial_state)?;
    let mut rep = single_ancilla_lcu(&ens, obs, &s.config)?;
    gsp_details(&mut rep, &s);
    rep.details.insert("delta_u".into(), du);
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct QlsProblem {
    /// Eigenvalues are promised to lie in [−1, −1/κ] ∪ [1/κ, 1].
    pub hamiltonian: PauliHamiltonian,
    pub kappa: f64,
    pub b_state: StateVector,
}

impl QlsProblem {
    pub fn new(hamiltonian: PauliHamiltonian, kappa: f64, b_state: StateVector) -> Result<QlsProblem> {
        if !(kappa >= 1.0) || !kappa.is_finite() {
            return Err(Error::Precondition(format!("kappa = {kappa} must be at least 1")));
        }
        if hamiltonian.dim() != b_state.dim() {
            return Err(Error::InvalidInput("Hamiltonian and b dimensions differ".into()));
        }
        if !b_state.is_normalized() {
            return Err(Error::Precondition("b must be normalized".into()));
        }
        Ok(QlsProblem { hamiltonian, kappa, b_state })
    }

    /// γ = ε/(18‖O‖).
    pub fn lcu_accuracy(o_norm: f64, epsilon: f64) -> f64 {
        epsilon / (18.0 * o_norm)
    }
}

/// ⟨x|O|x⟩ for |x⟩ ∝ H⁻¹|b⟩ from the discretized integral representation of
/// 1/x, with ℓ* = 1.
pub fn qls_estimate(p: &QlsProblem, obs: &Observable, config: &EstimatorConfig) -> Result<EstimateReport> {
    config.validate()?;
    let gamma = QlsProblem::lcu_accuracy(obs.norm_bound(), config.epsilon);
    let inv = inverse_lcu(p.kappa, gamma)?;
    let eig = EigenDecomposition::new(&DenseOperator::hermitian(p.hamiltonian.to_dense())?)?;
    let ens = PreparedLcu::new(&inv.lcu, RealizeContext::Spectral(&eig), &p.b_state)?;
    let mut config = config.clone();
    config.ell_star = 1.0;
    let mut rep = single_ancilla_lcu(&ens, obs, &config)?;
    rep.tau_max = inv.tau_max();
    rep.details.insert("gamma".into(), gamma);
    rep.details.insert("kappa".into(), p.kappa);
    rep.details.insert("J".into(), inv.j_count as f64);
    rep.details.insert("K".into(), inv.k_count as f64);
    rep.details.insert("calibration_rounds".into(), inv.calibration_rounds as f64);
    rep.details.insert("scalar_sup_error".into(), inv.scalar_sup_error);
    // diagnostic only: the estimate above never reads it
    let x = eig.apply_function(|l| C64::new(1.0 / l, 0.0), p.b_state.amplitudes());
    rep.details.insert("ell_sq_oracle".into(), x.iter().map(|a| a.norm_sqr()).sum());
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub tau_max: f64,
    pub avg_cost: f64,
    #[serde(rename = "T")]
    pub t: u64,
    pub total: f64,
}

/// Total cost T·(2⟨τ⟩ + τ_ψ0) of all circuit runs.
pub fn cost_summary(report: &EstimateReport, psi0_cost: f64) -> CostSummary {
    CostSummary {
        tau_max: report.tau_max,
        avg_cost: report.avg_cost,
        t: report.t_used,
        total: report.t_used as f64 * (2.0 * report.avg_cost + psi0_cost),
    }
}
