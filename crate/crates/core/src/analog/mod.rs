//! Continuous-variable ancillas on position grids: a system coupled to one
//! or two qumodes through H⊗ẑ or H⊗ŷ⊗ẑ, followed by post-selection.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::applications::{GspProblem, QlsProblem};
use crate::core_algebra::{DenseOperator, EigenDecomposition, StateVector, C64};
use crate::error::{Error, Result};
use crate::rng::{stream, CompensatedSum};

/// Largest materialized hybrid state, in complex amplitudes.
const MAX_HYBRID_AMPS: usize = 100_000_000;
const DEFAULT_POINTS: usize = 4096;
/// Phase recurrences are re-seeded this often to bound rounding drift.
const RESEED: usize = 256;
/// Share of the error budget a grid refinement may move a result.
const CONVERGENCE_SHARE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// Uniform points on [−z_max, z_max] with trapezoid weights.
    Line,
    /// Uniform points on [0, 1] with Simpson weights (odd point count).
    Ring,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QumodeGrid {
    kind: GridKind,
    z_max: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridInfo {
    pub kind: GridKind,
    pub n: usize,
    pub z_max: f64,
}

impl QumodeGrid {
    pub fn line(z_max: f64, n: usize) -> Result<QumodeGrid> {
        if !(z_max > 0.0) || !z_max.is_finite() || n < 3 {
            return Err(Error::InvalidInput(format!("line grid needs z_max > 0 and at least 3 points (got {z_max}, {n})")));
        }
        let h = 2.0 * z_max / (n - 1) as f64;
        let points = (0..n).map(|i| if i + 1 == n { z_max } else { -z_max + h * i as f64 }).collect();
        let mut weights = vec![h; n];
        weights[0] = h / 2.0;
        weights[n - 1] = h / 2.0;
        Ok(QumodeGrid { kind: GridKind::Line, z_max, points, weights })
    }

    pub fn ring(n: usize) -> Result<QumodeGrid> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("ring grid needs an odd point count of at least 3 (got {n})")));
        }
        let h = 1.0 / (n - 1) as f64;
        let points = (0..n).map(|i| if i + 1 == n { 1.0 } else { h * i as f64 }).collect();
        let weights = (0..n)
            .map(|i| {
                let f = if i == 0 || i + 1 == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                f * h / 3.0
            })
            .collect();
        Ok(QumodeGrid { kind: GridKind::Ring, z_max: 1.0, points, weights })
    }

    /// z_max = 8 + √(2 ln(1/ε)), 4096 points.
    pub fn default_line(epsilon: f64) -> Result<QumodeGrid> {
        QumodeGrid::line(default_z_max(epsilon), DEFAULT_POINTS)
    }

    pub fn default_ring() -> QumodeGrid {
        QumodeGrid::ring(DEFAULT_POINTS + 1).expect("odd count")
    }

    /// Twice the points, and for lines a 25% wider range.
    pub fn refined(&self) -> QumodeGrid {
        match self.kind {
            GridKind::Line => QumodeGrid::line(1.25 * self.z_max, 2 * self.len()).expect("valid grid"),
            GridKind::Ring => QumodeGrid::ring(2 * (self.len() - 1) + 1).expect("valid grid"),
        }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.points[1] - self.points[0]
    }

    pub fn info(&self) -> GridInfo {
        GridInfo { kind: self.kind, n: self.len(), z_max: self.z_max }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(z, w)| w * f(*z)).collect::<CompensatedSum>().value()
    }
}

pub fn default_z_max(epsilon: f64) -> f64 {
    8.0 + (2.0 * (1.0 / epsilon).ln().max(0.0)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaKind {
    /// ∝ e^{−z²/4}
    GaussianGround,
    /// ∝ z·e^{−z²/4}
    HarmonicFirstExcited,
    /// ∝ 1
    RingFlat,
}

/// Real ancilla wavefunction sampled on a grid, normalized under the grid's
/// quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct AncillaState {
    kind: AncillaKind,
    grid: QumodeGrid,
    amps: Vec<f64>,
}

impl AncillaState {
    pub fn new(kind: AncillaKind, grid: &QumodeGrid) -> AncillaState {
        let f = |z: f64| match kind {
            AncillaKind::GaussianGround => (-z * z / 4.0).exp(),
            AncillaKind::HarmonicFirstExcited => z * (-z * z / 4.0).exp(),
            AncillaKind::RingFlat => 1.0,
        };
        let raw: Vec<f64> = grid.points().iter().map(|z| f(*z)).collect();
        let n2 = grid.weights().iter().zip(&raw).map(|(w, a)| w * a * a).sum::<f64>();
        let s = 1.0 / n2.sqrt();
        AncillaState { kind, grid: grid.clone(), amps: raw.iter().map(|a| a * s).collect() }
    }

    pub fn gaussian_ground(grid: &QumodeGrid) -> AncillaState {
        AncillaState::new(AncillaKind::GaussianGround, grid)
    }

    pub fn harmonic_first_excited(grid: &QumodeGrid) -> AncillaState {
        AncillaState::new(AncillaKind::HarmonicFirstExcited, grid)
    }

    pub fn ring_flat(grid: &QumodeGrid) -> AncillaState {
        AncillaState::new(AncillaKind::RingFlat, grid)
    }

    pub fn kind(&self) -> AncillaKind {
        self.kind
    }

    pub fn grid(&self) -> &QumodeGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.weights().iter().zip(&self.amps).map(|(w, a)| w * a * a).sum()
    }

    pub fn overlap(&self, other: &AncillaState) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self.grid.weights().iter().zip(self.amps.iter().zip(&other.amps)).map(|(w, (a, b))| w * a * b).sum())
    }
}

fn same_grid(a: &QumodeGrid, b: &QumodeGrid) -> Result<()> {
    if a != b {
        return Err(Error::InvalidInput("ancilla states live on different grids".into()));
    }
    Ok(())
}

/// System ⊗ one or two qumodes. Amplitudes are stored point-major: the
/// system vector of grid point (y, z) starts at ((y·n_z) + z)·dim.
#[derive(Clone, Debug)]
pub struct HybridState {
    system_dim: usize,
    grids: Vec<QumodeGrid>,
    amps: Vec<C64>,
}

impl HybridState {
    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn grids(&self) -> &[QumodeGrid] {
        &self.grids
    }

    /// Amplitude of system index `s` at grid indices `idx`.
    pub fn amplitude(&self, s: usize, idx: &[usize]) -> C64 {
        let p = match idx {
            [z] => *z,
            [y, z] => y * self.grids[1].len() + z,
            _ => panic!("one or two grid indices expected"),
        };
        self.amps[p * self.system_dim + s]
    }

    fn point_weights(&self) -> Vec<f64> {
        point_products(&self.grids.iter().map(|g| g.weights().to_vec()).collect::<Vec<_>>())
    }

    /// Σ_p w_p ‖block_p‖².
    pub fn norm_sq(&self) -> f64 {
        self.point_weights()
            .iter()
            .zip(self.amps.chunks(self.system_dim))
            .map(|(w, b)| w * b.iter().map(|a| a.norm_sqr()).sum::<f64>())
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Row-major products over one or two factor lists.
fn point_products(factors: &[Vec<f64>]) -> Vec<f64> {
    match factors {
        [a] => a.clone(),
        [a, b] => a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect(),
        _ => unreachable!("one or two grids"),
    }
}

fn check_ancillas(ancillas: &[AncillaState]) -> Result<()> {
    if ancillas.is_empty() || ancillas.len() > 2 {
        return Err(Error::InvalidInput(format!("one or two ancillas supported, got {}", ancillas.len())));
    }
    Ok(())
}

/// Coupling coordinate s_p of each grid point: z, or y·z.
fn couplings(grids: &[&QumodeGrid]) -> Vec<f64> {
    point_products(&grids.iter().map(|g| g.points().to_vec()).collect::<Vec<_>>())
}

/// |ψ0⟩|a⟩ evolved under H⊗ẑ (or H⊗ŷ⊗ẑ) for time T: the block at each
/// grid point is multiplied by e^{−iH·s·T}, using one eigendecomposition.
pub fn evolve_bilinear(h: &DenseOperator, psi0: &StateVector, ancillas: &[AncillaState], big_t: f64) -> Result<HybridState> {
    check_ancillas(ancillas)?;
    if h.dim() != psi0.dim() {
        return Err(Error::InvalidInput("Hamiltonian and state dimensions differ".into()));
    }
    let dim = h.dim();
    let grids: Vec<QumodeGrid> = ancillas.iter().map(|a| a.grid().clone()).collect();
    let n_points: usize = grids.iter().map(|g| g.len()).product();
    if n_points.saturating_mul(dim) > MAX_HYBRID_AMPS {
        return Err(Error::Precondition(format!("hybrid state of {} amplitudes exceeds the limit {MAX_HYBRID_AMPS}", n_points * dim)));
    }
    let eig = EigenDecomposition::new(h)?;
    let coeffs = eig.to_eigenbasis(psi0.amplitudes());
    let amp = point_products(&ancillas.iter().map(|a| a.amplitudes().to_vec()).collect::<Vec<_>>());
    let s = couplings(&grids.iter().collect::<Vec<_>>());
    let vals = eig.values().to_vec();
    let mut amps = vec![C64::new(0.0, 0.0); n_points * dim];
    amps.par_chunks_mut(dim).enumerate().for_each(|(p, block)| {
        let rotated: Vec<C64> = coeffs.iter().zip(&vals).map(|(c, l)| c * C64::from_polar(amp[p], -l * s[p] * big_t)).collect();
        block.copy_from_slice(&eig.from_eigenbasis(&rotated));
    });
    Ok(HybridState { system_dim: dim, grids, amps })
}

/// ⟨targets|state⟩ over the ancilla registers and its squared norm.
pub fn project_ancilla(state: &HybridState, targets: &[AncillaState]) -> Result<(Vec<C64>, f64)> {
    if targets.len() != state.grids.len() {
        return Err(Error::InvalidInput("one target per ancilla register is required".into()));
    }
    for (t, g) in targets.iter().zip(&state.grids) {
        same_grid(t.grid(), g)?;
    }
    let u = point_products(
        &targets.iter().map(|t| t.grid().weights().iter().zip(t.amplitudes()).map(|(w, a)| w * a).collect()).collect::<Vec<_>>(),
    );
    let dim = state.system_dim;
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (up, block) in u.iter().zip(state.amps.chunks(dim)) {
        for (o, b) in out.iter_mut().zip(block) {
            *o += b * up;
        }
    }
    let p = out.iter().map(|a| a.norm_sqr()).sum();
    Ok((out, p))
}

/// Σ_k v_k e^{−iω z_k} over a uniform grid, by phase recurrence.
fn phase_sum(v: &[f64], z0: f64, h: f64, omega: f64) -> C64 {
    let step = C64::from_polar(1.0, -omega * h);
    let mut acc = C64::new(0.0, 0.0);
    let mut ph = C64::new(1.0, 0.0);
    for (k, vk) in v.iter().enumerate() {
        if k % RESEED == 0 {
            ph = C64::from_polar(1.0, -omega * (z0 + h * k as f64));
        }
        acc += ph * vk;
        ph *= step;
    }
    acc
}

/// Projected amplitude ⟨t|e^{−i x s T}|a⟩ for a system eigenvalue x, i.e.
/// Σ_p w_p t_p a_p e^{−i x s_p T}.
pub fn bilinear_response(ancillas: &[AncillaState], targets: &[AncillaState], big_t: f64, x: f64) -> Result<C64> {
    check_ancillas(ancillas)?;
    if targets.len() != ancillas.len() {
        return Err(Error::InvalidInput("one target per ancilla register is required".into()));
    }
    let u: Vec<Vec<f64>> = ancillas
        .iter()
        .zip(targets)
        .map(|(a, t)| {
            same_grid(a.grid(), t.grid())?;
            Ok(a.grid().weights().iter().zip(a.amplitudes().iter().zip(t.amplitudes())).map(|(w, (p, q))| w * p * q).collect())
        })
        .collect::<Result<_>>()?;
    let last = ancillas.last().unwrap().grid();
    let (z0, h) = (last.points()[0], last.spacing());
    Ok(match u.as_slice() {
        [v] => phase_sum(v, z0, h, x * big_t),
        [uy, vz] => {
            let ys = ancillas[0].grid().points();
            let parts: Vec<C64> = ys.par_iter().zip(uy.par_iter()).map(|(y, w)| phase_sum(vz, z0, h, x * y * big_t) * w).collect();
            let re = parts.iter().map(|c| c.re).collect::<CompensatedSum>().value();
            let im = parts.iter().map(|c| c.im).collect::<CompensatedSum>().value();
            C64::new(re, im)
        }
        _ => unreachable!(),
    })
}

/// Evolution followed by projection, evaluated per eigenvalue of H without
/// materializing the hybrid state. Returns the unnormalized system
/// component and its squared norm.
pub fn evolve_project(
    h: &DenseOperator,
    psi0: &StateVector,
    ancillas: &[AncillaState],
    targets: &[AncillaState],
    big_t: f64,
) -> Result<(Vec<C64>, f64)> {
    if h.dim() != psi0.dim() {
        return Err(Error::InvalidInput("Hamiltonian and state dimensions differ".into()));
    }
    let eig = EigenDecomposition::new(h)?;
    let mut coeffs = eig.to_eigenbasis(psi0.amplitudes());
    for (c, l) in coeffs.iter_mut().zip(eig.values()) {
        *c *= bilinear_response(ancillas, targets, big_t, *l)?;
    }
    let out = eig.from_eigenbasis(&coeffs);
    let p = out.iter().map(|a| a.norm_sqr()).sum();
    Ok((out, p))
}

/// Result of an analog run, with the refinement check that accepted it.
#[derive(Clone, Debug, Serialize)]
pub struct AnalogReport {
    #[serde(rename = "bigT")]
    pub big_t: f64,
    pub success_prob: f64,
    /// Post-selected state: normalized for ground-state preparation, the
    /// raw component (≈ H⁻¹b/T) for linear systems.
    #[serde(skip)]
    pub state: Vec<C64>,
    pub grid: Vec<GridInfo>,
    pub converged: bool,
    /// Change of the reported state under grid refinement.
    pub refinement_change: f64,
    /// Error budget the refinement change is compared with.
    pub budget: f64,
}

fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(v: &[C64]) -> Result<Vec<C64>> {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0) {
        return Err(Error::Precondition("post-selected component vanishes".into()));
    }
    Ok(v.iter().map(|a| a / n).collect())
}

/// T = √(2t) with t = log((1−η²)/(η²ε²))/(2Δ²) + 1 for the rescaled gap;
/// the log is floored at 0.
pub fn analog_gsp_time(gap: f64, eta: f64, epsilon: f64) -> f64 {
    let eta2 = eta * eta;
    let arg = (1.0 - eta2) / (eta2 * epsilon * epsilon);
    let log = if arg > 1.0 { arg.ln() } else { 0.0 };
    (2.0 * (log / (2.0 * gap * gap) + 1.0)).sqrt()
}

/// Gaussian filter through one qumode: ⟨ψ_g|e^{−iH⊗ẑT}|ψ0⟩|ψ_g⟩ =
/// e^{−T²H²/2}|ψ0⟩ up to grid error.
pub fn analog_gsp(p: &GspProblem, epsilon: f64) -> Result<AnalogReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let prepared = p.prepare()?;
    let h = DenseOperator::hermitian(prepared.hamiltonian.to_dense())?;
    let big_t = analog_gsp_time(prepared.gap, p.overlap, epsilon);
    let run = |grid: &QumodeGrid| -> Result<(Vec<C64>, f64)> {
        let g = AncillaState::gaussian_ground(grid);
        evolve_project(&h, &p.initial_state, std::slice::from_ref(&g), std::slice::from_ref(&g), big_t)
    };
    let grid = QumodeGrid::default_line(epsilon)?;
    let (comp, prob) = run(&grid)?;
    let (fine, fine_prob) = run(&grid.refined())?;
    let state = normalized(&comp)?;
    let change = diff_norm(&state, &normalized(&fine)?);
    let converged = change < CONVERGENCE_SHARE * epsilon && (prob - fine_prob).abs() < CONVERGENCE_SHARE * 0.1 * prob;
    if !converged {
        return Err(Error::Convergence(format!("analog filter moved by {change:.3e} under grid refinement")));
    }
    Ok(AnalogReport { big_t, success_prob: prob, state, grid: vec![grid.info()], converged, refinement_change: change, budget: epsilon })
}

/// T = κ√(2 log(κ/ε)).
pub fn ring_qls_time(kappa: f64, epsilon: f64) -> f64 {
    kappa * (2.0 * (kappa / epsilon).ln()).sqrt()
}

/// T = κ^{3/2}/√ε.
pub fn gaussian_qls_time(kappa: f64, epsilon: f64) -> f64 {
    kappa.powf(1.5) / epsilon.sqrt()
}

/// Ring variable y ∈ [0, 1] and line variable z. Input |ψ_g⟩|τ⟩, target
/// |ψ_h⟩|τ⟩.
fn ring_registers(line: &QumodeGrid, ring: &QumodeGrid) -> ([AncillaState; 2], [AncillaState; 2]) {
    let tau = AncillaState::ring_flat(ring);
    (
        [tau.clone(), AncillaState::gaussian_ground(line)],
        [tau, AncillaState::harmonic_first_excited(line)],
    )
}

/// i·T·⟨ψ_h, τ|e^{−i x ŷẑ T}|ψ_g, τ⟩ = (1/x)(1 − e^{−x²T²/2}) up to grid
/// error.
pub fn ring_qls_scalar(x: f64, big_t: f64, line: &QumodeGrid, ring: &QumodeGrid) -> Result<f64> {
    let (a, t) = ring_registers(line, ring);
    let r = bilinear_response(&a, &t, big_t, x)? * C64::new(0.0, big_t);
    Ok(r.re)
}

/// T·⟨ψ_g, ψ_g|e^{−i x ŷẑ T}|ψ_g, ψ_g⟩ = 1/√(x² + 1/T²) up to grid error.
pub fn gaussian_qls_scalar(x: f64, big_t: f64, line: &QumodeGrid) -> Result<f64> {
    let g = AncillaState::gaussian_ground(line);
    let regs = [g.clone(), g];
    Ok((bilinear_response(&regs, &regs, big_t, x)? * big_t).re)
}

/// Line grid fine enough for phases up to x_max·T·z_max: the spacing keeps
/// 2π/h at least 12 above that frequency.
pub fn gaussian_qls_grid(epsilon: f64, big_t: f64, x_max: f64) -> Result<QumodeGrid> {
    let z_max = default_z_max(epsilon);
    let h = 2.0 * std::f64::consts::PI / (x_max * big_t * z_max + 12.0);
    let n = ((2.0 * z_max / h).ceil() as usize + 1).max(1024);
    QumodeGrid::line(z_max, n)
}

fn qls_component(
    p: &QlsProblem,
    big_t: f64,
    ancillas: &[AncillaState],
    targets: &[AncillaState],
    phase: C64,
) -> Result<(Vec<C64>, f64)> {
    let h = DenseOperator::hermitian(p.hamiltonian.to_dense())?;
    let (comp, prob) = evolve_project(&h, &p.b_state, ancillas, targets, big_t)?;
    Ok((comp.iter().map(|a| a * phase).collect(), prob))
}

fn qls_report(big_t: f64, epsilon: f64, base: (Vec<C64>, f64), fine: Vec<C64>, grids: Vec<GridInfo>) -> Result<AnalogReport> {
    let budget = epsilon / big_t;
    let change = diff_norm(&base.0, &fine);
    if change >= CONVERGENCE_SHARE * budget {
        return Err(Error::Convergence(format!("linear-system component moved by {change:.3e} under grid refinement (budget {budget:.3e})")));
    }
    Ok(AnalogReport { big_t, success_prob: base.1, state: base.0, grid: grids, converged: true, refinement_change: change, budget })
}

/// Two qumodes, harmonic line and flat ring: the projected component
/// approximates H⁻¹|b⟩/T with T = κ√(2 log(κ/ε)).
pub fn analog_qls_ring(p: &QlsProblem, epsilon: f64) -> Result<AnalogReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let big_t = ring_qls_time(p.kappa, epsilon);
    let line = QumodeGrid::default_line(epsilon)?;
    let ring = QumodeGrid::default_ring();
    let run = |line: &QumodeGrid, ring: &QumodeGrid| {
        let (a, t) = ring_registers(line, ring);
        qls_component(p, big_t, &a, &t, C64::new(0.0, 1.0))
    };
    let base = run(&line, &ring)?;
    let fine = run(&line.refined(), &ring.refined())?.0;
    qls_report(big_t, epsilon, base, fine, vec![line.info(), ring.info()])
}

/// Two Gaussian qumodes: the projected component is H̃⁻¹|b⟩/T with
/// x̃ = √(x² + 1/T²), which needs a positive spectrum.
pub fn analog_qls_gaussian(p: &QlsProblem, epsilon: f64) -> Result<AnalogReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let h = DenseOperator::hermitian(p.hamiltonian.to_dense())?;
    if EigenDecomposition::new(&h)?.values()[0] <= 0.0 {
        return Err(Error::Precondition("Gaussian-ancilla inversion needs a positive definite Hamiltonian".into()));
    }
    let big_t = gaussian_qls_time(p.kappa, epsilon);
    let line = gaussian_qls_grid(epsilon, big_t, 1.0)?;
    let run = |line: &QumodeGrid| {
        let g = AncillaState::gaussian_ground(line);
        let regs = [g.clone(), g];
        qls_component(p, big_t, &regs, &regs, C64::new(1.0, 0.0))
    };
    let base = run(&line)?;
    let fine = run(&line.refined())?.0;
    qls_report(big_t, epsilon, base, fine, vec![line.info(), line.info()])
}

/// Fraction of `shots` Bernoulli(success_prob) post-selections that succeed.
pub fn sample_postselection(success_prob: f64, shots: u64, seed: u64) -> f64 {
    let hits = (0..shots).filter(|i| stream(seed, 3, *i).random::<f64>() < success_prob).count();
    hits as f64 / shots as f64
}
