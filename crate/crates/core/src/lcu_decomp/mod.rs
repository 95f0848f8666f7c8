//! Explicit linear combinations of unitaries: Gaussian, inverse, Taylor
//! segments and Chebyshev-power expansions.

mod chebyshev;
mod gaussian;
mod inverse;
mod taylor;

pub use chebyshev::{
    chebyshev_eval, chebyshev_power_coeffs, chebyshev_power_lcu, exp_poly_coeffs, gaussian_poly_coeffs, gaussian_poly_eval,
    poisson_weights, power_degree, power_exponent, ExpPoly, GaussianPoly,
};
pub use gaussian::{gaussian_lcu, gaussian_lcu_truncated, GaussianLcu};
pub use inverse::{inverse_lcu, InverseLcu};
pub use taylor::{hamsim_parameters, taylor_segment, HamsimParameters, SegmentDraw, TaylorSegment};

use crate::core_algebra::{DenseOperator, EigenDecomposition, PauliHamiltonian, C64};
use crate::error::{Error, Result};

/// Unit-modulus prefactor in {1, i, −1, −i}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Phase {
    #[default]
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    /// i^k.
    pub fn i_pow(k: i64) -> Phase {
        match k.rem_euclid(4) {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    fn exponent(self) -> i64 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn times(self, other: Phase) -> Phase {
        Phase::i_pow(self.exponent() + other.exponent())
    }

    pub fn negated(self) -> Phase {
        self.times(Phase::MinusOne)
    }

    pub fn value(self) -> C64 {
        match self {
            Phase::One => C64::new(1.0, 0.0),
            Phase::I => C64::new(0.0, 1.0),
            Phase::MinusOne => C64::new(-1.0, 0.0),
            Phase::MinusI => C64::new(0.0, -1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnitaryDescriptor {
    /// phase · e^{−iH·duration}
    TimeEvolution { duration: f64, phase: Phase },
    /// phase · P_{l_1}⋯P_{l_k} · e^{−i·angle·P_m}, indices into the
    /// Hamiltonian's term list.
    PauliProductRotation { paulis: Vec<usize>, rotation: usize, angle: f64, phase: Phase },
    /// phase · V^exponent for a walk operator V.
    WalkPower { exponent: usize, phase: Phase },
    Identity,
}

impl UnitaryDescriptor {
    /// Cost model: |duration|, number of Pauli factors plus one, or the walk
    /// exponent.
    pub fn cost(&self) -> f64 {
        match self {
            UnitaryDescriptor::TimeEvolution { duration, .. } => duration.abs(),
            UnitaryDescriptor::PauliProductRotation { paulis, .. } => (paulis.len() + 1) as f64,
            UnitaryDescriptor::WalkPower { exponent, .. } => *exponent as f64,
            UnitaryDescriptor::Identity => 0.0,
        }
    }

    pub fn phase(&self) -> Phase {
        match self {
            UnitaryDescriptor::TimeEvolution { phase, .. }
            | UnitaryDescriptor::PauliProductRotation { phase, .. }
            | UnitaryDescriptor::WalkPower { phase, .. } => *phase,
            UnitaryDescriptor::Identity => Phase::One,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LcuTerm {
    pub coeff: f64,
    pub unitary: UnitaryDescriptor,
}

/// Σ_j c_j U_j with c_j > 0; signs and phases live in the descriptors.
#[derive(Clone, Debug, PartialEq)]
pub struct LcuDecomposition {
    terms: Vec<LcuTerm>,
    l1: f64,
    target_error: f64,
}

impl LcuDecomposition {
    pub fn new(terms: Vec<LcuTerm>) -> Result<LcuDecomposition> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("decomposition has no terms".into()));
        }
        if let Some(t) = terms.iter().find(|t| !(t.coeff > 0.0) || !t.coeff.is_finite()) {
            return Err(Error::InvalidInput(format!("coefficient {} is not positive and finite", t.coeff)));
        }
        let l1 = terms.iter().map(|t| t.coeff).collect::<crate::rng::CompensatedSum>().value();
        Ok(LcuDecomposition { terms, l1, target_error: 0.0 })
    }

    /// Records the accuracy γ the decomposition guarantees.
    pub fn with_target_error(mut self, gamma: f64) -> LcuDecomposition {
        self.target_error = gamma;
        self
    }

    pub fn target_error(&self) -> f64 {
        self.target_error
    }

    pub fn terms(&self) -> &[LcuTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    /// Largest cost of any term.
    pub fn tau_max(&self) -> f64 {
        self.terms.iter().map(|t| t.unitary.cost()).fold(0.0, f64::max)
    }

    /// Expected cost Σ c_j τ_j / ‖c‖₁ of one draw.
    pub fn mean_cost(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff * t.unitary.cost()).sum::<f64>() / self.l1
    }

    /// Σ c_j·phase_j·e^{−i d_j x}: the scalar function realized when every
    /// term is a time evolution.
    pub fn scalar_response(&self, x: f64) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for t in &self.terms {
            match &t.unitary {
                UnitaryDescriptor::TimeEvolution { duration, phase } => {
                    acc += phase.value() * C64::from_polar(t.coeff, -duration * x);
                }
                UnitaryDescriptor::Identity => acc += t.coeff,
                _ => return Err(Error::InvalidInput("scalar response needs time-evolution terms".into())),
            }
        }
        Ok(acc)
    }
}

/// What a descriptor is realized against.
#[derive(Clone, Copy, Debug)]
pub enum RealizeContext<'a> {
    /// Eigendecomposition of the Hamiltonian generating time evolutions.
    Spectral(&'a EigenDecomposition),
    /// Pauli Hamiltonian whose terms the rotations index.
    Pauli(&'a PauliHamiltonian),
    /// Walk operator V.
    Walk(&'a DenseOperator),
}

/// Dense matrix of a descriptor.
pub fn realize(desc: &UnitaryDescriptor, ctx: RealizeContext<'_>) -> Result<DenseOperator> {
    let phase = desc.phase().value();
    let mat = match (desc, ctx) {
        (UnitaryDescriptor::Identity, _) => {
            let dim = context_dim(ctx);
            crate::core_algebra::CMatrix::identity(dim, dim)
        }
        (UnitaryDescriptor::TimeEvolution { duration, .. }, RealizeContext::Spectral(eig)) => {
            eig.function(|x| C64::from_polar(1.0, -x * duration)) * phase
        }
        (UnitaryDescriptor::PauliProductRotation { paulis, rotation, angle, .. }, RealizeContext::Pauli(h)) => {
            let terms = h.terms();
            let get = |i: usize| {
                terms.get(i).map(|t| t.1.to_dense()).ok_or_else(|| Error::InvalidInput(format!("term index {i} out of range")))
            };
            let dim = h.dim();
            let pm = get(*rotation)?;
            let id = crate::core_algebra::CMatrix::identity(dim, dim);
            let mut m = id * C64::new(angle.cos(), 0.0) + pm * C64::new(0.0, -angle.sin());
            for l in paulis.iter().rev() {
                m = get(*l)? * m;
            }
            m * phase
        }
        (UnitaryDescriptor::WalkPower { exponent, .. }, RealizeContext::Walk(v)) => {
            let mut m = crate::core_algebra::CMatrix::identity(v.dim(), v.dim());
            for _ in 0..*exponent {
                m = v.matrix() * m;
            }
            m * phase
        }
        _ => return Err(Error::InvalidInput("descriptor kind does not match the realization context".into())),
    };
    DenseOperator::unitary(mat)
}

/// U·ψ for a descriptor without forming the dense matrix.
pub fn apply_descriptor(desc: &UnitaryDescriptor, ctx: RealizeContext<'_>, psi: &[C64]) -> Result<Vec<C64>> {
    let phase = desc.phase().value();
    let mut out = match (desc, ctx) {
        (UnitaryDescriptor::Identity, _) => psi.to_vec(),
        (UnitaryDescriptor::TimeEvolution { duration, .. }, RealizeContext::Spectral(eig)) => {
            eig.apply_function(|x| C64::from_polar(1.0, -x * duration), psi)
        }
        (UnitaryDescriptor::PauliProductRotation { paulis, rotation, angle, .. }, RealizeContext::Pauli(h)) => {
            let terms = h.terms();
            let mut state = psi.to_vec();
            let mut scratch = vec![C64::new(0.0, 0.0); psi.len()];
            let get = |i: usize| terms.get(i).ok_or_else(|| Error::InvalidInput(format!("term index {i} out of range")));
            get(*rotation)?.1.rotate_in_place(*angle, &mut state, &mut scratch);
            for l in paulis.iter().rev() {
                get(*l)?.1.apply_into(&state, &mut scratch);
                std::mem::swap(&mut state, &mut scratch);
            }
            state
        }
        (UnitaryDescriptor::WalkPower { exponent, .. }, RealizeContext::Walk(v)) => {
            let mut state = psi.to_vec();
            for _ in 0..*exponent {
                state = v.apply(&state);
            }
            state
        }
        _ => return Err(Error::InvalidInput("descriptor kind does not match the realization context".into())),
    };
    for a in out.iter_mut() {
        *a *= phase;
    }
    Ok(out)
}

fn context_dim(ctx: RealizeContext<'_>) -> usize {
    match ctx {
        RealizeContext::Spectral(e) => e.dim(),
        RealizeContext::Pauli(h) => h.dim(),
        RealizeContext::Walk(v) => v.dim(),
    }
}

/// Σ_j c_j U_j as a dense operator.
pub fn realize_sum(lcu: &LcuDecomposition, ctx: RealizeContext<'_>) -> Result<DenseOperator> {
    let mut acc: Option<crate::core_algebra::CMatrix> = None;
    for t in lcu.terms() {
        let u = realize(&t.unitary, ctx)?.into_matrix() * C64::new(t.coeff, 0.0);
        acc = Some(match acc {
            Some(a) => a + u,
            None => u,
        });
    }
    DenseOperator::general(acc.expect("non-empty decomposition"))
}

/// Points of a uniform grid on [lo, hi], endpoints included.
pub(crate) fn uniform_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}
