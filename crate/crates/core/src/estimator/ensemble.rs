use std::borrow::Cow;

use rand::distr::Distribution;
use rand_distr::weighted::WeightedAliasIndex;

use crate::core_algebra::{DenseOperator, StateVector, C64};
use crate::error::{Error, Result};
use crate::lcu_decomp::{apply_descriptor, LcuDecomposition, RealizeContext, TaylorSegment};
use crate::rng::SampleRng;

/// One draw V from {c_j/‖c‖₁} together with V|ψ0⟩.
pub struct Draw<'a> {
    pub term: u64,
    pub cost: f64,
    pub image: Cow<'a, [C64]>,
}

/// A normalized ensemble of unitaries bound to a fixed input state.
pub trait Ensemble: Sync {
    fn dim(&self) -> usize;
    fn l1_norm(&self) -> f64;
    fn tau_max(&self) -> f64;
    /// Analytic ⟨τ⟩ = Σ c_j τ_j / ‖c‖₁.
    fn mean_cost(&self) -> f64;
    fn draw(&self, rng: &mut SampleRng) -> Draw<'_>;
}

/// Finite ensemble with every image U_j|ψ0⟩ computed up front, so a draw is
/// one alias lookup.
#[derive(Clone, Debug)]
pub struct PreparedLcu {
    coeffs: Vec<f64>,
    costs: Vec<f64>,
    images: Vec<Vec<C64>>,
    alias: WeightedAliasIndex<f64>,
    l1: f64,
    tau_max: f64,
    mean_cost: f64,
}

impl PreparedLcu {
    pub fn from_images(coeffs: Vec<f64>, costs: Vec<f64>, images: Vec<Vec<C64>>) -> Result<PreparedLcu> {
        if coeffs.is_empty() || coeffs.len() != costs.len() || coeffs.len() != images.len() {
            return Err(Error::InvalidInput("coefficients, costs and images must be non-empty and of equal length".into()));
        }
        let dim = images[0].len();
        if images.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidInput("images have inconsistent dimensions".into()));
        }
        if coeffs.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be positive and finite".into()));
        }
        let l1 = coeffs.iter().copied().collect::<crate::rng::CompensatedSum>().value();
        let tau_max = costs.iter().copied().fold(0.0, f64::max);
        let mean_cost = coeffs.iter().zip(&costs).map(|(c, t)| c * t).sum::<f64>() / l1;
        let alias = WeightedAliasIndex::new(coeffs.clone()).map_err(|e| Error::InvalidInput(format!("alias table: {e}")))?;
        Ok(PreparedLcu { coeffs, costs, images, alias, l1, tau_max, mean_cost })
    }

    pub fn new(lcu: &LcuDecomposition, ctx: RealizeContext<'_>, psi0: &StateVector) -> Result<PreparedLcu> {
        check_state(psi0)?;
        let images = lcu
            .terms()
            .iter()
            .map(|t| apply_descriptor(&t.unitary, ctx, psi0.amplitudes()))
            .collect::<Result<Vec<_>>>()?;
        PreparedLcu::from_images(lcu.coefficients(), lcu.terms().iter().map(|t| t.unitary.cost()).collect(), images)
    }

    /// Ensemble over explicit dense unitaries, e.g. imperfect realizations.
    pub fn from_unitaries(coeffs: Vec<f64>, costs: Vec<f64>, unitaries: &[DenseOperator], psi0: &StateVector) -> Result<PreparedLcu> {
        check_state(psi0)?;
        if unitaries.iter().any(|u| u.dim() != psi0.dim()) {
            return Err(Error::InvalidInput("unitary and state dimensions differ".into()));
        }
        let images = unitaries.iter().map(|u| u.apply(psi0.amplitudes())).collect();
        PreparedLcu::from_images(coeffs, costs, images)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs[j]
    }

    pub fn image(&self, j: usize) -> &[C64] {
        &self.images[j]
    }

    pub fn cost(&self, j: usize) -> f64 {
        self.costs[j]
    }

    /// g|ψ0⟩ = Σ_j c_j U_j|ψ0⟩.
    pub fn combined_image(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (c, img) in self.coeffs.iter().zip(&self.images) {
            for (o, a) in out.iter_mut().zip(img) {
                *o += a * c;
            }
        }
        out
    }
}

pub(crate) fn check_state(psi0: &StateVector) -> Result<()> {
    if !psi0.is_normalized() {
        return Err(Error::Precondition(format!("input state has norm {} instead of 1", psi0.norm())));
    }
    Ok(())
}

impl Ensemble for PreparedLcu {
    fn dim(&self) -> usize {
        self.images[0].len()
    }

    fn l1_norm(&self) -> f64 {
        self.l1
    }

    fn tau_max(&self) -> f64 {
        self.tau_max
    }

    fn mean_cost(&self) -> f64 {
        self.mean_cost
    }

    fn draw(&self, rng: &mut SampleRng) -> Draw<'_> {
        let j = self.alias.sample(rng);
        Draw { term: j as u64, cost: self.costs[j], image: Cow::Borrowed(&self.images[j]) }
    }
}

/// r-fold product W_r⋯W_1 of independently drawn Taylor segments applied to
/// ψ0 on the fly.
#[derive(Clone, Debug)]
pub struct SegmentProduct {
    segment: TaylorSegment,
    psi0: StateVector,
}

impl SegmentProduct {
    pub fn new(segment: TaylorSegment, psi0: StateVector) -> Result<SegmentProduct> {
        check_state(&psi0)?;
        if segment.hamiltonian().dim() != psi0.dim() {
            return Err(Error::InvalidInput("Hamiltonian and state dimensions differ".into()));
        }
        Ok(SegmentProduct { segment, psi0 })
    }

    pub fn segment(&self) -> &TaylorSegment {
        &self.segment
    }
}

impl Ensemble for SegmentProduct {
    fn dim(&self) -> usize {
        self.psi0.dim()
    }

    fn l1_norm(&self) -> f64 {
        self.segment.l1_norm()
    }

    fn tau_max(&self) -> f64 {
        self.segment.tau_max()
    }

    fn mean_cost(&self) -> f64 {
        self.segment.mean_cost()
    }

    fn draw(&self, rng: &mut SampleRng) -> Draw<'_> {
        let ctx = RealizeContext::Pauli(self.segment.hamiltonian());
        let mut state = self.psi0.amplitudes().to_vec();
        let mut cost = 0.0;
        let mut id = 0xcbf2_9ce4_8422_2325u64;
        for _ in 0..self.segment.segments() {
            let d = self.segment.sample(rng);
            cost += d.unitary.cost();
            if let crate::lcu_decomp::UnitaryDescriptor::PauliProductRotation { paulis, rotation, .. } = &d.unitary {
                for idx in paulis.iter().chain(std::iter::once(rotation)) {
                    id = (id ^ (*idx as u64 + 1)).wrapping_mul(0x0100_0000_01b3);
                }
                id = (id ^ 0xff).wrapping_mul(0x0100_0000_01b3);
            }
            state = apply_descriptor(&d.unitary, ctx, &state).expect("segment descriptors index the bound Hamiltonian");
        }
        Draw { term: id, cost, image: Cow::Owned(state) }
    }
}
