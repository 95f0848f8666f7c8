use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;

use super::{LcuDecomposition, LcuTerm, Phase, UnitaryDescriptor};
use crate::core_algebra::PauliHamiltonian;
use crate::error::{Error, Result};

/// One segment of the randomized truncated Taylor expansion of e^{−iHt/r}:
/// Σ over even k ≤ K, Pauli indices l_1..l_k and a rotation index m.
#[derive(Clone, Debug)]
pub struct TaylorSegment {
    h: PauliHamiltonian,
    t: f64,
    r: usize,
    truncation: usize,
    orders: Vec<usize>,
    order_weights: Vec<f64>,
    thetas: Vec<f64>,
    order_alias: WeightedAliasIndex<f64>,
    pauli_alias: WeightedAliasIndex<f64>,
    segment_l1: f64,
}

#[derive(Clone, Debug)]
pub struct SegmentDraw {
    pub order: usize,
    pub unitary: UnitaryDescriptor,
}

pub fn taylor_segment(h: &PauliHamiltonian, t: f64, r: usize, truncation: usize) -> Result<TaylorSegment> {
    if !t.is_finite() {
        return Err(Error::Precondition(format!("t = {t} must be finite")));
    }
    if r == 0 {
        return Err(Error::Precondition("segment count r must be positive".into()));
    }
    let beta = h.l1_norm();
    let x = beta * t.abs() / r as f64;
    let orders: Vec<usize> = (0..=truncation).step_by(2).collect();
    let mut order_weights = Vec::with_capacity(orders.len());
    let mut thetas = Vec::with_capacity(orders.len());
    for &k in &orders {
        let a = x / (k as f64 + 1.0);
        let lw = k as f64 * x.ln() - libm::lgamma(k as f64 + 1.0);
        let w = if k == 0 { 1.0 } else { lw.exp() };
        order_weights.push(w * (1.0 + a * a).sqrt());
        thetas.push((1.0 / (1.0 + a * a).sqrt()).clamp(-1.0, 1.0).acos());
    }
    // keep only orders that carry weight (x = 0 leaves k = 0 alone)
    let keep: Vec<usize> = (0..orders.len()).filter(|i| order_weights[*i] > 0.0).collect();
    let orders: Vec<usize> = keep.iter().map(|i| orders[*i]).collect();
    let order_weights: Vec<f64> = keep.iter().map(|i| order_weights[*i]).collect();
    let thetas: Vec<f64> = keep.iter().map(|i| thetas[*i]).collect();
    let order_alias = WeightedAliasIndex::new(order_weights.clone())
        .map_err(|e| Error::InvalidInput(format!("order weights: {e}")))?;
    let pauli_weights: Vec<f64> = if beta > 0.0 {
        h.terms().iter().map(|(c, _)| c.abs()).collect()
    } else {
        vec![1.0; h.terms().len()]
    };
    let pauli_alias =
        WeightedAliasIndex::new(pauli_weights).map_err(|e| Error::InvalidInput(format!("Pauli weights: {e}")))?;
    let segment_l1 = order_weights.iter().sum();
    Ok(TaylorSegment {
        h: h.clone(),
        t,
        r,
        truncation,
        orders,
        order_weights,
        thetas,
        order_alias,
        pauli_alias,
        segment_l1,
    })
}

impl TaylorSegment {
    pub fn hamiltonian(&self) -> &PauliHamiltonian {
        &self.h
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn segments(&self) -> usize {
        self.r
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// ℓ1 norm of one segment.
    pub fn segment_l1(&self) -> f64 {
        self.segment_l1
    }

    /// ℓ1 norm of the r-fold product.
    pub fn l1_norm(&self) -> f64 {
        self.segment_l1.powi(self.r as i32)
    }

    /// Cost of the most expensive segment.
    pub fn segment_tau_max(&self) -> f64 {
        self.orders.iter().map(|k| (*k + 1) as f64).fold(0.0, f64::max)
    }

    pub fn tau_max(&self) -> f64 {
        self.segment_tau_max() * self.r as f64
    }

    /// Expected cost of one r-fold product.
    pub fn mean_cost(&self) -> f64 {
        let per: f64 = self.orders.iter().zip(&self.order_weights).map(|(k, w)| (*k + 1) as f64 * w).sum();
        per / self.segment_l1 * self.r as f64
    }

    fn signed(&self, idx: usize) -> bool {
        self.h.terms()[idx].0 < 0.0
    }

    fn descriptor(&self, order_idx: usize, paulis: Vec<usize>, rotation: usize) -> UnitaryDescriptor {
        let k = self.orders[order_idx];
        let mut phase = Phase::i_pow(-(k as i64));
        for l in &paulis {
            if self.signed(*l) {
                phase = phase.negated();
            }
        }
        let theta = self.thetas[order_idx];
        let angle = if self.signed(rotation) { -theta } else { theta };
        UnitaryDescriptor::PauliProductRotation { paulis, rotation, angle, phase }
    }

    /// Draws one segment unitary with probability α_j/‖α‖₁.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SegmentDraw {
        let oi = self.order_alias.sample(rng);
        let k = self.orders[oi];
        let paulis: Vec<usize> = (0..k).map(|_| self.pauli_alias.sample(rng)).collect();
        let rotation = self.pauli_alias.sample(rng);
        SegmentDraw { order: k, unitary: self.descriptor(oi, paulis, rotation) }
    }

    /// Every term of one segment as an explicit decomposition. The number of
    /// terms grows like L^{K+1}, so this is meant for small instances.
    pub fn enumerate(&self) -> Result<LcuDecomposition> {
        let nz: Vec<usize> = (0..self.h.terms().len()).filter(|i| self.h.terms()[*i].0 != 0.0).collect();
        let beta = self.h.l1_norm();
        let q = |i: usize| if beta > 0.0 { self.h.terms()[i].0.abs() / beta } else { 1.0 / self.h.terms().len() as f64 };
        let pool: Vec<usize> = if beta > 0.0 { nz } else { (0..self.h.terms().len()).collect() };
        let mut terms = Vec::new();
        for (oi, &k) in self.orders.iter().enumerate() {
            let count = pool.len().pow(k as u32);
            for code in 0..count {
                let mut c = code;
                let mut paulis = Vec::with_capacity(k);
                let mut w = self.order_weights[oi];
                for _ in 0..k {
                    let l = pool[c % pool.len()];
                    c /= pool.len();
                    w *= q(l);
                    paulis.push(l);
                }
                for &m in &pool {
                    terms.push(LcuTerm { coeff: w * q(m), unitary: self.descriptor(oi, paulis.clone(), m) });
                }
            }
        }
        LcuDecomposition::new(terms)
    }
}

/// Segment count, truncation order and accuracy target for simulating e^{−iHt}
/// to expectation accuracy ε of an observable with norm bound `o_norm`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamsimParameters {
    pub beta: f64,
    pub r: usize,
    pub truncation: usize,
    pub gamma: f64,
}

pub fn hamsim_parameters(h: &PauliHamiltonian, t: f64, eps: f64, o_norm: f64) -> Result<HamsimParameters> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("epsilon = {eps} must be positive")));
    }
    if !(o_norm > 0.0) {
        return Err(Error::Precondition(format!("observable norm bound {o_norm} must be positive")));
    }
    let beta = h.l1_norm();
    let r = ((beta * t).powi(2).ceil() as usize).max(1);
    let gamma = eps / (6.0 * o_norm);
    let x = beta * t.abs() / r as f64;
    let mut truncation = 0;
    if x > 0.0 {
        let bound = |k: usize| (r as f64).ln() + (k as f64 + 1.0) * x.ln() - libm::lgamma(k as f64 + 2.0) + x;
        while bound(truncation) > gamma.ln() {
            truncation += 1;
        }
    }
    Ok(HamsimParameters { beta, r, truncation, gamma })
}
