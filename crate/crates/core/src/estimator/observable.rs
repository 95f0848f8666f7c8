use rand::distr::Distribution;
use rand_distr::weighted::WeightedAliasIndex;

use crate::core_algebra::{DenseOperator, PauliHamiltonian, PauliString, C64};
use crate::error::{Error, Result};
use crate::rng::SampleRng;

const UNITARY_TOL: f64 = 1e-9;

/// O = Σ_j h_j O_j with each O_j unitary and Hermitian. Sampled term by term
/// with probability |h_j|/‖h‖₁.
#[derive(Clone, Debug)]
pub struct ObservableLcu {
    terms: Vec<(f64, ObservableTerm)>,
    alias: WeightedAliasIndex<f64>,
    h1: f64,
}

#[derive(Clone, Debug)]
pub enum ObservableTerm {
    Pauli(PauliString),
    Dense(DenseOperator),
}

impl ObservableTerm {
    fn dim(&self) -> usize {
        match self {
            ObservableTerm::Pauli(p) => p.dim(),
            ObservableTerm::Dense(d) => d.dim(),
        }
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            ObservableTerm::Pauli(p) => p.apply(v),
            ObservableTerm::Dense(d) => d.apply(v),
        }
    }
}

impl ObservableLcu {
    pub fn new(terms: Vec<(f64, ObservableTerm)>) -> Result<ObservableLcu> {
        let terms: Vec<_> = terms.into_iter().filter(|(h, _)| *h != 0.0).collect();
        if terms.is_empty() {
            return Err(Error::InvalidInput("observable has no non-zero terms".into()));
        }
        let dim = terms[0].1.dim();
        for (h, t) in &terms {
            if !h.is_finite() {
                return Err(Error::InvalidInput("observable weight is not finite".into()));
            }
            if t.dim() != dim {
                return Err(Error::InvalidInput("observable terms have different dimensions".into()));
            }
            if let ObservableTerm::Dense(d) = t {
                if !d.is_hermitian() || !d.is_unitary() {
                    return Err(Error::InvalidInput("observable terms must be unitary and Hermitian".into()));
                }
            }
        }
        let weights: Vec<f64> = terms.iter().map(|(h, _)| h.abs()).collect();
        let h1 = weights.iter().sum();
        let alias = WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidInput(format!("alias table: {e}")))?;
        Ok(ObservableLcu { terms, alias, h1 })
    }

    pub fn from_pauli(h: &PauliHamiltonian) -> Result<ObservableLcu> {
        ObservableLcu::new(h.terms().iter().map(|(c, p)| (*c, ObservableTerm::Pauli(p.clone()))).collect())
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn terms(&self) -> &[(f64, ObservableTerm)] {
        &self.terms
    }

    /// ‖h‖₁, also used as the bound on ‖O‖.
    pub fn l1_norm(&self) -> f64 {
        self.h1
    }

    /// Draws O_j and returns it with the sign of h_j.
    pub fn sample(&self, rng: &mut SampleRng) -> (usize, f64, &ObservableTerm) {
        let j = self.alias.sample(rng);
        (j, self.terms[j].0.signum(), &self.terms[j].1)
    }
}

/// Observable handed to the estimator.
#[derive(Clone, Debug)]
pub enum Observable {
    /// Dense Hermitian O with its spectral norm cached.
    Dense { op: DenseOperator, norm: f64, involutory: bool },
    Lcu(ObservableLcu),
    /// O = I, used for the normalization phase.
    Identity(usize),
}

impl Observable {
    pub fn dense(op: DenseOperator) -> Result<Observable> {
        if !op.is_hermitian() {
            return Err(Error::InvalidInput("observable must be Hermitian".into()));
        }
        let norm = op.spectral_norm();
        let sq = op.compose(&op);
        let n = op.dim();
        let involutory = (sq.matrix() - crate::core_algebra::CMatrix::identity(n, n)).camax() <= UNITARY_TOL;
        Ok(Observable::Dense { op, norm, involutory })
    }

    pub fn pauli(h: &PauliHamiltonian) -> Result<Observable> {
        Ok(Observable::Lcu(ObservableLcu::from_pauli(h)?))
    }

    /// Dense observable from Pauli text, e.g. "Z" or "0.5*ZI + 0.5*IZ".
    pub fn parse_dense(text: &str) -> Result<Observable> {
        let h = PauliHamiltonian::parse(text)?;
        Observable::dense(DenseOperator::hermitian(h.to_dense())?)
    }

    pub fn dim(&self) -> usize {
        match self {
            Observable::Dense { op, .. } => op.dim(),
            Observable::Lcu(l) => l.dim(),
            Observable::Identity(d) => *d,
        }
    }

    /// ‖O‖ for dense observables, ‖h‖₁ for sampled ones.
    pub fn norm_bound(&self) -> f64 {
        match self {
            Observable::Dense { norm, .. } => *norm,
            Observable::Lcu(l) => l.l1_norm(),
            Observable::Identity(_) => 1.0,
        }
    }

    /// Whether every realized observable squares to the identity, which shot
    /// mode needs.
    pub fn is_involutory(&self) -> bool {
        match self {
            Observable::Dense { involutory, .. } => *involutory,
            Observable::Lcu(_) | Observable::Identity(_) => true,
        }
    }

    /// Multiplier applied to per-sample values (‖h‖₁ when sampling terms).
    pub fn scale(&self) -> f64 {
        match self {
            Observable::Lcu(l) => l.l1_norm(),
            _ => 1.0,
        }
    }

    /// Re⟨v2|O_s|v1⟩ for the realized observable O_s, which is O itself or a
    /// signed sampled term.
    pub(crate) fn realized_value(&self, v1: &[C64], v2: &[C64], rng: &mut SampleRng) -> f64 {
        match self {
            Observable::Dense { op, .. } => re_inner(v2, &op.apply(v1)),
            Observable::Lcu(l) => {
                let (_, sign, term) = l.sample(rng);
                sign * re_inner(v2, &term.apply(v1))
            }
            Observable::Identity(_) => re_inner(v2, v1),
        }
    }

    /// ⟨ψ|O|ψ⟩ evaluated exactly.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        match self {
            Observable::Dense { op, .. } => re_inner(psi, &op.apply(psi)),
            Observable::Lcu(l) => l.terms().iter().map(|(h, t)| h * re_inner(psi, &t.apply(psi))).sum(),
            Observable::Identity(_) => re_inner(psi, psi),
        }
    }
}

/// Re⟨a|b⟩.
pub(crate) fn re_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}
