use super::dense::DenseOperator;
use super::{CMatrix, CVector, C64};
use crate::error::{Error, Result};

/// H = V diag(λ) V† for a Hermitian operator; every matrix function in the
/// crate goes through this.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn new(h: &DenseOperator) -> Result<EigenDecomposition> {
        if !h.is_hermitian() {
            return Err(Error::InvalidInput("eigendecomposition requires a Hermitian operator".into()));
        }
        let eig = h.matrix().clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        let values = order.iter().map(|i| eig.eigenvalues[*i]).collect();
        let vectors = CMatrix::from_columns(&order.iter().map(|i| eig.eigenvectors.column(*i)).collect::<Vec<_>>());
        Ok(EigenDecomposition { values, vectors })
    }

    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k).iter().cloned().collect()
    }

    /// V† ψ.
    pub fn to_eigenbasis(&self, psi: &[C64]) -> Vec<C64> {
        let v = CVector::from_column_slice(psi);
        (self.vectors.adjoint() * v).iter().cloned().collect()
    }

    /// V c.
    pub fn from_eigenbasis(&self, coeffs: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter().enumerate() {
            if *c == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.vectors.column(k).iter()) {
                *o += v * c;
            }
        }
        out
    }

    pub fn function<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let fk = f(self.values[k]);
            for r in 0..n {
                scaled[(r, k)] *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// f(H) ψ without forming f(H).
    pub fn apply_function<F: Fn(f64) -> C64>(&self, f: F, psi: &[C64]) -> Vec<C64> {
        let mut c = self.to_eigenbasis(psi);
        for (ck, lam) in c.iter_mut().zip(&self.values) {
            *ck *= f(*lam);
        }
        self.from_eigenbasis(&c)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// f(H) for Hermitian H.
pub fn matrix_function<F: Fn(f64) -> C64>(h: &DenseOperator, f: F) -> Result<DenseOperator> {
    let eig = EigenDecomposition::new(h)?;
    DenseOperator::general(eig.function(f))
}

/// e^{−iHτ}, unitary by construction.
pub fn time_evolution(h: &DenseOperator, tau: f64) -> Result<DenseOperator> {
    let eig = EigenDecomposition::new(h)?;
    DenseOperator::unitary(eig.function(|x| C64::from_polar(1.0, -x * tau)))
}
