use super::{CMatrix, C64};
use crate::error::{Error, Result};

const STRUCTURE_TOL: f64 = 1e-9;

/// Dense complex operator. The flags record which structural properties were
/// verified at construction.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    mat: CMatrix,
    hermitian: bool,
    unitary: bool,
}

impl DenseOperator {
    pub fn general(mat: CMatrix) -> Result<DenseOperator> {
        if !mat.is_square() {
            return Err(Error::InvalidInput(format!("operator is {}x{}, expected square", mat.nrows(), mat.ncols())));
        }
        Ok(DenseOperator { mat, hermitian: false, unitary: false })
    }

    pub fn hermitian(mat: CMatrix) -> Result<DenseOperator> {
        let mut op = DenseOperator::general(mat)?;
        let dev = (&op.mat - op.mat.adjoint()).camax();
        if dev > STRUCTURE_TOL * op.mat.camax().max(1.0) {
            return Err(Error::InvalidInput(format!("operator is not Hermitian (deviation {dev:.3e})")));
        }
        // symmetrize away round-off
        op.mat = (&op.mat + op.mat.adjoint()) * C64::new(0.5, 0.0);
        op.hermitian = true;
        Ok(op)
    }

    pub fn unitary(mat: CMatrix) -> Result<DenseOperator> {
        let mut op = DenseOperator::general(mat)?;
        let n = op.dim();
        let dev = (op.mat.adjoint() * &op.mat - CMatrix::identity(n, n)).camax();
        if dev > STRUCTURE_TOL {
            return Err(Error::InvalidInput(format!("operator is not unitary (deviation {dev:.3e})")));
        }
        op.unitary = true;
        Ok(op)
    }

    pub fn identity(dim: usize) -> DenseOperator {
        DenseOperator { mat: CMatrix::identity(dim, dim), hermitian: true, unitary: true }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        debug_assert_eq!(v.len(), n);
        let mut out = vec![C64::new(0.0, 0.0); n];
        // column-major storage: accumulate column by column
        for (j, x) in v.iter().enumerate() {
            if *x == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.mat.column(j);
            for (o, a) in out.iter_mut().zip(col.iter()) {
                *o += *a * *x;
            }
        }
        out
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator { mat: self.mat.adjoint(), hermitian: self.hermitian, unitary: self.unitary }
    }

    pub fn compose(&self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator { mat: &self.mat * &rhs.mat, hermitian: false, unitary: self.unitary && rhs.unitary }
    }

    pub fn kron(&self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: self.mat.kronecker(&rhs.mat),
            hermitian: self.hermitian && rhs.hermitian,
            unitary: self.unitary && rhs.unitary,
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.mat)
    }
}

/// Largest singular value of an arbitrary square matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let ev = gram.symmetric_eigenvalues();
    ev.iter().cloned().fold(0.0f64, f64::max).max(0.0).sqrt()
}

/// Normalized or unnormalized vector of amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> StateVector {
        StateVector { amps }
    }

    pub fn normalized(amps: Vec<C64>) -> Result<StateVector> {
        let n = norm(&amps);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(StateVector { amps: amps.into_iter().map(|a| a / n).collect() })
    }

    pub fn from_real(values: &[f64]) -> Result<StateVector> {
        StateVector::normalized(values.iter().map(|v| C64::new(*v, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> StateVector {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        StateVector { amps }
    }

    pub fn zero(n_qubits: usize) -> StateVector {
        StateVector::basis(1 << n_qubits, 0)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_qubits(&self) -> Option<usize> {
        let d = self.amps.len();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < 1e-10
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amps, &other.amps)
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }

    /// ⟨ψ|O|ψ⟩ for Hermitian O.
    pub fn expectation(&self, op: &DenseOperator) -> f64 {
        inner(&self.amps, &op.apply(&self.amps)).re
    }
}

/// ⟨a|b⟩.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
