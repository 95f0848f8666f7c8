//! Dense complex linear algebra, Pauli strings and Hamiltonians.

mod dense;
mod parse;
mod pauli;
mod spectral;

pub use dense::{inner, norm, spectral_norm, DenseOperator, StateVector};
pub use parse::parse_hamiltonian;
pub use pauli::{Pauli, PauliHamiltonian, PauliString};
pub use spectral::{matrix_function, time_evolution, EigenDecomposition};

pub use num_complex::Complex64 as C64;

pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Random Hermitian matrix with unit spectral norm, for tests and checks.
pub fn random_unit_hermitian<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseOperator {
    let mut m = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            m[(r, c)] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let n = spectral_norm(&h);
    DenseOperator::hermitian(h / C64::new(n, 0.0)).expect("symmetrized matrix is Hermitian")
}
