use std::fmt;

use super::{CMatrix, C64};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> CMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => CMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
}

/// Tensor product of single-qubit Paulis. Symbol 0 acts on the most
/// significant qubit, so the dense matrix is the Kronecker product taken
/// left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
    x_mask: u64,
    z_mask: u64,
    n_y: u32,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Result<PauliString> {
        let n = ops.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty Pauli string".into()));
        }
        if n > 62 {
            return Err(Error::InvalidInput(format!("{n} qubits exceeds the supported maximum of 62")));
        }
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        let mut n_y = 0;
        for (q, p) in ops.iter().enumerate() {
            let bit = 1u64 << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        Ok(PauliString { ops, x_mask, z_mask, n_y })
    }

    pub fn identity(n_qubits: usize) -> Result<PauliString> {
        PauliString::new(vec![Pauli::I; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn dim(&self) -> usize {
        1usize << self.ops.len()
    }

    fn y_phase(&self) -> C64 {
        match self.n_y % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// out = P·state.
    pub fn apply_into(&self, state: &[C64], out: &mut [C64]) {
        debug_assert_eq!(state.len(), self.dim());
        let ph = self.y_phase();
        for (b, amp) in state.iter().enumerate() {
            let sign = if (b as u64 & self.z_mask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ self.x_mask as usize] = *amp * ph * sign;
        }
    }

    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        self.apply_into(state, &mut out);
        out
    }

    /// state ← cos θ·state − i sin θ·P·state, i.e. e^{−iθP}.
    pub fn rotate_in_place(&self, theta: f64, state: &mut [C64], scratch: &mut [C64]) {
        self.apply_into(state, scratch);
        let c = theta.cos();
        let s = C64::new(0.0, -theta.sin());
        for (a, p) in state.iter_mut().zip(scratch.iter()) {
            *a = *a * c + *p * s;
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        let ph = self.y_phase();
        for b in 0..dim {
            let sign = if (b as u64 & self.z_mask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(b ^ self.x_mask as usize, b)] = ph * sign;
        }
        m
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let a = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        a.is_multiple_of(2)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.ops {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<PauliString> {
        let ops = s
            .trim()
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Parse(format!("unknown Pauli symbol '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(ops)
    }
}

/// H = Σ_j p_j P_j with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliHamiltonian {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<PauliHamiltonian> {
        let n_qubits = match terms.first() {
            Some((_, p)) => p.n_qubits(),
            None => return Err(Error::InvalidInput("Hamiltonian has no terms".into())),
        };
        for (c, p) in &terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::InvalidInput(format!(
                    "term {p} acts on {} qubits, expected {n_qubits}",
                    p.n_qubits()
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!("coefficient {c} of {p} is not finite")));
            }
        }
        Ok(PauliHamiltonian { n_qubits, terms })
    }

    pub fn parse(text: &str) -> Result<PauliHamiltonian> {
        super::parse::parse_hamiltonian(text)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// β = Σ|p_j|, an upper bound on ‖H‖.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            m += p.to_dense() * C64::new(*c, 0.0);
        }
        m
    }

    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); state.len()];
        let mut scratch = vec![C64::new(0.0, 0.0); state.len()];
        for (c, p) in &self.terms {
            p.apply_into(state, &mut scratch);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += *s * *c;
            }
        }
        out
    }

    /// H + shift·I, merging into an existing identity term.
    pub fn shifted(&self, shift: f64) -> PauliHamiltonian {
        let mut terms = self.terms.clone();
        match terms.iter_mut().find(|(_, p)| p.is_identity()) {
            Some(t) => t.0 += shift,
            None => terms.push((shift, PauliString::identity(self.n_qubits).expect("valid width"))),
        }
        PauliHamiltonian { n_qubits: self.n_qubits, terms }
    }

    pub fn scaled(&self, factor: f64) -> PauliHamiltonian {
        PauliHamiltonian {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, p)| (c * factor, p.clone())).collect(),
        }
    }
}

impl fmt::Display for PauliHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, p)) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{c}*{p}")?;
            } else if *c < 0.0 {
                write!(f, " - {}*{p}", -c)?;
            } else {
                write!(f, " + {c}*{p}")?;
            }
        }
        Ok(())
    }
}
