//! Randomized linear-combination-of-unitaries estimators with classical
//! simulation backends.
//!
//! The crate is organised bottom-up: [`core_algebra`] provides dense
//! operators and Pauli Hamiltonians, [`lcu_decomp`] builds explicit
//! decompositions, [`estimator`] runs the single-ancilla sampling procedure,
//! [`applications`] wires them into Hamiltonian simulation, ground-state
//! property estimation and linear systems, [`analog`] simulates the
//! continuous-variable ancilla variants, [`walks`] covers quantum-walk
//! search, and [`harness`] drives experiments and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analog;
pub mod applications;
pub mod core_algebra;
pub mod estimator;
pub mod error;
pub mod harness;
pub mod lcu_decomp;
pub mod rng;
pub mod walks;

pub use error::{Error, Result};
