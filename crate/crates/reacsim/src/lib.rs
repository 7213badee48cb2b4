//! Quantum dynamics of a laser-driven hydrogen-transfer reaction, computed two
//! independent ways: a grid-based split-operator propagator and a qubit-encoded
//! gate network executed on a statevector simulator. A third layer emulates the
//! NMR control side: GRAPE pulse synthesis for a 3-spin system, pseudo-pure
//! states, and the diagonalization trick that turns overlap measurements into
//! population readouts.
//!
//! The double well, laser envelope, grids and operator tables live in [`model`];
//! [`dynamics`] propagates wavefunctions and extracts reactant/product overlaps;
//! [`encoding`] maps diagonal operators onto Pauli-z tensor words and grid
//! amplitudes onto computational basis states; [`circuit`] builds the QFT and
//! per-step gate networks and runs them; [`control`] holds the spin Hamiltonian,
//! pulse propagators, the GRAPE optimizer and the population measurement scheme.
//!
//! The `parallel` feature (on by default) routes the data-parallel inner loops
//! (GRAPE segment exponentials and gradients, ensembles, batch checks) through
//! rayon; with the feature off everything runs sequentially.

pub mod circuit;
pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod encoding;
pub mod linalg;
pub mod model;

mod text;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("time {0} fs outside pulse window [0, {1}] fs")]
    TimeOutOfRange(f64, f64),
    #[error("step index {0} outside [1, {1}]")]
    StepOutOfRange(usize, usize),
    #[error("norm drift {0:e} exceeds tolerance")]
    NormDrift(f64),
    #[error("degenerate lowest eigenpair (gap {0:e})")]
    DegenerateEigenpair(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("zero-purity density matrix")]
    ZeroPurity,
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
