//! Mapping the grid problem onto qubits: amplitude encoding of wavefunctions
//! and Pauli-z tensor expansions of diagonal operators.
//!
//! Bit convention, fixed crate-wide: |0> is the +1 eigenstate of sigma_z;
//! grid index k reads as the binary word q1 q2 ... qn with qubit 1 most
//! significant, so |0...0> is the leftmost grid point. Under this convention
//! the position operator's single-z coefficients come out negative.

use crate::linalg::Vector;
use crate::model::{DiagonalOperator, Grid, Representation};
use crate::text::fmt_g12;
use crate::{dynamics::Wavefunction, Error, Result};

/// A diagonal operator written as a real combination of tensor words over
/// {sigma_z, identity}. Coefficients are stored densely, indexed by the mask
/// whose bit (n-j) set means sigma_z on qubit j.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliZExpansion {
    pub qubit_count: u32,
    coefficients: Vec<f64>,
}

impl PauliZExpansion {
    /// The word for a mask, e.g. mask 0b100 on 3 qubits -> "zii".
    pub fn word(&self, mask: usize) -> String {
        let n = self.qubit_count;
        (1..=n)
            .map(|j| {
                if mask >> (n - j) & 1 == 1 {
                    'z'
                } else {
                    'i'
                }
            })
            .collect()
    }

    /// Coefficient of a word like "ziz"; unknown letters are an error.
    pub fn coefficient(&self, word: &str) -> Result<f64> {
        let n = self.qubit_count as usize;
        if word.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "word {word:?} on {n} qubits"
            )));
        }
        let mut mask = 0usize;
        for (idx, ch) in word.chars().enumerate() {
            match ch {
                'z' => mask |= 1 << (n - 1 - idx),
                'i' => {}
                _ => {
                    return Err(Error::Config(format!("bad Pauli word letter {ch:?}")));
                }
            }
        }
        Ok(self.coefficients[mask])
    }

    /// (word, coefficient) pairs in mask order.
    pub fn iter(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(mask, &c)| (self.word(mask), c))
    }

    /// Words with |coefficient| above `tol`.
    pub fn nonzero_words(&self, tol: f64) -> Vec<(String, f64)> {
        self.iter().filter(|(_, c)| c.abs() > tol).collect()
    }

    /// `word,coefficient` table, one line per word.
    pub fn to_table(&self) -> String {
        let mut out = String::from("word,coefficient\n");
        for (w, c) in self.iter() {
            out.push_str(&format!("{},{}\n", w, fmt_g12(c)));
        }
        out
    }
}

/// Expand a diagonal operator over Pauli-z tensor words via the fast
/// Walsh-Hadamard transform: coeff(word) = 2^-n sum_k diag[k] prod_j s_j(k),
/// with s_j(k) = +1 when bit j of k selects |0>.
pub fn expand_diagonal(diag: &DiagonalOperator, n: u32) -> Result<PauliZExpansion> {
    let len = diag.values.len();
    if len != 1usize << n {
        return Err(Error::DimensionMismatch(format!(
            "diagonal length {len} vs 2^{n}"
        )));
    }
    let mut c = diag.values.clone();
    let mut h = 1usize;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for k in start..start + h {
                let a = c[k];
                let b = c[k + h];
                c[k] = a + b;
                c[k + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / len as f64;
    for x in c.iter_mut() {
        *x *= scale;
    }
    Ok(PauliZExpansion {
        qubit_count: n,
        coefficients: c,
    })
}

/// Evaluate the tensor sum on the computational basis; exact inverse of
/// [`expand_diagonal`].
pub fn reconstruct_diagonal(exp: &PauliZExpansion) -> DiagonalOperator {
    let len = 1usize << exp.qubit_count;
    let mut v = exp.coefficients.clone();
    let mut h = 1usize;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for k in start..start + h {
                let a = v[k];
                let b = v[k + h];
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
    DiagonalOperator {
        values: v,
        representation: Representation::Position,
    }
}

/// Amplitude encoding: grid point k's amplitude becomes the amplitude of
/// basis state |k> (qubit 1 most significant). With the crate's index
/// convention this is the identity on the amplitude vector.
pub fn encode_state(psi: &Wavefunction) -> Result<Vector> {
    if !psi.grid.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(psi.grid.len()));
    }
    Ok(psi.amplitudes.clone())
}

/// Inverse of [`encode_state`].
pub fn decode_state(statevector: &Vector, grid: &Grid) -> Result<Wavefunction> {
    if statevector.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "statevector {} vs grid {}",
            statevector.len(),
            grid.len()
        )));
    }
    Ok(Wavefunction::new(
        statevector.clone(),
        grid.clone(),
        Representation::Position,
    ))
}
