//! Gate-level route: the gate set, the QFT network, per-step propagation
//! networks, and a statevector simulator that executes them.
//!
//! Qubit indices are 0-based with qubit 0 the most significant bit of the
//! basis index, matching the amplitude encoding of the `encoding` module.
//! The QFT network's unitary equals the crate's DFT convention
//! F[j,k] = e^{+2πi jk/N}/√N; in the step network it therefore implements the
//! position-to-momentum transform and its adjoint the way back.

use crate::linalg::{Mat, Vector, C64};
use crate::model::{
    build_kinetic_diag, build_position_diag, build_potential_diag, field_midpoint_table,
    DiagonalOperator, Grid, ReactionModel,
};
use crate::text::fmt_g12;
use crate::{Error, Result};
use std::f64::consts::PI;

/// One gate. Phase gates S and T match the printed matrices diag(1, i) and
/// diag(1, e^{iπ/4}); `DiagonalPhase` holds a full 2^n diagonal of unit-modulus
/// factors and is how the V, T and laser phases enter the step network.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Hadamard { target: usize },
    PhaseS { target: usize },
    PhaseT { target: usize },
    ControlledPhase { control: usize, target: usize, angle: f64 },
    Swap { a: usize, b: usize },
    DiagonalPhase { phases: Vec<C64> },
}

impl Gate {
    fn max_index(&self) -> Option<usize> {
        match self {
            Gate::Hadamard { target } | Gate::PhaseS { target } | Gate::PhaseT { target } => {
                Some(*target)
            }
            Gate::ControlledPhase { control, target, .. } => Some((*control).max(*target)),
            Gate::Swap { a, b } => Some((*a).max(*b)),
            Gate::DiagonalPhase { .. } => None,
        }
    }

    /// Serialization line: `GATE targets [controls] [params]`.
    fn to_line(&self) -> String {
        match self {
            Gate::Hadamard { target } => format!("H {target}"),
            Gate::PhaseS { target } => format!("S {target}"),
            Gate::PhaseT { target } => format!("T {target}"),
            Gate::ControlledPhase { control, target, angle } => {
                format!("CPHASE {target} {control} {}", fmt_g12(*angle))
            }
            Gate::Swap { a, b } => format!("SWAP {a} {b}"),
            Gate::DiagonalPhase { phases } => {
                let angles: Vec<String> = phases.iter().map(|z| fmt_g12(z.arg())).collect();
                format!("DIAG {}", angles.join(" "))
            }
        }
    }
}

/// An ordered gate list over n qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub qubit_count: u32,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: u32) -> Self {
        Circuit {
            qubit_count,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(ix) = gate.max_index() {
            if ix >= self.qubit_count as usize {
                return Err(Error::DimensionMismatch(format!(
                    "gate index {ix} on {} qubits",
                    self.qubit_count
                )));
            }
        }
        if let Gate::DiagonalPhase { phases } = &gate {
            if phases.len() != 1usize << self.qubit_count {
                return Err(Error::DimensionMismatch(format!(
                    "diagonal length {} on {} qubits",
                    phases.len(),
                    self.qubit_count
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    /// Line-oriented text form for golden-file tests.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {}\n", self.qubit_count);
        for g in &self.gates {
            out.push_str(&g.to_line());
            out.push('\n');
        }
        out
    }
}

fn apply_gate(gate: &Gate, state: &mut Vector, n: u32) {
    let dim = state.len();
    match gate {
        Gate::Hadamard { target } => {
            let bit = 1usize << (n as usize - 1 - target);
            let s = 1.0 / 2f64.sqrt();
            for i in 0..dim {
                if i & bit == 0 {
                    let a = state[i];
                    let b = state[i | bit];
                    state[i] = (a + b) * s;
                    state[i | bit] = (a - b) * s;
                }
            }
        }
        Gate::PhaseS { target } => phase_on_bit(state, n, *target, C64::new(0.0, 1.0)),
        Gate::PhaseT { target } => {
            phase_on_bit(state, n, *target, C64::from_polar(1.0, PI / 4.0))
        }
        Gate::ControlledPhase { control, target, angle } => {
            let cb = 1usize << (n as usize - 1 - control);
            let tb = 1usize << (n as usize - 1 - target);
            let f = C64::from_polar(1.0, *angle);
            for i in 0..dim {
                if i & cb != 0 && i & tb != 0 {
                    state[i] *= f;
                }
            }
        }
        Gate::Swap { a, b } => {
            let ab = 1usize << (n as usize - 1 - a);
            let bb = 1usize << (n as usize - 1 - b);
            for i in 0..dim {
                if i & ab != 0 && i & bb == 0 {
                    state.swap(i, (i & !ab) | bb);
                }
            }
        }
        Gate::DiagonalPhase { phases } => {
            for (x, p) in state.iter_mut().zip(phases.iter()) {
                *x *= p;
            }
        }
    }
}

fn phase_on_bit(state: &mut Vector, n: u32, target: usize, f: C64) {
    let bit = 1usize << (n as usize - 1 - target);
    for i in 0..state.len() {
        if i & bit != 0 {
            state[i] *= f;
        }
    }
}

/// Run a circuit on a statevector.
pub fn run_circuit(circuit: &Circuit, input: &Vector) -> Result<Vector> {
    if input.len() != 1usize << circuit.qubit_count {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs {} qubits",
            input.len(),
            circuit.qubit_count
        )));
    }
    let mut state = input.clone();
    for g in &circuit.gates {
        apply_gate(g, &mut state, circuit.qubit_count);
    }
    Ok(state)
}

/// Dense unitary of a circuit (qubit_count <= 10), columns = images of basis
/// states.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Mat> {
    if circuit.qubit_count > 10 {
        return Err(Error::DimensionMismatch(format!(
            "{} qubits is too large for a dense unitary",
            circuit.qubit_count
        )));
    }
    let dim = 1usize << circuit.qubit_count;
    let mut u = Mat::zeros((dim, dim));
    for k in 0..dim {
        let mut e = Vector::zeros(dim);
        e[k] = C64::new(1.0, 0.0);
        let col = run_circuit(circuit, &e)?;
        for i in 0..dim {
            u[(i, k)] = col[i];
        }
    }
    Ok(u)
}

/// Standard QFT network: per-qubit Hadamard plus a controlled-phase ladder
/// (angles π/2, π/4, ... — S and T for n = 3), then swaps reversing the qubit
/// order. Its unitary is the DFT matrix of `dynamics::dft_matrix`.
pub fn qft_circuit(n: u32) -> Circuit {
    let mut c = Circuit::new(n);
    for j in 0..n as usize {
        c.push(Gate::Hadamard { target: j }).expect("index in range");
        for k in (j + 1)..n as usize {
            c.push(Gate::ControlledPhase {
                control: k,
                target: j,
                angle: PI / (1u64 << (k - j)) as f64,
            })
            .expect("index in range");
        }
    }
    for i in 0..(n as usize) / 2 {
        c.push(Gate::Swap {
            a: i,
            b: n as usize - 1 - i,
        })
        .expect("index in range");
    }
    c
}

/// Adjoint of [`qft_circuit`]: reversed gate order, negated phases.
pub fn qft_inverse_circuit(n: u32) -> Circuit {
    let fwd = qft_circuit(n);
    let mut c = Circuit::new(n);
    for g in fwd.gates.iter().rev() {
        let inv = match g {
            Gate::ControlledPhase { control, target, angle } => Gate::ControlledPhase {
                control: *control,
                target: *target,
                angle: -angle,
            },
            other => other.clone(),
        };
        c.push(inv).expect("index in range");
    }
    c
}

/// Diagonal phase gate with entries e^{−i·scale·diag[k]}. The laser term
/// E = e^{+i q ε δt/2} is obtained by folding the sign into `scale`
/// (scale = −ε_m·δt/2).
pub fn diagonal_phase_circuit(diag: &DiagonalOperator, scale: f64) -> Gate {
    Gate::DiagonalPhase {
        phases: diag
            .values
            .iter()
            .map(|&x| C64::from_polar(1.0, -scale * x))
            .collect(),
    }
}

/// Gate network for one propagation step m (1-based): V and laser phases,
/// QFT to momentum, kinetic phase, QFT back, laser and V phases again.
pub fn step_circuit(model: &ReactionModel, grid: &Grid, m: usize) -> Result<Circuit> {
    if m == 0 || m > model.step_count {
        return Err(Error::StepOutOfRange(m, model.step_count));
    }
    let n = grid.qubit_count();
    let dt = model.dt_au();
    let v = build_potential_diag(model, grid);
    let t = build_kinetic_diag(model, grid)?;
    let q = build_position_diag(grid);
    let eps = field_midpoint_table(model)[m - 1];

    let v_half = diagonal_phase_circuit(&v, dt / 2.0);
    let laser = diagonal_phase_circuit(&q, -model.charge * eps * dt / 2.0);
    let kinetic = diagonal_phase_circuit(&t, dt);

    let mut c = Circuit::new(n);
    c.push(v_half.clone())?;
    c.push(laser.clone())?;
    c.extend(&qft_circuit(n))?;
    c.push(kinetic)?;
    c.extend(&qft_inverse_circuit(n))?;
    c.push(laser)?;
    c.push(v_half)?;
    Ok(c)
}

/// The accumulated network U(t_j, 0): step circuits 1..=j concatenated in
/// application order.
pub fn accumulated_circuit(model: &ReactionModel, grid: &Grid, j: usize) -> Result<Circuit> {
    let mut c = Circuit::new(grid.qubit_count());
    for m in 1..=j {
        c.extend(&step_circuit(model, grid, m)?)?;
    }
    Ok(c)
}
