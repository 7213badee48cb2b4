//! Grid-based reference propagation: eigenstates of the bare Hamiltonian,
//! split-operator time stepping under the laser field, and the reaction
//! observables (reactant/product overlaps per step). This route is the oracle
//! the gate-circuit route is checked against.

use crate::linalg::{adjoint, inner, norm_sqr, HermitianEigen, Mat, Vector, C64};
use crate::model::{
    build_kinetic_diag, build_position_diag, build_potential_diag, field_midpoint_table, Grid,
    ReactionModel, Representation,
};
use crate::text::fmt_g12;
use crate::{Error, Result};
use ndarray::Array2;

/// Discrete Fourier matrix F[j,k] = e^{+2πi·jk/N}/√N.
///
/// This is the one transform convention of the whole crate: `F ψ` maps a
/// position-representation amplitude vector to the momentum ordering of
/// `build_kinetic_diag`, and the QFT gate network of the circuit module
/// equals this matrix.
pub fn dft_matrix(n: usize) -> Mat {
    let norm = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(j, k)| {
        C64::from_polar(
            norm,
            2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / n as f64,
        )
    })
}

/// Complex amplitude vector over the grid; the evolving state.
#[derive(Debug, Clone)]
pub struct Wavefunction {
    pub amplitudes: Vector,
    pub grid: Grid,
    pub representation: Representation,
}

impl Wavefunction {
    pub fn new(amplitudes: Vector, grid: Grid, representation: Representation) -> Self {
        Wavefunction {
            amplitudes,
            grid,
            representation,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Probability on grid points with q < 0.
    pub fn left_probability(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(self.grid.positions.iter())
            .filter(|(_, &q)| q < 0.0)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }

    /// Probability on grid points with q > 0.
    pub fn right_probability(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(self.grid.positions.iter())
            .filter(|(_, &q)| q > 0.0)
            .map(|(a, _)| a.norm_sqr())
            .sum()
    }
}

/// Energy eigenpair of the bare Hamiltonian T + V.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub energy: f64,
    pub state: Wavefunction,
}

/// Reactant/product overlaps at one step boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub step_index: usize,
    pub time_fs: f64,
    pub reactant_overlap: f64,
    pub product_overlap: f64,
}

/// Dense bare Hamiltonian F† diag(T) F + diag(V), Hermitian.
pub fn bare_hamiltonian_matrix(model: &ReactionModel, grid: &Grid) -> Result<Mat> {
    let n = grid.len();
    let t = build_kinetic_diag(model, grid)?;
    let v = build_potential_diag(model, grid);
    let f = dft_matrix(n);
    let mut td = Mat::zeros((n, n));
    for k in 0..n {
        td[(k, k)] = C64::new(t.values[k], 0.0);
    }
    let mut h = adjoint(&f).dot(&td).dot(&f);
    for k in 0..n {
        h[(k, k)] += C64::new(v.values[k], 0.0);
    }
    Ok(h)
}

/// Lowest `count` eigenpairs of the bare Hamiltonian, ascending energy, each
/// state's largest-magnitude amplitude made real positive.
pub fn lowest_eigenpairs(
    model: &ReactionModel,
    grid: &Grid,
    count: usize,
) -> Result<Vec<EigenPair>> {
    let h = bare_hamiltonian_matrix(model, grid)?;
    let eig = HermitianEigen::new(&h);
    if eig.values.len() >= 2 {
        let gap = eig.values[1] - eig.values[0];
        if gap < 1e-12 {
            return Err(Error::DegenerateEigenpair(gap));
        }
    }
    Ok((0..count.min(grid.len()))
        .map(|j| EigenPair {
            energy: eig.values[j],
            state: Wavefunction::new(
                eig.vectors.column(j).to_owned(),
                grid.clone(),
                Representation::Position,
            ),
        })
        .collect())
}

/// |<φ|ψ>|², requiring matching grids and representations.
pub fn overlap(psi: &Wavefunction, phi: &Wavefunction) -> Result<f64> {
    if psi.grid != phi.grid || psi.representation != phi.representation {
        return Err(Error::DimensionMismatch(
            "overlap of states on different grids or representations".into(),
        ));
    }
    Ok(inner(&phi.amplitudes, &psi.amplitudes).norm_sqr())
}

/// Precomputed split-operator stepper for one model/grid pair.
///
/// A step applies, in order: e^{−iV δt/2}, e^{+i q ε_m δt/2}, transform to
/// momentum, e^{−iT δt}, transform back, the laser phase again, the potential
/// phase again. All phases in atomic units with the field evaluated at the
/// step midpoint.
pub struct SplitPropagator {
    half_potential: Vec<C64>,
    kinetic: Vec<C64>,
    q_values: Vec<f64>,
    field_table: Vec<f64>,
    forward: Mat,
    backward: Mat,
    dt_au: f64,
    charge: f64,
    step_count: usize,
}

impl SplitPropagator {
    pub fn new(model: &ReactionModel, grid: &Grid) -> Result<Self> {
        let n = grid.len();
        let dt = model.dt_au();
        let v = build_potential_diag(model, grid);
        let t = build_kinetic_diag(model, grid)?;
        let q = build_position_diag(grid);
        let f = dft_matrix(n);
        Ok(SplitPropagator {
            half_potential: v
                .values
                .iter()
                .map(|&x| C64::from_polar(1.0, -x * dt / 2.0))
                .collect(),
            kinetic: t
                .values
                .iter()
                .map(|&x| C64::from_polar(1.0, -x * dt))
                .collect(),
            q_values: q.values,
            field_table: field_midpoint_table(model),
            backward: adjoint(&f),
            forward: f,
            dt_au: dt,
            charge: model.charge,
            step_count: model.step_count,
        })
    }

    fn laser_phase(&self, m: usize) -> Vec<C64> {
        let eps = self.field_table[m - 1];
        self.q_values
            .iter()
            .map(|&q| C64::from_polar(1.0, self.charge * q * eps * self.dt_au / 2.0))
            .collect()
    }

    /// One split step for interval `m` (1-based).
    pub fn step(&self, psi: &Wavefunction, m: usize) -> Result<Wavefunction> {
        if m == 0 || m > self.step_count {
            return Err(Error::StepOutOfRange(m, self.step_count));
        }
        let laser = self.laser_phase(m);
        let mut a = psi.amplitudes.clone();
        for (x, p) in a.iter_mut().zip(self.half_potential.iter()) {
            *x *= p;
        }
        for (x, p) in a.iter_mut().zip(laser.iter()) {
            *x *= p;
        }
        let mut mom = self.forward.dot(&a);
        for (x, p) in mom.iter_mut().zip(self.kinetic.iter()) {
            *x *= p;
        }
        let mut back = self.backward.dot(&mom);
        for (x, p) in back.iter_mut().zip(laser.iter()) {
            *x *= p;
        }
        for (x, p) in back.iter_mut().zip(self.half_potential.iter()) {
            *x *= p;
        }
        Ok(Wavefunction::new(
            back,
            psi.grid.clone(),
            psi.representation,
        ))
    }

    /// Inverse of [`SplitPropagator::step`]: conjugated phases in reverse order.
    pub fn step_inverse(&self, psi: &Wavefunction, m: usize) -> Result<Wavefunction> {
        if m == 0 || m > self.step_count {
            return Err(Error::StepOutOfRange(m, self.step_count));
        }
        let laser = self.laser_phase(m);
        let mut a = psi.amplitudes.clone();
        for (x, p) in a.iter_mut().zip(self.half_potential.iter()) {
            *x *= p.conj();
        }
        for (x, p) in a.iter_mut().zip(laser.iter()) {
            *x *= p.conj();
        }
        let mut mom = self.forward.dot(&a);
        for (x, p) in mom.iter_mut().zip(self.kinetic.iter()) {
            *x *= p.conj();
        }
        let mut back = self.backward.dot(&mom);
        for (x, p) in back.iter_mut().zip(laser.iter()) {
            *x *= p.conj();
        }
        for (x, p) in back.iter_mut().zip(self.half_potential.iter()) {
            *x *= p.conj();
        }
        Ok(Wavefunction::new(
            back,
            psi.grid.clone(),
            psi.representation,
        ))
    }
}

/// One split step built from scratch; see [`SplitPropagator::step`].
pub fn split_step(psi: &Wavefunction, model: &ReactionModel, m: usize) -> Result<Wavefunction> {
    SplitPropagator::new(model, &psi.grid)?.step(psi, m)
}

/// Propagate `psi0` through all M steps, recording reactant/product overlaps
/// at every step boundary (snapshot 0 is the initial state). Aborts if the
/// norm drifts by more than 1e-9.
pub fn propagate(
    model: &ReactionModel,
    grid: &Grid,
    psi0: &Wavefunction,
) -> Result<(Vec<Snapshot>, Wavefunction)> {
    let pairs = lowest_eigenpairs(model, grid, 2)?;
    let (phi0, phi1) = (&pairs[0].state, &pairs[1].state);
    let prop = SplitPropagator::new(model, grid)?;
    let dt_fs = model.dt_fs();

    let mut psi = psi0.clone();
    let mut snapshots = Vec::with_capacity(model.step_count + 1);
    snapshots.push(Snapshot {
        step_index: 0,
        time_fs: 0.0,
        reactant_overlap: overlap(&psi, phi0)?,
        product_overlap: overlap(&psi, phi1)?,
    });
    for m in 1..=model.step_count {
        psi = prop.step(&psi, m)?;
        let drift = (psi.norm_sqr() - 1.0).abs();
        if drift > 1e-9 {
            return Err(Error::NormDrift(drift));
        }
        snapshots.push(Snapshot {
            step_index: m,
            time_fs: m as f64 * dt_fs,
            reactant_overlap: overlap(&psi, phi0)?,
            product_overlap: overlap(&psi, phi1)?,
        });
    }
    Ok((snapshots, psi))
}

/// Propagation from the ground state on a fine grid (N >= 64) for comparison
/// against the 8-point run.
pub fn exact_reference(model: &ReactionModel, grid: &Grid) -> Result<Vec<Snapshot>> {
    if grid.len() < 64 {
        return Err(Error::DimensionMismatch(format!(
            "reference grid needs at least 64 points, got {}",
            grid.len()
        )));
    }
    let pairs = lowest_eigenpairs(model, grid, 1)?;
    let (snapshots, _) = propagate(model, grid, &pairs[0].state)?;
    Ok(snapshots)
}

/// CSV export: header `step,time_fs,reactant,product`, 12 significant digits,
/// LF line endings.
pub fn snapshots_to_csv(snapshots: &[Snapshot]) -> String {
    let mut out = String::from("step,time_fs,reactant,product\n");
    for s in snapshots {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.step_index,
            fmt_g12(s.time_fs),
            fmt_g12(s.reactant_overlap),
            fmt_g12(s.product_overlap)
        ));
    }
    out
}

/// JSON export: array of records mirroring the CSV columns.
pub fn snapshots_to_json(snapshots: &[Snapshot]) -> String {
    let rows: Vec<String> = snapshots
        .iter()
        .map(|s| {
            format!(
                "{{\"step\":{},\"time_fs\":{},\"reactant\":{},\"product\":{}}}",
                s.step_index,
                fmt_g12(s.time_fs),
                fmt_g12(s.reactant_overlap),
                fmt_g12(s.product_overlap)
            )
        })
        .collect();
    format!("[\n  {}\n]\n", rows.join(",\n  "))
}
