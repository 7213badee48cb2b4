//! Physical model of the driven double-well system: potential, laser envelope,
//! grid, unit conversions, and the diagonal operator tables (V_diag, T_diag,
//! q_diag) that both propagation routes consume.
//!
//! Everything internal is in atomic units (e = hbar = 1, energies in hartree,
//! lengths in bohr); femtoseconds are accepted at the configuration boundary
//! and converted on input.

use crate::{Error, Result};

/// Bohr radius in angstrom.
pub const BOHR_IN_ANGSTROM: f64 = 0.529177210903;
/// Atomic unit of time in femtoseconds.
pub const AU_TIME_IN_FS: f64 = 0.024188843265857;
/// Proton mass in electron masses.
pub const PROTON_MASS: f64 = 1836.15;

/// Convert femtoseconds to atomic units of time.
pub fn fs_to_au(t_fs: f64) -> f64 {
    t_fs / AU_TIME_IN_FS
}

/// All physical parameters of the driven double-well system, plus grid
/// settings. Immutable value; construct with [`ReactionModel::default`] and
/// override fields as needed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionModel {
    /// Barrier height V‡ (hartree).
    pub barrier_height: f64,
    /// Well asymmetry Δ (hartree); the left well sits Δ below the right one.
    pub asymmetry: f64,
    /// Well minimum location q0 (bohr); minima at ±q0.
    pub well_position: f64,
    /// Mass of the transferred particle (electron masses).
    pub mass: f64,
    /// Effective charge in the dipole μ = e·q (dimensionless, 1).
    pub charge: f64,
    /// Peak field amplitude ε0 (atomic units).
    pub field_amplitude: f64,
    /// End of the sin² ramp-up s1 (fs).
    pub ramp_up_end: f64,
    /// Start of the sin² ramp-down s2 (fs).
    pub ramp_down_start: f64,
    /// Total pulse duration t_f (fs).
    pub total_time: f64,
    /// Number of propagation steps M.
    pub step_count: usize,
    /// Factor applied to the two end-point potential values.
    pub wall_scale: f64,
    /// Grid half-width (bohr).
    pub grid_extent: f64,
}

impl Default for ReactionModel {
    fn default() -> Self {
        ReactionModel {
            barrier_height: 0.00625,
            asymmetry: 0.000257,
            well_position: 1.0,
            mass: PROTON_MASS,
            charge: 1.0,
            field_amplitude: 1.0e-3,
            ramp_up_end: 5.0,
            ramp_down_start: 32.5,
            total_time: 37.5,
            step_count: 25,
            wall_scale: 30.0,
            // 0.8 angstrom; prints as 1.51 bohr
            grid_extent: 0.8 / BOHR_IN_ANGSTROM,
        }
    }
}

impl ReactionModel {
    /// Validate the invariants the rest of the crate relies on.
    pub fn validate(&self) -> Result<()> {
        if self.barrier_height <= 0.0 {
            return Err(Error::Config("barrier_height must be > 0".into()));
        }
        if self.well_position <= 0.0 {
            return Err(Error::Config("well_position must be > 0".into()));
        }
        if !(0.0 < self.ramp_up_end
            && self.ramp_up_end < self.ramp_down_start
            && self.ramp_down_start < self.total_time)
        {
            return Err(Error::Config(
                "need 0 < ramp_up_end < ramp_down_start < total_time".into(),
            ));
        }
        if self.step_count == 0 {
            return Err(Error::Config("step_count must be >= 1".into()));
        }
        if self.mass <= 0.0 {
            return Err(Error::Config("mass must be > 0".into()));
        }
        Ok(())
    }

    /// Step length in fs.
    pub fn dt_fs(&self) -> f64 {
        self.total_time / self.step_count as f64
    }

    /// Step length in atomic units.
    pub fn dt_au(&self) -> f64 {
        fs_to_au(self.dt_fs())
    }
}

/// Uniform position grid, symmetric about 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Positions (bohr), length 2^n.
    pub positions: Vec<f64>,
    /// Spacing Δq (bohr).
    pub spacing: f64,
}

impl Grid {
    /// Build an `N = 2^qubits` point grid spanning ±`model.grid_extent`.
    pub fn new(model: &ReactionModel, qubits: u32) -> Grid {
        let n = 1usize << qubits;
        let spacing = 2.0 * model.grid_extent / (n - 1) as f64;
        let positions = (0..n)
            .map(|k| spacing * (k as f64 - (n - 1) as f64 / 2.0))
            .collect();
        Grid { positions, spacing }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn qubit_count(&self) -> u32 {
        self.len().trailing_zeros()
    }
}

/// Which basis a diagonal operator is diagonal in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Position,
    Momentum,
}

/// A diagonal operator over the grid: potential and kinetic energies in
/// hartree, positions in bohr.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    pub values: Vec<f64>,
    pub representation: Representation,
}

/// The bare double-well potential at position `q`, no wall scaling.
pub fn potential_at(model: &ReactionModel, q: f64) -> f64 {
    let q0 = model.well_position;
    let lin = model.asymmetry / (2.0 * q0) * (q - q0);
    let quart = (model.barrier_height - model.asymmetry / 2.0) / q0.powi(4)
        * (q - q0).powi(2)
        * (q + q0).powi(2);
    lin + quart
}

/// Potential table over the grid, with the two end points scaled by
/// `wall_scale` so amplitudes decay at the box edges.
pub fn build_potential_diag(model: &ReactionModel, grid: &Grid) -> DiagonalOperator {
    let n = grid.len();
    let mut values: Vec<f64> = grid.positions.iter().map(|&q| potential_at(model, q)).collect();
    values[0] *= model.wall_scale;
    values[n - 1] *= model.wall_scale;
    DiagonalOperator {
        values,
        representation: Representation::Position,
    }
}

/// Kinetic table p²/2m in the discrete-transform momentum ordering:
/// index k carries momentum 2π·κ(k)/(N·Δq) with κ = k for k ≤ N/2 and
/// κ = k − N above.
pub fn build_kinetic_diag(model: &ReactionModel, grid: &Grid) -> Result<DiagonalOperator> {
    let n = grid.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let base = 2.0 * std::f64::consts::PI / (n as f64 * grid.spacing);
    let values = (0..n)
        .map(|k| {
            let kappa = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let p = base * kappa;
            p * p / (2.0 * model.mass)
        })
        .collect();
    Ok(DiagonalOperator {
        values,
        representation: Representation::Momentum,
    })
}

/// Position table q_diag.
pub fn build_position_diag(grid: &Grid) -> DiagonalOperator {
    DiagonalOperator {
        values: grid.positions.clone(),
        representation: Representation::Position,
    }
}

/// Laser field envelope at time `t_fs`: sin² ramp, plateau, sin² ramp.
pub fn field_at(model: &ReactionModel, t_fs: f64) -> Result<f64> {
    let (s1, s2, tf) = (model.ramp_up_end, model.ramp_down_start, model.total_time);
    if !(0.0..=tf).contains(&t_fs) {
        return Err(Error::TimeOutOfRange(t_fs, tf));
    }
    let e0 = model.field_amplitude;
    let value = if t_fs <= s1 {
        e0 * (std::f64::consts::PI * t_fs / (2.0 * s1)).sin().powi(2)
    } else if t_fs < s2 {
        e0
    } else {
        e0 * (std::f64::consts::PI * (tf - t_fs) / (2.0 * (tf - s2)))
            .sin()
            .powi(2)
    };
    Ok(value)
}

/// Field sampled at step midpoints: entry m (1-based) is ε((m − ½)·δt).
pub fn field_midpoint_table(model: &ReactionModel) -> Vec<f64> {
    let dt = model.dt_fs();
    (1..=model.step_count)
        .map(|m| field_at(model, (m as f64 - 0.5) * dt).expect("midpoint inside window"))
        .collect()
}

/// Least-squares fit of the mass to a printed kinetic table (magnitudes),
/// holding the grid fixed. Returns the fitted mass.
pub fn fit_mass_to_kinetic(grid: &Grid, printed_magnitudes: &[f64]) -> Result<f64> {
    let n = grid.len();
    if printed_magnitudes.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "kinetic table length {} vs grid {}",
            printed_magnitudes.len(),
            n
        )));
    }
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let base = 2.0 * std::f64::consts::PI / (n as f64 * grid.spacing);
    // T_k = c_k / m with c_k = p_k^2 / 2; least squares in 1/m
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, t) in printed_magnitudes.iter().enumerate() {
        let kappa = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let c = (base * kappa).powi(2) / 2.0;
        num += c * t.abs();
        den += c * c;
    }
    Ok(den / num)
}
