//! NMR control layer: the 3-spin internal Hamiltonian, piecewise-constant
//! control pulses, GRAPE gradient-ascent synthesis of target unitaries,
//! pseudo-pure states, density-matrix fidelity, and the diagonalization-based
//! population measurement scheme.
//!
//! Units: offsets, couplings and control amplitudes in Hz, durations in
//! seconds; Hamiltonians carry the 2π so propagators are exp(-i H t) with t
//! in seconds.

use crate::linalg::{adjoint, identity, kron, outer, HermitianEigen, Mat, Vector, C64};
use crate::text::fmt_g12;
use crate::{Error, Result};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Control channel axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// A weak-coupling spin system with per-spin offsets, scalar couplings and
/// x/y control channels.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    pub spin_count: usize,
    /// Resonance offsets ν_j (Hz).
    pub offsets_hz: Vec<f64>,
    /// Scalar couplings J_jk (Hz), one entry per unordered pair j < k.
    pub couplings_hz: Vec<((usize, usize), f64)>,
    /// Control channels (spin, axis).
    pub channels: Vec<(usize, Axis)>,
}

impl Default for SpinSystem {
    /// The Diethyl-fluoromalonate three-spin system in the triple rotating
    /// frame: zero offsets, J12 = -194.4 Hz, J13 = 47.6 Hz, J23 = 160.7 Hz,
    /// x and y channels on every spin.
    fn default() -> Self {
        SpinSystem::with_couplings(3, &[((0, 1), -194.4), ((0, 2), 47.6), ((1, 2), 160.7)])
    }
}

fn spin_half_ops() -> (Mat, Mat, Mat) {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(0.5, 0.0);
    let ix = Array2::from_shape_vec((2, 2), vec![z, h, h, z]).unwrap();
    let iy = Array2::from_shape_vec(
        (2, 2),
        vec![z, C64::new(0.0, -0.5), C64::new(0.0, 0.5), z],
    )
    .unwrap();
    let iz = Array2::from_shape_vec((2, 2), vec![h, z, z, -h]).unwrap();
    (ix, iy, iz)
}

impl SpinSystem {
    pub fn with_couplings(spin_count: usize, couplings: &[((usize, usize), f64)]) -> Self {
        let channels = (0..spin_count)
            .flat_map(|j| [(j, Axis::X), (j, Axis::Y)])
            .collect();
        SpinSystem {
            spin_count,
            offsets_hz: vec![0.0; spin_count],
            couplings_hz: couplings.to_vec(),
            channels,
        }
    }

    /// One uncoupled spin with x/y channels; handy for calibration targets.
    pub fn single_spin() -> Self {
        SpinSystem::with_couplings(1, &[])
    }

    pub fn dim(&self) -> usize {
        1usize << self.spin_count
    }

    /// Single-spin operator embedded at `spin`.
    fn embed(&self, op: &Mat, spin: usize) -> Mat {
        let mut out = identity(1);
        for j in 0..self.spin_count {
            let factor = if j == spin { op.clone() } else { identity(2) };
            out = kron(&out, &factor);
        }
        out
    }

    /// Internal Hamiltonian 2π Σ ν_j Iz_j + 2π Σ_{j<k} J_jk Iz_j Iz_k
    /// (rad/s). Diagonal because every term is built from Iz.
    pub fn internal_hamiltonian(&self) -> Mat {
        let (_, _, iz) = spin_half_ops();
        let dim = self.dim();
        let mut h = Mat::zeros((dim, dim));
        for (j, &nu) in self.offsets_hz.iter().enumerate() {
            if nu != 0.0 {
                h = h + self.embed(&iz, j).mapv(|z| z * TWO_PI * nu);
            }
        }
        for &((j, k), jjk) in &self.couplings_hz {
            let zz = self.embed(&iz, j).dot(&self.embed(&iz, k));
            h = h + zz.mapv(|z| z * TWO_PI * jjk);
        }
        h
    }

    /// Control Hamiltonians 2π I_{x/y}^{(j)} per channel (rad/s per Hz of
    /// amplitude).
    pub fn control_hamiltonians(&self) -> Vec<Mat> {
        let (ix, iy, _) = spin_half_ops();
        self.channels
            .iter()
            .map(|&(spin, axis)| {
                let op = match axis {
                    Axis::X => &ix,
                    Axis::Y => &iy,
                };
                self.embed(op, spin).mapv(|z| z * TWO_PI)
            })
            .collect()
    }
}

/// Piecewise-constant control amplitudes: `amplitudes[segment][channel]` in
/// Hz over `duration_s` seconds split into equal segments.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPulse {
    pub duration_s: f64,
    pub amplitudes: Vec<Vec<f64>>,
}

impl ControlPulse {
    pub fn zeros(segment_count: usize, channel_count: usize, duration_s: f64) -> Self {
        ControlPulse {
            duration_s,
            amplitudes: vec![vec![0.0; channel_count]; segment_count],
        }
    }

    pub fn segment_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn segment_duration(&self) -> f64 {
        self.duration_s / self.segment_count() as f64
    }

    /// CSV export `segment,channel,axis,amplitude_hz`.
    pub fn to_csv(&self, sys: &SpinSystem) -> String {
        let mut out = String::from("segment,channel,axis,amplitude_hz\n");
        for (s, row) in self.amplitudes.iter().enumerate() {
            for (c, &u) in row.iter().enumerate() {
                let (spin, axis) = sys.channels[c];
                let ax = match axis {
                    Axis::X => "x",
                    Axis::Y => "y",
                };
                out.push_str(&format!("{},{},{},{}\n", s + 1, spin + 1, ax, fmt_g12(u)));
            }
        }
        out
    }
}

/// Exact propagator of a pulse: U = U_N ... U_2 U_1 with each segment the
/// exponential of its constant Hamiltonian.
pub fn pulse_propagator(sys: &SpinSystem, pulse: &ControlPulse) -> Result<Mat> {
    pulse_propagator_scaled(sys, pulse, 1.0)
}

/// Same with every control amplitude multiplied by `scale` (RF inhomogeneity
/// ensemble member).
pub fn pulse_propagator_scaled(sys: &SpinSystem, pulse: &ControlPulse, scale: f64) -> Result<Mat> {
    let hks = sys.control_hamiltonians();
    if pulse.amplitudes.iter().any(|row| row.len() != hks.len()) {
        return Err(Error::DimensionMismatch(
            "pulse channel count does not match system channels".into(),
        ));
    }
    let h0 = sys.internal_hamiltonian();
    let dt = pulse.segment_duration();
    let mut u = identity(sys.dim());
    for row in &pulse.amplitudes {
        let mut h = h0.clone();
        for (hk, &amp) in hks.iter().zip(row.iter()) {
            if amp != 0.0 {
                h = h + hk.mapv(|z| z * (scale * amp));
            }
        }
        let uj = HermitianEigen::new(&h).exp_factor(dt);
        u = uj.dot(&u);
    }
    Ok(u)
}

/// Gate fidelity |Tr(U_target† U_actual)/2ⁿ|².
pub fn gate_fidelity(target: &Mat, actual: &Mat) -> Result<f64> {
    if target.dim() != actual.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            target.dim(),
            actual.dim()
        )));
    }
    let dim = target.nrows() as f64;
    let tr: C64 = adjoint(target).dot(actual).diag().iter().sum();
    Ok((tr / dim).norm_sqr())
}

/// Weighted RF-scale ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleMember {
    pub scale: f64,
    pub weight: f64,
}

/// Mean gate fidelity over an RF-scale ensemble.
pub fn ensemble_fidelity(
    sys: &SpinSystem,
    pulse: &ControlPulse,
    target: &Mat,
    ensemble: &[EnsembleMember],
) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let wsum: f64 = ensemble.iter().map(|m| m.weight).sum();
    if (wsum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("ensemble weights sum to {wsum}")));
    }
    let mut f = 0.0;
    for m in ensemble {
        f += m.weight * gate_fidelity(target, &pulse_propagator_scaled(sys, pulse, m.scale)?)?;
    }
    Ok(f)
}

/// How segment-derivative terms are computed in the GRAPE gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    /// Exact Fréchet derivative of each segment exponential via its
    /// eigendecomposition.
    Exact,
    /// First-order approximation dU ≈ -i Δt H_k U, accurate for small
    /// segment angles.
    FirstOrder,
}

/// GRAPE optimizer settings.
#[derive(Debug, Clone)]
pub struct GrapeConfig {
    pub segment_count: usize,
    pub duration_s: f64,
    pub iteration_cap: usize,
    pub fidelity_goal: f64,
    pub amplitude_cap_hz: f64,
    pub initial_amplitude_hz: f64,
    pub seed: u64,
    pub ensemble: Vec<EnsembleMember>,
    pub gradient: GradientMode,
    pub parallel: bool,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        GrapeConfig {
            segment_count: 750,
            duration_s: 15e-3,
            iteration_cap: 1000,
            fidelity_goal: 0.99,
            amplitude_cap_hz: 2.0e4,
            initial_amplitude_hz: 100.0,
            seed: 0,
            ensemble: vec![EnsembleMember {
                scale: 1.0,
                weight: 1.0,
            }],
            gradient: GradientMode::Exact,
            parallel: true,
        }
    }
}

/// Result of a GRAPE run: the pulse, the monotone fidelity trace (one entry
/// per accepted iteration, starting with the initial fidelity), and whether
/// the goal was met.
#[derive(Debug, Clone)]
pub struct GrapeOutcome {
    pub pulse: ControlPulse,
    pub fidelity_trace: Vec<f64>,
    pub final_fidelity: f64,
    pub iterations: usize,
    pub reached_goal: bool,
}

struct SegmentDecomp {
    eig: HermitianEigen,
    unitary: Mat,
}

fn build_decomps(
    h0: &Mat,
    hks: &[Mat],
    amplitudes: &[Vec<f64>],
    scale: f64,
    dt: f64,
    parallel: bool,
) -> Vec<SegmentDecomp> {
    let build = |row: &Vec<f64>| {
        let mut h = h0.clone();
        for (hk, &amp) in hks.iter().zip(row.iter()) {
            if amp != 0.0 {
                let factor = C64::new(scale * amp, 0.0);
                for (dst, src) in h.iter_mut().zip(hk.iter()) {
                    *dst += src * factor;
                }
            }
        }
        let eig = HermitianEigen::new(&h);
        let unitary = eig.exp_factor(dt);
        SegmentDecomp { eig, unitary }
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return amplitudes.par_iter().with_min_len(16).map(build).collect();
    }
    let _ = parallel;
    amplitudes.iter().map(build).collect()
}

/// Tr(target† U_N...U_1)/dim from precomputed segment decompositions.
fn trace_overlap(tdag: &Mat, decomps: &[SegmentDecomp], dim: f64) -> C64 {
    let mut u = tdag.clone();
    for d in decomps.iter().rev() {
        u = u.dot(&d.unitary);
    }
    u.diag().iter().sum::<C64>() / dim
}

/// Fidelity gradient for one ensemble member from its decompositions,
/// accumulated into `grad` with the member's weight.
#[allow(clippy::too_many_arguments)]
fn accumulate_gradient(
    grad: &mut [Vec<f64>],
    hks: &[Mat],
    tdag: &Mat,
    decomps: &[SegmentDecomp],
    g: C64,
    dt: f64,
    member: &EnsembleMember,
    mode: GradientMode,
    parallel: bool,
) {
    let nseg = decomps.len();
    let nchan = hks.len();
    let n = tdag.nrows();
    let dim = n as f64;

    // prefix[j] = U_j ... U_1 (prefix[0] = I), suffix[j] = U_N ... U_{j+1}
    let mut prefix = Vec::with_capacity(nseg + 1);
    prefix.push(identity(n));
    for d in decomps {
        let last = prefix.last().unwrap();
        prefix.push(d.unitary.dot(last));
    }
    let mut suffix = vec![identity(n); nseg + 1];
    for j in (0..nseg).rev() {
        suffix[j] = suffix[j + 1].dot(&decomps[j].unitary);
    }

    let grad_rows = |j: usize| -> Vec<f64> {
        let d = &decomps[j];
        // M = P_{j-1} T† B_j, so dg = Tr(M dU_j)/dim
        let m = prefix[j].dot(tdag).dot(&suffix[j + 1]);
        let mut row = vec![0.0; nchan];
        match mode {
            GradientMode::Exact => {
                let v = &d.eig.vectors;
                let vd = adjoint(v);
                let m_eig = vd.dot(&m).dot(v);
                let lam = &d.eig.values;
                let mut gamma = Mat::zeros((n, n));
                for a in 0..n {
                    for b in 0..n {
                        let dl = lam[a] - lam[b];
                        gamma[(a, b)] = if (dl * dt).abs() < 1e-9 {
                            C64::from_polar(1.0, -dt * (lam[a] + lam[b]) / 2.0)
                        } else {
                            let ea = C64::from_polar(1.0, -dt * lam[a]);
                            let eb = C64::from_polar(1.0, -dt * lam[b]);
                            (ea - eb) / (C64::new(0.0, -dt * dl))
                        };
                    }
                }
                for (k, hk) in hks.iter().enumerate() {
                    let w = vd.dot(hk).dot(v);
                    // dU = V (Gamma ∘ (-i dt s W)) V†;
                    // Tr(M dU) = sum_ab (V† M V)[b,a] * (Gamma ∘ ...)[a,b]
                    let mut tr = C64::new(0.0, 0.0);
                    for a in 0..n {
                        for b in 0..n {
                            tr += m_eig[(b, a)] * gamma[(a, b)] * w[(a, b)];
                        }
                    }
                    tr *= C64::new(0.0, -dt * member.scale);
                    row[k] = 2.0 * (g.conj() * (tr / dim)).re * member.weight;
                }
            }
            GradientMode::FirstOrder => {
                for (k, hk) in hks.iter().enumerate() {
                    let du = hk
                        .mapv(|z| z * C64::new(0.0, -dt * member.scale))
                        .dot(&d.unitary);
                    let tr: C64 = m.dot(&du).diag().iter().sum();
                    row[k] = 2.0 * (g.conj() * (tr / dim)).re * member.weight;
                }
            }
        }
        row
    };

    let rows: Vec<Vec<f64>> = {
        #[cfg(feature = "parallel")]
        {
            if parallel {
                use rayon::prelude::*;
                (0..nseg)
                    .into_par_iter()
                    .with_min_len(16)
                    .map(grad_rows)
                    .collect()
            } else {
                (0..nseg).map(grad_rows).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = parallel;
            (0..nseg).map(grad_rows).collect()
        }
    };
    for (j, row) in rows.into_iter().enumerate() {
        for (k, x) in row.into_iter().enumerate() {
            grad[j][k] += x;
        }
    }
}

/// Per-member decompositions plus the mean fidelity; the optimizer's line
/// search keeps these so an accepted trial's gradient reuses them.
struct Evaluation {
    mean: f64,
    members: Vec<(C64, Vec<SegmentDecomp>)>,
}

fn evaluate(
    h0: &Mat,
    hks: &[Mat],
    tdag: &Mat,
    amplitudes: &[Vec<f64>],
    cfg: &GrapeConfig,
    dim: f64,
) -> Evaluation {
    let dt = cfg.duration_s / amplitudes.len() as f64;
    let mut mean = 0.0;
    let mut members = Vec::with_capacity(cfg.ensemble.len());
    for member in &cfg.ensemble {
        let decomps = build_decomps(h0, hks, amplitudes, member.scale, dt, cfg.parallel);
        let g = trace_overlap(tdag, &decomps, dim);
        mean += member.weight * g.norm_sqr();
        members.push((g, decomps));
    }
    Evaluation { mean, members }
}

fn gradient_of(
    eval: &Evaluation,
    hks: &[Mat],
    tdag: &Mat,
    cfg: &GrapeConfig,
    nseg: usize,
) -> Vec<Vec<f64>> {
    let dt = cfg.duration_s / nseg as f64;
    let mut grad = vec![vec![0.0; hks.len()]; nseg];
    for (member, (g, decomps)) in cfg.ensemble.iter().zip(eval.members.iter()) {
        accumulate_gradient(
            &mut grad,
            hks,
            tdag,
            decomps,
            *g,
            dt,
            member,
            cfg.gradient,
            cfg.parallel,
        );
    }
    grad
}

/// Ensemble-mean fidelity and its gradient with respect to every control
/// amplitude, for the current amplitude table. This is the inner evaluation
/// of [`grape_optimize`], exposed for gradient verification and custom
/// optimizers.
pub fn fidelity_and_gradient(
    sys: &SpinSystem,
    target: &Mat,
    amplitudes: &[Vec<f64>],
    cfg: &GrapeConfig,
) -> (f64, Vec<Vec<f64>>) {
    let h0 = sys.internal_hamiltonian();
    let hks = sys.control_hamiltonians();
    let tdag = adjoint(target);
    let eval = evaluate(&h0, &hks, &tdag, amplitudes, cfg, sys.dim() as f64);
    let grad = gradient_of(&eval, &hks, &tdag, cfg, amplitudes.len());
    (eval.mean, grad)
}

/// Ensemble-mean fidelity of an amplitude table (no gradient); what the line
/// search evaluates.
pub fn mean_fidelity(
    sys: &SpinSystem,
    target: &Mat,
    amplitudes: &[Vec<f64>],
    cfg: &GrapeConfig,
) -> f64 {
    let h0 = sys.internal_hamiltonian();
    let hks = sys.control_hamiltonians();
    let tdag = adjoint(target);
    evaluate(&h0, &hks, &tdag, amplitudes, cfg, sys.dim() as f64).mean
}

/// Gradient ascent on the (ensemble-mean) gate fidelity with a backtracking
/// line search; the returned trace is non-decreasing.
pub fn grape_optimize(sys: &SpinSystem, target: &Mat, cfg: &GrapeConfig) -> Result<GrapeOutcome> {
    if cfg.segment_count == 0 {
        return Err(Error::Config("segment_count must be >= 1".into()));
    }
    if target.nrows() != sys.dim() || target.ncols() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target {:?} vs system dimension {}",
            target.dim(),
            sys.dim()
        )));
    }
    let udev = crate::linalg::unitarity_deviation(target);
    if udev > 1e-8 {
        return Err(Error::NotUnitary(udev));
    }
    if cfg.ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }

    let nchan = sys.channels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut u: Vec<Vec<f64>> = (0..cfg.segment_count)
        .map(|_| {
            (0..nchan)
                .map(|_| rng.random_range(-cfg.initial_amplitude_hz..=cfg.initial_amplitude_hz))
                .collect()
        })
        .collect();

    let clip = |x: f64| x.clamp(-cfg.amplitude_cap_hz, cfg.amplitude_cap_hz);
    let dot = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(ra, rb)| ra.iter().zip(rb.iter()).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    };

    let h0 = sys.internal_hamiltonian();
    let hks = sys.control_hamiltonians();
    let tdag = adjoint(target);
    let dim = sys.dim() as f64;

    let mut eval = evaluate(&h0, &hks, &tdag, &u, cfg, dim);
    let mut f = eval.mean;
    let mut grad = gradient_of(&eval, &hks, &tdag, cfg, cfg.segment_count);
    let mut dir = grad.clone();
    let mut trace = vec![f];
    let mut step_hz = cfg.initial_amplitude_hz.max(1.0);
    let mut iterations = 0;

    let mut steepest = true;
    while f < cfg.fidelity_goal && iterations < cfg.iteration_cap {
        iterations += 1;
        // keep the search direction an ascent direction
        if !steepest && dot(&grad, &dir) <= 0.0 {
            dir = grad.clone();
            steepest = true;
        }
        let dmax = dir
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |acc, &x| acc.max(x.abs()));
        if dmax < 1e-16 {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<Vec<f64>> = u
                .iter()
                .zip(dir.iter())
                .map(|(row, drow)| {
                    row.iter()
                        .zip(drow.iter())
                        .map(|(&x, &dx)| clip(x + step_hz * dx / dmax))
                        .collect()
                })
                .collect();
            let trial_eval = evaluate(&h0, &hks, &tdag, &trial, cfg, dim);
            if trial_eval.mean > f {
                accepted = Some((trial, trial_eval));
                break;
            }
            step_hz *= 0.5;
            if step_hz < 1e-9 {
                break;
            }
        }
        let Some((trial, trial_eval)) = accepted else {
            // a conjugate direction can stall where steepest ascent still
            // moves; retry once from the gradient
            if !steepest {
                dir = grad.clone();
                steepest = true;
                step_hz = step_hz.max(1.0);
                continue;
            }
            break;
        };
        u = trial;
        eval = trial_eval;
        f = eval.mean;
        step_hz = (step_hz * 1.6).min(cfg.amplitude_cap_hz);
        trace.push(f);
        if f >= cfg.fidelity_goal {
            break;
        }
        // Polak-Ribiere conjugate direction from the reused decompositions
        let grad_new = gradient_of(&eval, &hks, &tdag, cfg, cfg.segment_count);
        let gg = dot(&grad, &grad);
        let mut beta = 0.0;
        if gg > 0.0 {
            let diff_dot: f64 = grad_new
                .iter()
                .zip(grad.iter())
                .map(|(rn, ro)| {
                    rn.iter()
                        .zip(ro.iter())
                        .map(|(n, o)| n * (n - o))
                        .sum::<f64>()
                })
                .sum();
            beta = (diff_dot / gg).max(0.0);
        }
        for (drow, grow) in dir.iter_mut().zip(grad_new.iter()) {
            for (d, g) in drow.iter_mut().zip(grow.iter()) {
                *d = g + beta * *d;
            }
        }
        steepest = false;
        grad = grad_new;
    }

    Ok(GrapeOutcome {
        pulse: ControlPulse {
            duration_s: cfg.duration_s,
            amplitudes: u,
        },
        final_fidelity: f,
        reached_goal: f >= cfg.fidelity_goal,
        fidelity_trace: trace,
        iterations,
    })
}

/// Fidelity trace CSV `iteration,fidelity`.
pub fn trace_to_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,fidelity\n");
    for (i, f) in trace.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, fmt_g12(*f)));
    }
    out
}

/// A 2^n x 2^n density matrix: Hermitian, unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: Mat,
}

impl DensityMatrix {
    pub fn new(matrix: Mat) -> Result<Self> {
        let herm = crate::linalg::hermiticity_deviation(&matrix);
        if herm > 1e-12 {
            return Err(Error::DimensionMismatch(format!(
                "density matrix not Hermitian (deviation {herm:e})"
            )));
        }
        let tr: C64 = matrix.diag().iter().sum();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::DimensionMismatch(format!(
                "density matrix trace {tr} is not one"
            )));
        }
        let eig = HermitianEigen::new(&matrix);
        if eig.values.iter().any(|&l| l < -1e-10) {
            return Err(Error::DimensionMismatch(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn pure(state: &Vector) -> Result<Self> {
        let n = crate::linalg::norm_sqr(state);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NormDrift((n - 1.0).abs()));
        }
        DensityMatrix::new(outer(state, state))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|z| z.re).collect()
    }
}

/// Pseudo-pure state (1-ε)/2ⁿ I + ε |ψ><ψ|.
pub fn pseudo_pure(pure: &Vector, epsilon: f64) -> Result<DensityMatrix> {
    if !(0.0 < epsilon && epsilon <= 1.0) {
        return Err(Error::Config(format!("polarization {epsilon} outside (0, 1]")));
    }
    let dim = pure.len();
    let mut m = outer(pure, pure).mapv(|z| z * epsilon);
    let background = (1.0 - epsilon) / dim as f64;
    for k in 0..dim {
        m[(k, k)] += C64::new(background, 0.0);
    }
    DensityMatrix::new(m)
}

/// Normalized-overlap fidelity Tr(ρ1ρ2)/√(Tr(ρ1²)Tr(ρ2²)).
pub fn density_fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    let tr = |a: &Mat, b: &Mat| -> f64 {
        a.dot(b).diag().iter().sum::<C64>().re
    };
    let p1 = tr(&rho1.matrix, &rho1.matrix);
    let p2 = tr(&rho2.matrix, &rho2.matrix);
    if p1 <= 0.0 || p2 <= 0.0 {
        return Err(Error::ZeroPurity);
    }
    Ok(tr(&rho1.matrix, &rho2.matrix) / (p1 * p2).sqrt())
}

/// Unitary R with R ρ0 R† diagonal, eigenvalues descending (ties keep their
/// ascending-order position). For a pure ρ0 = |φ><φ| the first row is φ†, so
/// R maps |φ> to the first basis state.
pub fn diagonalizing_rotation(rho0: &DensityMatrix) -> Mat {
    let eig = HermitianEigen::new(&rho0.matrix);
    let n = eig.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.values[b].partial_cmp(&eig.values[a]).unwrap());
    let mut cols = Mat::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            cols[(i, new)] = eig.vectors[(i, old)];
        }
    }
    adjoint(&cols)
}

/// The eight populations of a rotated 3-qubit density matrix plus the four
/// carbon-channel peak differences P(5)-P(7), P(6)-P(8), P(1)-P(3), P(2)-P(4)
/// (1-based indices).
pub fn population_readout(rho_prime: &DensityMatrix) -> Result<(Vec<f64>, [f64; 4])> {
    if rho_prime.dim() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "population readout needs a 3-qubit state, got dimension {}",
            rho_prime.dim()
        )));
    }
    let p = rho_prime.populations();
    let peaks = [p[4] - p[6], p[5] - p[7], p[0] - p[2], p[1] - p[3]];
    Ok((p, peaks))
}

/// Relabel qubits of a density matrix: `perm[new_position] = old_position`.
/// Models the SWAP-to-carbon readout as an index permutation.
pub fn permute_register(rho: &DensityMatrix, perm: &[usize]) -> Result<DensityMatrix> {
    let n = perm.len();
    if rho.dim() != 1usize << n {
        return Err(Error::DimensionMismatch(format!(
            "permutation over {n} qubits vs dimension {}",
            rho.dim()
        )));
    }
    let dim = rho.dim();
    let remap = |idx: usize| -> usize {
        let mut out = 0usize;
        for (new, &old) in perm.iter().enumerate() {
            let bit = idx >> (n - 1 - old) & 1;
            out |= bit << (n - 1 - new);
        }
        out
    };
    let mut m = Mat::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            m[(remap(i), remap(j))] = rho.matrix[(i, j)];
        }
    }
    DensityMatrix::new(m)
}

/// Measure |<φ|ψ>|² through populations only: rotate by the unitary that
/// diagonalizes |φ><φ|, then sum P'(i) weighted by the rotated reference
/// populations.
pub fn measure_overlap_via_populations(psi: &Vector, phi: &Vector) -> Result<f64> {
    let rho_phi = DensityMatrix::pure(phi)?;
    let r = diagonalizing_rotation(&rho_phi);
    let rd = adjoint(&r);
    let rho_psi = DensityMatrix::pure(psi)?;
    let rotated = r.dot(&rho_psi.matrix).dot(&rd);
    let reference = r.dot(&rho_phi.matrix).dot(&rd);
    let mut sum = 0.0;
    for i in 0..rotated.nrows() {
        sum += rotated[(i, i)].re * reference[(i, i)].re;
    }
    Ok(sum)
}
