//! Run configuration: plain-text `section.key = value` files with `#`
//! comments. An empty file (or no file) reproduces the defaults, which are
//! the parameters of the reference system.
//!
//! Sections and keys:
//!
//! * `model.*` (the `model.` prefix is optional): `barrier_height` (hartree),
//!   `asymmetry` (hartree), `well_position` (bohr), `mass` (electron masses),
//!   `charge`, `field_amplitude` (a.u.), `ramp_up_end` (fs),
//!   `ramp_down_start` (fs), `total_time` (fs), `step_count`, `wall_scale`,
//!   `grid_extent` (bohr)
//! * `run.*`: `grid_qubits` (1..=10), `route` (grid|circuit|both),
//!   `output_format` (csv|json), `output_path`
//! * `spins.*`: `nu1` `nu2` `nu3` (Hz), `j12` `j13` `j23` (Hz)
//! * `grape.*`: `target_step`, `segment_count`, `duration_ms`,
//!   `fidelity_goal` in [0, 1), `iteration_cap`, `amplitude_cap_hz`, `seed`,
//!   `ensemble` ("scale:weight,scale:weight,..."), `gradient`
//!   (exact|first_order)

use crate::control::{EnsembleMember, GradientMode, GrapeConfig, SpinSystem};
use crate::model::ReactionModel;
use crate::{Error, Result};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Grid,
    Circuit,
    Both,
}

impl std::str::FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Route::Grid),
            "circuit" => Ok(Route::Circuit),
            "both" => Ok(Route::Both),
            other => Err(Error::Config(format!("unknown route {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// GRAPE block of the run configuration.
#[derive(Debug, Clone)]
pub struct GrapeSection {
    /// Which accumulated propagator U(t_j, 0) to synthesize.
    pub target_step: usize,
    pub segment_count: usize,
    pub duration_ms: f64,
    pub fidelity_goal: f64,
    pub iteration_cap: usize,
    pub amplitude_cap_hz: f64,
    pub seed: u64,
    pub ensemble: Vec<EnsembleMember>,
    pub gradient: GradientMode,
}

impl Default for GrapeSection {
    fn default() -> Self {
        GrapeSection {
            target_step: 7,
            segment_count: 750,
            duration_ms: 15.0,
            fidelity_goal: 0.99,
            iteration_cap: 1000,
            amplitude_cap_hz: 2.0e4,
            seed: 0,
            ensemble: vec![EnsembleMember {
                scale: 1.0,
                weight: 1.0,
            }],
            gradient: GradientMode::Exact,
        }
    }
}

impl GrapeSection {
    pub fn to_grape_config(&self) -> GrapeConfig {
        GrapeConfig {
            segment_count: self.segment_count,
            duration_s: self.duration_ms * 1e-3,
            iteration_cap: self.iteration_cap,
            fidelity_goal: self.fidelity_goal,
            amplitude_cap_hz: self.amplitude_cap_hz,
            seed: self.seed,
            ensemble: self.ensemble.clone(),
            gradient: self.gradient,
            ..GrapeConfig::default()
        }
    }
}

/// Full configuration for a run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ReactionModel,
    pub grid_qubits: u32,
    pub route: Route,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub spins: SpinSystem,
    pub grape: GrapeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ReactionModel::default(),
            grid_qubits: 3,
            route: Route::Both,
            output_path: None,
            output_format: OutputFormat::Csv,
            spins: SpinSystem::default(),
            grape: GrapeSection::default(),
        }
    }
}

impl RunConfig {
    /// Parse a configuration file's contents over the defaults.
    pub fn from_text(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.apply(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, e)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_text(&text)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad number {v:?}")))
        };
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad integer {v:?}")))
        };

        let (section, field) = match key.split_once('.') {
            Some((s, f)) => (s, f),
            None => ("model", key),
        };
        match section {
            "model" => match field {
                "barrier_height" => self.model.barrier_height = parse_f64(value)?,
                "asymmetry" => self.model.asymmetry = parse_f64(value)?,
                "well_position" => self.model.well_position = parse_f64(value)?,
                "mass" => self.model.mass = parse_f64(value)?,
                "charge" => self.model.charge = parse_f64(value)?,
                "field_amplitude" => self.model.field_amplitude = parse_f64(value)?,
                "ramp_up_end" => self.model.ramp_up_end = parse_f64(value)?,
                "ramp_down_start" => self.model.ramp_down_start = parse_f64(value)?,
                "total_time" => self.model.total_time = parse_f64(value)?,
                "step_count" => self.model.step_count = parse_usize(value)?,
                "wall_scale" => self.model.wall_scale = parse_f64(value)?,
                "grid_extent" => self.model.grid_extent = parse_f64(value)?,
                other => {
                    return Err(Error::Config(format!("unknown model key {other:?}")));
                }
            },
            "run" => match field {
                "grid_qubits" => {
                    self.grid_qubits = parse_usize(value)? as u32;
                }
                "route" => self.route = value.parse()?,
                "output_format" => self.output_format = value.parse()?,
                "output_path" => self.output_path = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::Config(format!("unknown run key {other:?}")));
                }
            },
            "spins" => match field {
                "nu1" => self.spins.offsets_hz[0] = parse_f64(value)?,
                "nu2" => self.spins.offsets_hz[1] = parse_f64(value)?,
                "nu3" => self.spins.offsets_hz[2] = parse_f64(value)?,
                "j12" => self.set_coupling(0, 1, parse_f64(value)?),
                "j13" => self.set_coupling(0, 2, parse_f64(value)?),
                "j23" => self.set_coupling(1, 2, parse_f64(value)?),
                other => {
                    return Err(Error::Config(format!("unknown spins key {other:?}")));
                }
            },
            "grape" => match field {
                "target_step" => self.grape.target_step = parse_usize(value)?,
                "segment_count" => self.grape.segment_count = parse_usize(value)?,
                "duration_ms" => self.grape.duration_ms = parse_f64(value)?,
                "fidelity_goal" => self.grape.fidelity_goal = parse_f64(value)?,
                "iteration_cap" => self.grape.iteration_cap = parse_usize(value)?,
                "amplitude_cap_hz" => self.grape.amplitude_cap_hz = parse_f64(value)?,
                "seed" => {
                    self.grape.seed = value
                        .parse()
                        .map_err(|_| Error::Config(format!("bad seed {value:?}")))?;
                }
                "ensemble" => self.grape.ensemble = parse_ensemble(value)?,
                "gradient" => {
                    self.grape.gradient = match value {
                        "exact" => GradientMode::Exact,
                        "first_order" => GradientMode::FirstOrder,
                        other => {
                            return Err(Error::Config(format!("unknown gradient {other:?}")));
                        }
                    }
                }
                other => {
                    return Err(Error::Config(format!("unknown grape key {other:?}")));
                }
            },
            other => {
                return Err(Error::Config(format!("unknown section {other:?}")));
            }
        }
        Ok(())
    }

    fn set_coupling(&mut self, j: usize, k: usize, value: f64) {
        for entry in self.spins.couplings_hz.iter_mut() {
            if entry.0 == (j, k) {
                entry.1 = value;
                return;
            }
        }
        self.spins.couplings_hz.push(((j, k), value));
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(1..=10).contains(&self.grid_qubits) {
            return Err(Error::Config(format!(
                "grid_qubits {} outside 1..=10",
                self.grid_qubits
            )));
        }
        if !(0.0..1.0).contains(&self.grape.fidelity_goal) {
            return Err(Error::Config(format!(
                "fidelity_goal {} outside [0, 1)",
                self.grape.fidelity_goal
            )));
        }
        if self.grape.target_step == 0 || self.grape.target_step > self.model.step_count {
            return Err(Error::Config(format!(
                "grape.target_step {} outside 1..={}",
                self.grape.target_step, self.model.step_count
            )));
        }
        Ok(())
    }
}

fn parse_ensemble(spec: &str) -> Result<Vec<EnsembleMember>> {
    let mut members = Vec::new();
    for part in spec.split(',') {
        let (scale, weight) = part
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("bad ensemble entry {part:?}")))?;
        members.push(EnsembleMember {
            scale: scale
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad ensemble scale {scale:?}")))?,
            weight: weight
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad ensemble weight {weight:?}")))?,
        });
    }
    if members.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Ok(members)
}
