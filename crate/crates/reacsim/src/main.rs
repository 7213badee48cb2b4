use clap::{Parser, Subcommand};
use reacsim::cli::{cmd_eigen, cmd_grape, cmd_measure, cmd_propagate, CommandOutput};
use reacsim::config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

/// Laser-driven double-well reaction dynamics: grid and gate-circuit routes,
/// GRAPE pulse synthesis, population-based measurement.
#[derive(Parser)]
#[command(name = "reacsim", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (`section.key = value` lines; empty = defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for snapshot tables.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Propagation route.
    #[arg(long, global = true, value_parser = ["grid", "circuit", "both"])]
    route: Option<String>,

    /// Grid qubit count n (N = 2^n points).
    #[arg(long, global = true)]
    qubits: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Print operator tables, lowest eigenpairs and well probabilities.
    Eigen,
    /// Propagate the 25-step reaction and write snapshot tables.
    Propagate,
    /// Synthesize a GRAPE pulse for the accumulated step network.
    Grape,
    /// Overlaps via the population measurement scheme next to direct values.
    Measure,
}

fn load_config(args: &Args) -> reacsim::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(q) = args.qubits {
        cfg.grid_qubits = q;
    }
    if let Some(route) = &args.route {
        cfg.route = route.parse()?;
    }
    if let Some(format) = &args.format {
        cfg.output_format = format.parse()?;
    }
    if let Some(out) = &args.out {
        cfg.output_path = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(cfg: &RunConfig, output: &CommandOutput) -> reacsim::Result<()> {
    match &cfg.output_path {
        Some(path) => {
            std::fs::write(path, &output.report)?;
            for (suffix, contents) in &output.side_files {
                let mut side = path.as_os_str().to_owned();
                side.push(".");
                side.push(suffix);
                std::fs::write(PathBuf::from(side), contents)?;
            }
        }
        None => {
            print!("{}", output.report);
            for (suffix, contents) in &output.side_files {
                print!("# --- {suffix} ---\n{contents}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match args.command {
        Command::Eigen => cmd_eigen(&cfg),
        Command::Propagate => cmd_propagate(&cfg),
        Command::Grape => cmd_grape(&cfg),
        Command::Measure => cmd_measure(&cfg),
    };
    match result {
        Ok(output) => {
            if let Err(e) = write_output(&cfg, &output) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            match &output.threshold_failure {
                Some(reason) => {
                    eprintln!("threshold failure: {reason}");
                    ExitCode::from(2)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
