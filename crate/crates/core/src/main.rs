#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use casimir_td::cli::{parse_config, run_and_emit, RunConfig, WORKERS_ENV};
use casimir_td::kernel::{kernel_series, ContourParams, KernelForm, DEFAULT_QUADRATURE_POINTS};
use casimir_td::oracle::{mode_sum_force_1d, wick_force_1d, WickQuadrature};
use casimir_td::{Error, Result};

#[derive(Parser)]
#[command(name = "casimir-td", version, about = "Time-domain Casimir force calculations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a force campaign described by a TOML file.
    Run {
        config: PathBuf,
        /// Number of parallel simulations.
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Dissipation σ in units of 2πc/a.
        #[arg(long)]
        sigma: Option<f64>,
        /// Grid cells per unit length.
        #[arg(long)]
        resolution: Option<usize>,
        /// Relative convergence tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the time-domain kernel g(-t).
    Kernel {
        /// Dissipation σ in units of 2πc/a.
        #[arg(long)]
        sigma: f64,
        /// Time step.
        #[arg(long)]
        dt: f64,
        /// Number of samples.
        #[arg(long)]
        n: usize,
        /// Frequency quadrature points.
        #[arg(long, default_value_t = DEFAULT_QUADRATURE_POINTS)]
        quad: usize,
        #[arg(long, value_enum, default_value_t = FormArg::Discrete)]
        form: FormArg,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independent reference forces.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Parse and validate a configuration without running it.
    Validate { config: PathBuf },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Imaginary-frequency stress integral on the 1D lattice.
    Wick {
        #[arg(long)]
        h: f64,
        #[arg(long)]
        resolution: usize,
    },
    /// Continuum mode sum for perfect plates.
    ModeSum {
        #[arg(long)]
        h: f64,
        /// Outer gap; omit for an isolated cavity.
        #[arg(long)]
        outer: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Discrete,
    Continuum,
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, workers, sigma, resolution, tolerance, out } => {
            let mut cfg = load(&config)?;
            if let Some(s) = sigma {
                cfg.numeric.sigma_in_2pi_c_over_a = s;
            }
            if let Some(r) = resolution {
                cfg.numeric.resolution_cells_per_a = r;
            }
            if let Some(t) = tolerance {
                cfg.numeric.tolerance = t;
            }
            if let Some(o) = out {
                cfg.output.directory = o;
            }
            if workers == Some(0) {
                return Err(Error::Validation { field: "workers".into(), message: "must be at least 1".into() });
            }
            let report = run_and_emit(&cfg, workers)?;
            for c in &report.components {
                match c.unconverged {
                    None => println!(
                        "F_{} = {:.10e}  (T = {:.4}, tolerance {:e})",
                        c.force.axis.name(),
                        c.force.asymptote,
                        c.force.truncation_time.unwrap_or(f64::NAN),
                        cfg.numeric.tolerance
                    ),
                    Some(best) => println!(
                        "F_{} = {:.10e}  (not converged: best delta {:.3e} after {} steps)",
                        c.force.axis.name(),
                        c.force.asymptote,
                        best,
                        report.steps
                    ),
                }
            }
            println!("outputs in {}", cfg.output.directory.display());
            Ok(report.converged())
        }
        Command::Kernel { sigma, dt, n, quad, form, out } => {
            let params = ContourParams {
                sigma_user: sigma,
                dt,
                quadrature_points: quad,
                len: n,
                form: match form {
                    FormArg::Discrete => KernelForm::Discrete,
                    FormArg::Continuum => KernelForm::Continuum,
                },
            };
            let k = kernel_series(params)?;
            match out {
                Some(path) => k.write_cache(&path)?,
                None => print!("{}", k.to_text()),
            }
            Ok(true)
        }
        Command::Oracle { which: OracleCommand::Wick { h, resolution } } => {
            println!("{:.12e}", wick_force_1d(h, resolution, WickQuadrature::default())?);
            Ok(true)
        }
        Command::Oracle { which: OracleCommand::ModeSum { h, outer } } => {
            if !(h > 0.0) || outer.is_some_and(|o| !(o > 0.0)) {
                return Err(Error::InvalidArgument("lengths must be positive".into()));
            }
            println!("{:.12e}", mode_sum_force_1d(h, outer));
            Ok(true)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let (geom, grid, surface) = cfg.grid()?;
            let steps = cfg.steps(&grid, &geom);
            cfg.kernel_params(&grid, steps).validate()?;
            println!(
                "ok: {}D, {} cells, dt = {:e}, {} steps, {} surface points",
                grid.dimensionality,
                grid.cells[..grid.dimensionality].iter().map(|c| c.to_string()).collect::<Vec<_>>().join("x"),
                grid.dt,
                steps,
                surface.points.len()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
