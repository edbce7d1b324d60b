use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cahnbc::commands::{self, Target};
use cahnbc::{CliError, Result};
use cahnbc_core::experiments::ConvergenceStudy;
use clap::{Parser, Subcommand};

/// Cahn–Hilliard solver with an Allen–Cahn dynamic boundary condition.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single run: diagnostics CSV plus field snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `[output] directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Surface diffusion sweep against the run without it.
    SweepKappa {
        #[arg(long)]
        config: PathBuf,
        /// Strictly decreasing values in (0, 1]; a 0 entry is ignored, the
        /// reference run is always added.
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25,0.125,0.0625")]
        kappas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Yosida parameter sweep.
    SweepEpsilon {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001,0.0001")]
        epsilons: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Paired runs with perturbed data.
    Contdep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "u0")]
        target: Target,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        magnitudes: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Order of accuracy against a manufactured solution.
    Manufactured {
        /// Cells per direction for the grid refinement.
        #[arg(long, value_delimiter = ',', default_value = "16,32")]
        sizes: Vec<usize>,
        /// Time steps for the time refinement.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
        dts: Vec<f64>,
        /// Cells per direction of the time refinement grid.
        #[arg(long, default_value_t = 48)]
        n_time: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sampled contract and domination checks of the configured graphs.
    VerifyGraphs {
        #[arg(long)]
        config: PathBuf,
    },
    /// SVG chart of a summary, diagnostics, contdep or manufactured CSV.
    Plot {
        input: PathBuf,
        /// Defaults to the directory of the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cmd: Command) -> Result<String> {
    match cmd {
        Command::Run { config, out } => {
            let r = commands::run(&config, out.as_deref())?;
            Ok(format!(
                "{} steps, {} Newton iterations, max mass drift {:.3e}, energy {:.6e} -> {:.6e}",
                r.steps, r.newton_iterations, r.mass_drift, r.energy.0, r.energy.1
            ))
        }
        Command::SweepKappa { config, kappas, out } => commands::sweep_kappa(&config, &kappas, out.as_deref()),
        Command::SweepEpsilon { config, epsilons, out } => commands::sweep_epsilon(&config, &epsilons, out.as_deref()),
        Command::Contdep { config, target, magnitudes, out } => commands::contdep(&config, target, &magnitudes, out.as_deref()),
        Command::Manufactured { sizes, dts, n_time, out } => {
            let study = ConvergenceStudy { sizes, dts, n_time, ..ConvergenceStudy::default() };
            commands::manufactured(&study, &out)
        }
        Command::VerifyGraphs { config } => commands::verify_graphs(&config),
        Command::Plot { input, out } => {
            let dir = out.unwrap_or_else(|| input.parent().unwrap_or(Path::new(".")).to_path_buf());
            let path = cahnbc::plot::plot_csv(&input, &dir)?;
            Ok(format!("wrote {}", path.display()))
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage errors exit with 2, which is reserved for the solver
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(msg) => {
            println!("{}", msg.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
