use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use otcc_core::experiment::{self, Experiment, ExperimentConfig, RunOutput};
use otcc_core::Error;

/// Coverage control experiments with Voronoi (VTCC) and optimal-transport (OTCC) laws.
#[derive(Debug, Parser)]
#[command(name = "otcc", version)]
struct Cli {
    /// Output directory; overrides the config and $OTCC_OUT_DIR.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured control law and write its artifacts.
    Run { config: PathBuf },
    /// Run both laws from the same start and write a comparison.
    Compare { config: PathBuf },
    /// Check a config and print it with every default filled in.
    Validate { config: PathBuf },
}

fn load(path: &Path, out: Option<&Path>) -> Result<Experiment, Error> {
    ExperimentConfig::from_path(path)?.resolve(out)
}

fn report(label: &str, run: &RunOutput) {
    let s = &run.summary;
    println!(
        "{label}: steps={} t={} steady={} J={:.6e} J_laguerre={:.6e} F={:.6e}",
        s.steps, s.final_time, s.steady_state_reached, s.cost_j, s.cost_j_laguerre, s.f_value
    );
    if let Some(h) = s.stability.h_index_max {
        println!(
            "{label}: h_index_max={h:.4} h_index_literal_max={:.4} min_eig_hessian_x={:.3e}",
            s.stability.h_index_literal_max.unwrap_or(f64::NAN),
            s.stability.min_eig_hessian_x
        );
    }
    if let Some(c) = s.upper_right_count {
        println!("{label}: upper_right_count={c}");
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Validate { config } => {
            let exp = load(config, cli.out.as_deref())?;
            if !cli.quiet {
                print!("{}", exp.config.to_json());
            }
        }
        Command::Run { config } => {
            let exp = load(config, cli.out.as_deref())?;
            let out = experiment::run_experiment(&exp)?;
            if !cli.quiet {
                report(out.trajectory.law.as_str(), &out);
                println!("artifacts: {}", exp.output_dir().display());
            }
        }
        Command::Compare { config } => {
            let exp = load(config, cli.out.as_deref())?;
            let out = experiment::compare(&exp)?;
            if !cli.quiet {
                report("vtcc", &out.vtcc);
                report("otcc", &out.otcc);
                let c = &out.comparison;
                println!("J_vtcc={:.6e} J_otcc={:.6e} otcc_better={}", c.j_vtcc, c.j_otcc, c.otcc_better);
                if let Some(d) = &c.duality {
                    println!(
                        "duality: max_F={:.6e} W={:.6e} gap={:.3e} converged={}",
                        d.max_f, d.oracle_w, d.gap, d.converged
                    );
                }
                println!("artifacts: {}", exp.output_dir().display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
