use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isoflow_core::harness::{recompute_ledger, run_study, run_to_dir, steps_csv, RunConfig, StudyConfig};
use isoflow_core::mesh::{build_box_mesh, write_mesh_string};
use isoflow_core::BoxDomain;

/// Mixed FE/FV solver for isentropic compressible Navier-Stokes.
#[derive(Parser)]
#[command(name = "isoflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Kuhn box mesh with 6 n_x n_y n_z tetrahedra.
    MeshGen {
        /// Cells per axis.
        #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"], required = true,
              value_parser = clap::value_parser!(u32).range(1..))]
        n: Vec<u32>,
        /// Box extents.
        #[arg(long = "box", num_args = 3, value_names = ["LX", "LY", "LZ"], default_values = ["1", "1", "1"])]
        extents: Vec<f64>,
        /// Output file; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one configuration and write its trajectory and steps.csv.
    Run {
        config: PathBuf,
        #[arg(short, long, default_value = "run-output")]
        output: PathBuf,
    },
    /// Run a refinement study (energy, consistency or mms).
    Study {
        config: PathBuf,
        #[arg(short, long, default_value = "study-output")]
        output: PathBuf,
    },
    /// Recompute the step ledger from the snapshots of a run directory.
    Ledger {
        run_dir: PathBuf,
        /// Output CSV; `<run_dir>/ledger.csv` if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn with_partial(e: isoflow_core::Error, out: &Path, marker: &str) -> String {
    if out.join(marker).exists() {
        format!("{e}\npartial results in {}", out.display())
    } else {
        e.to_string()
    }
}

fn execute(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::MeshGen { n, extents, output } => {
            if let Some(l) = extents.iter().find(|l| !(**l > 0.0)) {
                return Err(format!("box extents must be positive, got {l}"));
            }
            let domain = BoxDomain::from_extents([extents[0], extents[1], extents[2]]);
            let mesh = build_box_mesh(&domain, [n[0] as usize, n[1] as usize, n[2] as usize]).map_err(|e| e.to_string())?;
            let text = write_mesh_string(&mesh);
            match output {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Run { config, output } => {
            let cfg = RunConfig::from_file(&config).map_err(|e| e.to_string())?;
            let outcome = run_to_dir(&cfg, &output).map_err(|e| with_partial(e, &output, "steps.csv"))?;
            print!("{}", outcome.summary.to_text());
        }
        Command::Study { config, output } => {
            let cfg = StudyConfig::from_file(&config).map_err(|e| e.to_string())?;
            run_study(&cfg, &output).map_err(|e| with_partial(e, &output, "summary.txt"))?;
            let summary = output.join("summary.txt");
            print!("{}", std::fs::read_to_string(&summary).map_err(|e| format!("{}: {e}", summary.display()))?);
        }
        Command::Ledger { run_dir, output } => {
            let reports = recompute_ledger(&run_dir).map_err(|e| e.to_string())?;
            let path = output.unwrap_or_else(|| run_dir.join("ledger.csv"));
            write(&path, &steps_csv(&reports, false))?;
            let max_slack = reports.iter().map(|r| r.slack).fold(f64::NEG_INFINITY, f64::max);
            println!("steps = {}\nmax_slack = {max_slack:e}", reports.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
