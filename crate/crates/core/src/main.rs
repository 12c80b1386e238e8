use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spfem::io::{read_cluster, RunConfig};
use spfem::runner::execute;
use spfem::scenarios::list_scenarios;
use spfem::{validate, Error};

#[derive(Parser)]
#[command(name = "spfem", version, about = "Surface diffusion of curve networks and surface clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the built-in scenario generators.
    Scenarios,
    /// Check a cluster JSON file and print any violations.
    Validate { cluster: PathBuf },
}

fn run(config: &Path) -> Result<(), Error> {
    let text = std::fs::read_to_string(config).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
    let cfg = RunConfig::from_json(&text)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let summary = execute(&cfg, base)?;
    println!(
        "{} steps, t = {}, E = {:.12}, v_delta = {:.3e}",
        summary.steps, summary.last.t, summary.last.energy_total, summary.last.v_delta
    );
    println!("diagnostics: {}", summary.csv.display());
    for f in &summary.frames {
        println!("frame: {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config } => match run(&config) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(if e.is_solver_failure() { 2 } else { 1 })
            }
        },
        Command::Scenarios => {
            println!("{:<22} {:>3} {:>9}  description", "name", "dim", "default_k");
            for s in list_scenarios() {
                println!("{:<22} {:>3} {:>9}  {}", s.name, s.dim, s.default_k, s.description);
            }
            println!("parameters: k (total vertex count), sigma (per-surface tensions)");
            ExitCode::SUCCESS
        }
        Command::Validate { cluster } => {
            let c = match read_cluster(&cluster) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let report = validate(&c);
            if report.is_ok() {
                println!("ok");
                ExitCode::SUCCESS
            } else {
                println!("{report}");
                ExitCode::from(1)
            }
        }
    }
}
