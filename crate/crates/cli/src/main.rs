use clap::{Parser, Subcommand};
use saltlab_cli::config::{parse_config, ConfigError};
use saltlab_cli::runner::{run, RunError};
use saltlab_cli::study::convergence_study;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(
    name = "saltlab",
    about = "Stochastic transport fluid solvers on the 2-torus: single runs, ensembles and convergence studies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configured run (single member or ensemble).
    Run {
        /// Path to the TOML run configuration.
        config: PathBuf,
        /// Override the configured base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured ensemble size.
        #[arg(long)]
        members: Option<usize>,
        /// Output directory (overrides the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nested-refinement convergence study for the configured mode.
    Study {
        config: PathBuf,
        /// Number of refinement levels (each halves dt; field studies also
        /// double the grid).
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant suite.
    Check,
}

fn load_config(path: &PathBuf) -> Result<saltlab_cli::config::RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, seed, members, out } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(m) = members {
                cfg.members = m;
            }
            if let Err(e) = cfg.validate() {
                eprintln!("{e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            match run(&cfg, out.as_deref()) {
                Ok(summary) => {
                    for note in &summary.notes {
                        println!("{note}");
                    }
                    for m in &summary.members {
                        println!("member seed {} [{}]: {}", m.seed, m.dir, m.status);
                    }
                    println!("artifacts in {}", summary.out_dir.display());
                    if summary.all_ok() {
                        EXIT_OK
                    } else {
                        EXIT_SOLVER
                    }
                }
                Err(RunError::Config(e)) => {
                    eprintln!("{e}");
                    EXIT_CONFIG
                }
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_SOLVER
                }
            }
        }
        Command::Study { config, levels, out } => match load_config(&config) {
            Ok(cfg) => match convergence_study(&cfg, levels, out.as_deref()) {
                Ok(report) => {
                    print!("{}", report.render());
                    EXIT_OK
                }
                Err(RunError::Config(e)) => {
                    eprintln!("{e}");
                    EXIT_CONFIG
                }
                Err(e) => {
                    eprintln!("{e}");
                    EXIT_SOLVER
                }
            },
            Err(e) => {
                eprintln!("{e}");
                EXIT_CONFIG
            }
        },
        Command::Check => {
            if saltlab_cli::checks::run_checks() {
                println!("all checks passed");
                EXIT_OK
            } else {
                eprintln!("check suite failed");
                EXIT_CHECK
            }
        }
    };
    ExitCode::from(code)
}
