use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hidver::AttackMode;

mod commands;
mod config;
mod report;
mod svg;

use config::ScenarioFile;

#[derive(Debug, Parser)]
#[command(name = "hidver", version, about = "Hidden-point model versioning in the 2D max-margin setting")]
struct Cli {
    /// Scenario file; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    scenario: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Separator produced by one hidden point.
    Boundary {
        #[arg(long, value_name = "V,W", allow_hyphen_values = true)]
        h: String,
    },
    /// Alternating version plan with its transferability bound.
    Plan {
        #[arg(long = "n", value_name = "COUNT")]
        n: Option<usize>,
        /// Base slope.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        /// Largest offset b_max.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Alpha for N = 2, 4, 6, 8, 10 next to the published tier values.
    Table,
    /// Greedy selection from a seeded candidate pool against a random baseline.
    Pool {
        /// Sequence length, including the two seed versions.
        #[arg(long = "n", value_name = "COUNT")]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo samples per score; 0 means exact.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, value_name = "MODE")]
        attack_mode: Option<AttackMode>,
    },
    /// Oracle and consistency checks.
    Verify,
}

fn load(path: Option<&PathBuf>) -> Result<ScenarioFile, commands::CliError> {
    let Some(path) = path else {
        return Ok(ScenarioFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| commands::CliError::Parse(format!("{}: {e}", path.display())))?;
    let file = ScenarioFile::parse(&text).map_err(|e| commands::CliError::Parse(format!("{}: {e}", path.display())))?;
    file.scenario
        .validate()
        .map_err(|e| commands::CliError::Domain(format!("{}: {e}", path.display())))?;
    Ok(file)
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    let mut file = load(cli.scenario.as_ref())?;
    let stdout = std::io::stdout().lock();
    match cli.command {
        Command::Boundary { h } => commands::boundary(&file, &h, stdout),
        Command::Plan { n, k, b, svg } => {
            if let Some(k) = k {
                file.plan.k = k;
            }
            if let Some(b) = b {
                file.plan.b_max = b;
            }
            commands::plan(&file, n.unwrap_or(file.plan.n_versions), svg.as_deref(), stdout)
        }
        Command::Table => commands::table(&file, stdout),
        Command::Pool {
            n,
            seed,
            samples,
            attack_mode,
        } => {
            if let Some(seed) = seed {
                file.pool.seed = seed;
            }
            if let Some(samples) = samples {
                file.attack.samples = samples;
            }
            if let Some(mode) = attack_mode {
                file.attack.mode = mode;
            }
            commands::pool(&file, n.unwrap_or(file.plan.n_versions), stdout)
        }
        Command::Verify => commands::verify(&file, stdout),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
