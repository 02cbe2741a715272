use std::path::PathBuf;
use std::process::ExitCode;

use antipt_cli::commands::{self, DesignArgs, ValidateArgs};
use antipt_cli::config::{self, Overrides, RunConfig};
use antipt_cli::output::{to_json, write_file};
use antipt_cli::CliError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "antipt", version, about = "Dissipatively coupled SPDC waveguide simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate from vacuum at one phase and write correlators along z.
    Evolve {
        /// TOML run configuration.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Endpoint correlators over a grid of pump phases.
    Sweep {
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Chip design numbers (poling period, couplings, g, ε) as JSON.
    Design {
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: DesignArgs,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a heater calibration scan for b and θ₀.
    Fit {
        /// CSV with columns P_heater_mW, P_a_W, P_b_W.
        samples: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks and print one line per criterion.
    Validate {
        #[command(flatten)]
        args: ValidateArgs,
    },
}

fn emit(value: &serde_json::Value, out: &Option<PathBuf>) -> Result<(), CliError> {
    let bytes = to_json(value);
    match out {
        Some(p) => write_file(p, &bytes),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve { config, overrides } => {
            let (file, src) = config::load(config.as_deref())?;
            let cfg = RunConfig::resolve(&file, src.as_ref(), &overrides, "evolve")?;
            let w = commands::evolve(&cfg)?;
            println!("{}", w.csv.display());
            Ok(())
        }
        Command::Sweep { config, overrides } => {
            let (file, src) = config::load(config.as_deref())?;
            let cfg = RunConfig::resolve(&file, src.as_ref(), &overrides, "sweep")?;
            let w = commands::sweep(&cfg)?;
            println!("{}", w.csv.display());
            Ok(())
        }
        Command::Design { config, args, out } => {
            let (file, src) = config::load(config.as_deref())?;
            emit(&commands::design(&file, src.as_ref(), &args)?, &out)
        }
        Command::Fit { samples, out } => emit(&commands::fit(&samples)?, &out),
        Command::Validate { args } => {
            let reports = commands::validate(&args, |line| println!("{line}"))?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Validation(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
