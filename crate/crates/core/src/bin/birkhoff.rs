use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use birkhoff::cli::{cmd_analyze, cmd_normalize, cmd_verify, parse_targets, RunConfig, Suite, SystemFile};
use birkhoff::Error;

#[derive(Parser)]
#[command(name = "birkhoff", version, about = "Analyze, verify and normalize difference and q-difference systems")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Working precision in bits.
    #[arg(long, global = true, env = "BIRKHOFF_PRECISION", default_value_t = 256)]
    precision: u32,
    /// Series order.
    #[arg(long, global = true, env = "BIRKHOFF_ORDER", default_value_t = 10)]
    order: usize,
    /// Samples per side of the sampling grid.
    #[arg(long, global = true, env = "BIRKHOFF_SAMPLES", default_value_t = 4)]
    samples: usize,
    /// Pass threshold (suite default when omitted).
    #[arg(long, global = true, env = "BIRKHOFF_TOL")]
    tol: Option<f64>,
    #[arg(long, global = true, env = "BIRKHOFF_SEED", default_value_t = 0)]
    seed: u64,
    /// Directory for artifacts.
    #[arg(long, global = true, env = "BIRKHOFF_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exponents, determinant roots and hypothesis diagnostics.
    Analyze { file: PathBuf },
    /// Run one verification suite: fuchs, legendre, periodicity, circuit, sigma-form.
    Verify { file: PathBuf, suite: String },
    /// Shift the characteristic constants at infinity by integer targets, e.g. "1,-1".
    Normalize {
        file: PathBuf,
        #[arg(allow_hyphen_values = true)]
        targets: String,
    },
}

fn run(cli: Cli) -> Result<(String, bool), Error> {
    let c = cli.config;
    let cfg = RunConfig {
        precision: c.precision,
        order: c.order,
        samples: c.samples,
        tolerance: c.tol,
        seed: c.seed,
        out: c.out,
    };
    match cli.command {
        Command::Analyze { file } => {
            let r = cmd_analyze(&SystemFile::load(&file)?, &cfg)?;
            if !r.hypotheses_ok {
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
            }
            Ok((serde_json::to_string_pretty(&r)?, true))
        }
        Command::Verify { file, suite } => {
            let suite: Suite = suite.parse()?;
            let r = cmd_verify(&SystemFile::load(&file)?, suite, &cfg)?;
            Ok((serde_json::to_string_pretty(&r)?, r.pass))
        }
        Command::Normalize { file, targets } => {
            let targets = parse_targets(&targets)?;
            let r = cmd_normalize(&SystemFile::load(&file)?, &targets, &cfg)?;
            let traj: Vec<String> = r.norm_trajectory.iter().map(|x| x.to_string()).collect();
            eprintln!("norm trajectory: {}", traj.join(" -> "));
            Ok((serde_json::to_string_pretty(&r)?, true))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((json, pass)) => {
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout(), "{json}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
