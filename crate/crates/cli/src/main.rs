use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use q4nl_cli::{check, scatter, simulate, verify, waveop, CheckArgs, CliError, Overrides, Report, RunConfig};

#[derive(Parser)]
#[command(name = "q4nl", version, about = "Coupled fourth-order NLS simulator and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve and write the CSV series and checkpoints.
    Simulate(RunArgs),
    /// Morawetz identity residuals under dt refinement.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, hide = true)]
        negate_rhs: bool,
    },
    /// Scattering-state extraction from checkpoint times.
    Scatter(RunArgs),
    /// Wave-operator round trip.
    Waveop(RunArgs),
    /// Exponent flags and admissibility, as key=value lines.
    Check {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long = "components", short = 'N', default_value_t = 1)]
        components: usize,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
}

fn load(run: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&run.config)?;
    Overrides {
        dt: run.dt,
        steps: run.steps,
        seed: run.seed,
    }
    .apply(&mut cfg);
    Ok(cfg)
}

fn dispatch(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Simulate(run) => simulate(&load(&run)?),
        Command::Verify { run, negate_rhs } => verify(&load(&run)?, negate_rhs),
        Command::Scatter(run) => scatter(&load(&run)?),
        Command::Waveop(run) => waveop(&load(&run)?),
        Command::Check { d, p, components, q, r, n } => check(&CheckArgs {
            d,
            p,
            components,
            q,
            r,
            n,
        }),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("Q4NL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("Q4NL_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
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
    let outcome = configure_threads().and_then(|_| dispatch(cli.command));
    match outcome {
        Ok(report) => {
            print!("{}", report.text);
            ExitCode::from(if report.passed { 0 } else { 3 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
