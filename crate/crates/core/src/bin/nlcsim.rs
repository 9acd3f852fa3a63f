use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlcsim::cli_io::{
    cmd_audit, cmd_inspect, cmd_resume, cmd_run, exit_code, load_audit_config, load_run_config,
    Overrides, RunSummary,
};
use nlcsim::{par, Error, Result};

/// Nematic liquid-crystal flow on the periodic box with critical Besov
/// criterion monitoring.
#[derive(Parser)]
#[command(name = "nlcsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides the configured random seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            output_dir: self.output_dir.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run from the configured initial data.
    Run(Common),
    /// Continue a run from a checkpoint.
    Resume {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to resume from; defaults to the configured one.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Evaluate the inequality audits over a seeded corpus.
    Audit(Common),
    /// Print a checkpoint header and validate its payload.
    InspectCheckpoint { path: PathBuf },
}

fn report(summary: RunSummary, quiet: bool) -> ExitCode {
    if !quiet {
        println!("{}", summary.line());
    }
    if summary.blew_up() {
        if quiet {
            eprintln!("{}", summary.line());
        }
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("NLCSIM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!(
                "NLCSIM_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    par::init_threads(threads_from_env()?);
    match cli.command {
        Command::Run(c) => {
            let cfg = load_run_config(&c.config, &c.overrides())?;
            Ok(report(cmd_run(&cfg)?, c.quiet))
        }
        Command::Resume { common, checkpoint } => {
            let cfg = load_run_config(&common.config, &common.overrides())?;
            Ok(report(
                cmd_resume(&cfg, checkpoint.as_deref())?,
                common.quiet,
            ))
        }
        Command::Audit(c) => {
            let cfg = load_audit_config(&c.config, &c.overrides())?;
            let rep = cmd_audit(&cfg)?;
            if !c.quiet {
                print!("{}", rep.text);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::InspectCheckpoint { path } => {
            print!("{}", cmd_inspect(&path)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("nlcsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
