use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nonlocal_cli::config::{Format, Overrides};
use nonlocal_cli::{certify_mollifiers, check_identities, run, RunOptions};
use nonlocal_core::identities::Ops;

#[derive(Parser)]
#[command(name = "nonlocal", version, about = "Nonlocal functional convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep jobs of a config and emit the report.
    Run(RunArgs),
    /// Check the difference and integral identities.
    CheckIdentities(IdentityArgs),
    /// Certify mollifier families.
    CertifyMollifiers(CertifyArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Omit the timestamp header line.
    #[arg(long)]
    no_timestamp: bool,
    /// Divide Monte Carlo sample counts by 10.
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct IdentityArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Run the reduced suite.
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct CertifyArgs {
    /// Config with a `mollifiers` section; defaults to the built-in families.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let code = match cli.command {
        Command::Run(a) => {
            let opts = RunOptions {
                config: a.config,
                overrides: Overrides {
                    seed: a.seed,
                    workers: a.workers,
                    output: a.out,
                    format: a.format,
                    quick: a.quick,
                },
                no_timestamp: a.no_timestamp,
            };
            run(&opts, &mut stdout, &mut std::io::stderr())
        }
        Command::CheckIdentities(a) => check_identities(a.seed, a.quick, &Ops::default(), &mut stdout),
        Command::CertifyMollifiers(a) => certify_mollifiers(a.config.as_deref(), &mut stdout),
    };
    std::process::exit(code);
}
