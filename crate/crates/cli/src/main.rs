//! `cachefair`: batch-simulate cache allocation policies and audit their
//! fairness. Scenarios come from JSON configs (or named presets); results go
//! to stdout and optional CSV files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;

#[derive(Parser)]
#[command(name = "cachefair", version, about = "Multi-tenant cache allocation simulator and fairness auditor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario under one policy and report its metrics.
    Run(RunArgs),
    /// Run the cartesian product of the config's sweep axes.
    Sweep(RunArgs),
    /// Stress policies on random instances and tally fairness violations.
    Audit(AuditArgs),
    /// Emit the query trace a scenario generates, without simulating it.
    Trace(TraceArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Override `policy.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override `policy.name` (static, rsd, optp, mmf, mmf-mw, fastpf, exactpf).
    #[arg(long)]
    policy: Option<String>,
    /// Override `output.dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Suppress stdout metrics.
    #[arg(long)]
    quiet: bool,
    /// Override any config field by dotted path, e.g. --set scenario.batches=10.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    sets: Vec<String>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            sets: self.sets.clone(),
            policy: self.policy.clone(),
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            quiet: self.quiet,
        }
    }
}

#[derive(Args)]
struct AuditArgs {
    /// How many random instances to draw.
    #[arg(long, default_value_t = 25)]
    count: usize,
    /// Upper bound on tenants per instance (at most 6).
    #[arg(long, default_value_t = 4)]
    max_tenants: usize,
    /// Upper bound on views per instance.
    #[arg(long, default_value_t = 5)]
    max_views: usize,
    /// Base seed; instance i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Violation tolerance for all three checks.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Draw non-uniform tenant weights.
    #[arg(long)]
    weighted: bool,
    /// Write audit.csv here in addition to the stdout table.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Suppress the stdout table.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct TraceArgs {
    /// JSON config file naming the scenario.
    #[arg(long)]
    config: PathBuf,
    /// Trace seed; defaults to `policy.seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the trace CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any config field by dotted path.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    sets: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => {
            config::load(&args.config, &args.overrides()).and_then(|c| commands::cmd_run(&c))
        }
        Command::Sweep(args) => {
            config::load(&args.config, &args.overrides()).and_then(|c| commands::cmd_sweep(&c))
        }
        Command::Audit(args) => commands::cmd_audit(&commands::AuditCmd {
            count: args.count,
            max_tenants: args.max_tenants,
            max_views: args.max_views,
            seed: args.seed,
            tolerance: args.tol,
            weighted: args.weighted,
            out_dir: args.out_dir.clone(),
            quiet: args.quiet,
        }),
        Command::Trace(args) => {
            let overrides = Overrides {
                sets: args.sets.clone(),
                ..Overrides::default()
            };
            config::load(&args.config, &overrides).and_then(|c| {
                commands::cmd_trace(
                    &c,
                    &commands::TraceCmd {
                        seed: args.seed,
                        out: args.out.clone(),
                    },
                )
            })
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
