use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pipeline_core::report::{
    cmd_ingest, cmd_sensitivity, cmd_simulate, cmd_sweep, with_threads, Inputs, Manifest, RunOverrides,
};

/// Academic pipeline simulator: stock reconstruction, scenario runs,
/// sensitivity analyses and congestion sweeps.
#[derive(Debug, Parser)]
#[command(name = "pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct stocks from the degree series and write the consistency report.
    Ingest(Common),
    /// Run every configured scenario and write trajectories and metrics.
    Simulate(Common),
    /// One-at-a-time sweeps, PRCC and the congestion heatmap.
    Sensitivity(Common),
    /// The (a_F, K_F) congestion heatmap only.
    Sweep(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Degree CSV (year,bachelors,masters,doctorates); overrides the config.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Output directory; overrides the config (default `out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// PRCC sampling seed; overrides the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Run even when positivity or boundedness conditions fail.
    #[arg(long)]
    override_feasibility: bool,
    /// Worker threads (default: one per core).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

impl Common {
    fn inputs(&self) -> anyhow::Result<Inputs> {
        let overrides = RunOverrides {
            data: self.data.clone(),
            out: self.out.clone(),
            seed: self.seed,
            override_feasibility: self.override_feasibility,
            threads: self.threads,
        };
        Ok(Inputs::load(self.config.as_deref(), &overrides)?)
    }
}

fn report(manifest: &Manifest, out: &std::path::Path) {
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "wrote {} files and manifest.json to {}",
        manifest.files.len(),
        out.display()
    );
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (name, common) = match &cli.command {
        Command::Ingest(c) => ("ingest", c),
        Command::Simulate(c) => ("simulate", c),
        Command::Sensitivity(c) => ("sensitivity", c),
        Command::Sweep(c) => ("sweep", c),
    };
    let inputs = common.inputs()?;
    let out = inputs.output_dir();
    let threads = inputs.config.threads;
    with_threads(threads, || -> anyhow::Result<()> {
        match cli.command {
            Command::Ingest(_) => {
                let summary = cmd_ingest(&inputs, &out)?;
                for (channel, err) in &summary.max_errors {
                    match err {
                        Some(e) => println!("max relative error {channel}: {e:.6e}"),
                        None => println!("max relative error {channel}: undefined"),
                    }
                }
                report(&summary.manifest, &out);
            }
            Command::Simulate(_) => report(&cmd_simulate(&inputs, &out)?, &out),
            Command::Sensitivity(_) => report(&cmd_sensitivity(&inputs, &out)?, &out),
            Command::Sweep(_) => report(&cmd_sweep(&inputs, &out)?, &out),
        }
        Ok(())
    })?
    .with_context(|| format!("{name} failed"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
