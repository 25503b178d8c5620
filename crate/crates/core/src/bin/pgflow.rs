use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use poisson_gradflow::experiment::{certify, preset, run_experiment, write_certificate, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "pgflow", version, about = "Distributed gradient flow over Poisson-sampled channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a config file and write trajectories, certificate and summary.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compute the rate certificate only.
    Certify {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a built-in preset: experiment1, experiment2 or nominal.
    Preset {
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, env = "PGFLOW_OUT_DIR", default_value = "pgflow-out")]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sample paths override.
    #[arg(long)]
    paths: Option<usize>,
    /// Print the fully expanded config and exit.
    #[arg(long)]
    dump_effective_config: bool,
}

fn prepare(mut cfg: ExperimentConfig, common: &Common) -> poisson_gradflow::Result<Option<ExperimentConfig>> {
    cfg.apply_overrides(&Overrides {
        seed: common.seed,
        paths: common.paths,
    })?;
    if common.dump_effective_config {
        println!("{}", cfg.effective_json());
        return Ok(None);
    }
    Ok(Some(cfg))
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> poisson_gradflow::Result<()> {
    let report = run_experiment(cfg, out)?;
    print!("{}", report.certificate.to_text());
    println!("outputs written to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, common } => ExperimentConfig::load(config)
            .and_then(|c| prepare(c, common))
            .and_then(|c| c.map_or(Ok(()), |c| simulate(&c, &common.out))),
        Command::Preset { name, common } => preset(name)
            .and_then(|c| prepare(c, common))
            .and_then(|c| c.map_or(Ok(()), |c| simulate(&c, &common.out))),
        Command::Certify { config, common } => ExperimentConfig::load(config)
            .and_then(|c| prepare(c, common))
            .and_then(|c| match c {
                None => Ok(()),
                Some(c) => {
                    let cert = certify(&c)?;
                    write_certificate(&cert, &common.out)?;
                    print!("{}", cert.to_text());
                    Ok(())
                }
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
