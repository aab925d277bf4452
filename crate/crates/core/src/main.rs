use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use place_ifs::error::Error;
use place_ifs::run::{run, Command};
use place_ifs::scenario::Scenario;

#[derive(Parser)]
#[command(name = "place-ifs", version, about = "Place-dependent iterated function systems: simulation, coupling and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Forward trajectories from x0.
    Simulate(Common),
    /// Coupled chains from (x0, y0) and their stopping times.
    Couple(Common),
    /// Check the contraction, overlap and Lyapunov conditions.
    Check {
        #[command(flatten)]
        common: Common,
        /// Use the operator-norm overlap for a mixture kernel.
        #[arg(long)]
        corollary: bool,
    },
    /// FM and W1 distances between chains from x0 and y0, with a rate fit.
    Converge(Common),
    /// Long-run empirical law and its stationarity defect.
    Invariant(Common),
    /// Forward recursion and backward partial sums of a mixture kernel.
    Perpetuity(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario (TOML) or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long = "burn-in")]
    burn_in: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Exit with status 3 when a check fails.
    #[arg(long)]
    strict: bool,
    /// Worker threads, 0 for one per core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Override any scenario field, e.g. `--set experiment.horizon=300`.
    #[arg(long = "set", value_name = "KEY=JSON")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut o = Vec::new();
        if let Some(v) = self.seed {
            o.push(format!("seed={v}"));
        }
        if let Some(v) = self.steps {
            o.push(format!("experiment.steps={v}"));
        }
        if let Some(v) = self.replicas {
            o.push(format!("experiment.replicas={v}"));
        }
        if let Some(v) = self.burn_in {
            o.push(format!("experiment.burn_in={v}"));
        }
        o.extend(self.set.iter().cloned());
        o
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match &cli.command {
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Couple(c) => (Command::Couple, c),
        Sub::Check { common, corollary } => (Command::Check { corollary: *corollary }, common),
        Sub::Converge(c) => (Command::Converge, c),
        Sub::Invariant(c) => (Command::Invariant, c),
        Sub::Perpetuity(c) => (Command::Perpetuity, c),
    };
    let result = Scenario::load_with(&common.config, &common.overrides()).and_then(|scenario| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build()
            .map_err(|e| Error::InvalidValue(e.to_string()))?;
        pool.install(|| run(cmd, &scenario, &common.out))
    });
    match result {
        Ok(outcome) => {
            for f in &outcome.outputs {
                println!("{}", common.out.join(f).display());
            }
            if common.strict && !outcome.passed {
                eprintln!("check failed");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e @ Error::InvalidScenario { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
