use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tropical_lyapunov::Error;
use tropical_lyapunov_cli::{
    convergence_table, exit_code, render_convergence, render_report, run, Format, Input,
    MethodChoice, RunConfig, DEFAULT_K, DEFAULT_MAX_DEPTH, DEFAULT_REPLICATIONS, DEFAULT_SEED,
};

/// Lyapunov exponents (mean cycle times) of max-plus linear queueing models.
#[derive(Parser)]
#[command(name = "tropical-lyapunov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the exponent with the requested methods.
    Run(Common),
    /// Monte Carlo estimates at several horizons.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Ascending horizons.
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        ks: Vec<usize>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Network description (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in network: open_tandem, closed_tandem, manufacturing_tandem,
    /// communication_tandem, fork_join_5, round_robin.
    #[arg(long)]
    preset: Option<String>,
    /// Fixed square matrix literal file.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    source: Source,

    /// Preset node count (queue count for round_robin).
    #[arg(long)]
    n: Option<usize>,
    /// Preset service laws, e.g. `exp(1) exp(2) det(3)`.
    #[arg(long, num_args = 1..)]
    services: Option<Vec<String>>,
    /// Round-robin arrival law.
    #[arg(long)]
    arrival: Option<String>,
    /// Closed-tandem customer counts.
    #[arg(long, value_delimiter = ',')]
    customers: Option<Vec<u32>>,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Product length per replication.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    reps: usize,
    /// Samples per sampled expectation.
    #[arg(long, default_value_t = tropical_lyapunov::stochastic::DEFAULT_EXPECTATION_SAMPLES)]
    esamples: usize,
    #[arg(long, value_enum, default_value_t = MethodChoice::All)]
    method: MethodChoice,
    /// Depth limit of the decomposition chain.
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run Monte Carlo even when the existence check fails.
    #[arg(long)]
    override_existence: bool,
}

impl Common {
    fn config(self) -> Result<RunConfig, Error> {
        let preset_args = self.n.is_some()
            || self.services.is_some()
            || self.arrival.is_some()
            || self.customers.is_some();
        if preset_args && self.source.preset.is_none() {
            return Err(Error::InvalidArgument(
                "--n, --services, --arrival and --customers need --preset".into(),
            ));
        }
        let input = match (self.source.spec, self.source.preset, self.source.matrix) {
            (Some(path), _, _) => Input::Spec { path },
            (_, Some(name), _) => Input::Preset {
                name,
                n: self.n,
                services: self.services,
                arrival: self.arrival,
                customers: self.customers,
            },
            (_, _, Some(path)) => Input::Matrix { path },
            _ => unreachable!("clap enforces one input"),
        };
        Ok(RunConfig {
            input,
            seed: self.seed,
            k: self.k,
            replications: self.reps,
            expectation_samples: self.esamples,
            method: self.method,
            max_depth: self.max_depth,
            format: self.format,
            out: self.out,
            override_existence: self.override_existence,
        })
    }
}

fn execute(command: Command) -> Result<(String, Option<PathBuf>, Vec<String>), Error> {
    match command {
        Command::Run(common) => {
            let config = common.config()?;
            let report = run(&config)?;
            Ok((render_report(&report, config.format), config.out, report.warnings))
        }
        Command::Convergence { common, ks } => {
            let config = common.config()?;
            let table = convergence_table(&config, &ks)?;
            Ok((render_convergence(&table, config.format), config.out, Vec::new()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok((text, out, warnings)) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::FAILURE;
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
