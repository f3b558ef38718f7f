use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use weylmoyal_cli::{emit, run, Command, RunConfig};

/// Weyl-Moyal quantization checks on degenerate Poisson data.
///
/// Prints a JSON report; exits 1 when a check fails and 2 on invalid input.
/// Set WEYLMOYAL_THREADS to fix the worker count.
#[derive(Parser)]
#[command(name = "weylmoyal", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Input JSON documents, in the order the subcommand expects.
    #[arg(long = "input", short, global = true)]
    inputs: Vec<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 42, global = true)]
    seed: u64,
    /// Override the bound of every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Size N of the finite Weyl model (2N lattice points per axis).
    #[arg(long, global = true)]
    lattice_n: Option<usize>,
    /// Points per axis when sampling generator documents.
    #[arg(long, global = true)]
    lattice_points: Option<usize>,
    #[arg(long, global = true)]
    box_length: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Darboux frame of a bivector (input: bivector).
    Darboux,
    /// Twisted product (inputs: [bivector] f g; sigma = 0 when omitted).
    Star,
    /// Weyl quantization in the finite model (inputs: bivector f).
    Quantize,
    /// Seeded identity suites on the finite model.
    Verify,
    /// Section algebra checks (inputs: bundle or leaf sample, [section], [section]).
    Bundle,
    /// Lorentz orbit of the standard quantum spacetime form (input: optional parameter list).
    Orbit {
        #[arg(long, default_value_t = 24)]
        count: usize,
        /// Leave out the parity-reflected elements.
        #[arg(long)]
        no_parity: bool,
    },
    /// Points on a symplectic leaf of su(2)*.
    Leaf {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 24)]
        count: usize,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("WEYLMOYAL_THREADS") {
        let n: usize = v.parse().with_context(|| format!("WEYLMOYAL_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn config_from(cli: Cli) -> RunConfig {
    let command = match cli.command {
        Cmd::Darboux => Command::Darboux,
        Cmd::Star => Command::Star,
        Cmd::Quantize => Command::Quantize,
        Cmd::Verify => Command::Verify,
        Cmd::Bundle => Command::Bundle,
        Cmd::Orbit { .. } => Command::Orbit,
        Cmd::Leaf { .. } => Command::Leaf,
    };
    let mut config = RunConfig::new(command);
    match cli.command {
        Cmd::Orbit { count, no_parity } => {
            config.count = count;
            config.include_parity = !no_parity;
        }
        Cmd::Leaf { radius, count } => {
            config.radius = radius;
            config.count = count;
        }
        _ => {}
    }
    let c = cli.common;
    config.inputs = c.inputs;
    config.output = c.output;
    config.seed = c.seed;
    config.tol = c.tol;
    config.lattice_n = c.lattice_n;
    config.lattice_points = c.lattice_points;
    config.box_length = c.box_length;
    config
}

fn main() -> ExitCode {
    let config = config_from(Cli::parse());
    let outcome = configure_threads().and_then(|_| {
        let report = run(&config)?;
        emit(&config, &report)?;
        Ok(report.pass)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
