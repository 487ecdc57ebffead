use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ethweyl_cli::plot::emit_plot_script;
use ethweyl_cli::{execute, ExperimentConfig, Kind, Overrides, CONFIG_SCHEMA};

#[derive(Parser)]
#[command(name = "ethweyl", version, about = "Run band-structure experiments on the LMG model and its oracles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment from a config file and/or flags.
    Run(RunArgs),
    /// Write a gnuplot script for one or more CSV outputs.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Script path; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the JSON Schema of the config file.
    Schema,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment kind; overrides the config's `kind`.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Particle number Ω.
    #[arg(long)]
    omega: Option<u32>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    shell_levels: Option<usize>,
    /// Shell samples for the bandwidth estimate.
    #[arg(long)]
    samples: Option<usize>,
    /// Worker threads for the data-parallel core.
    #[arg(long, env = "ETHWEYL_WORKERS")]
    workers: Option<usize>,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn init_workers(n: Option<usize>) -> Result<usize> {
    #[cfg(feature = "parallel")]
    {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            if n == 0 {
                bail!("worker count must be positive");
            }
            b = b.num_threads(n);
        }
        b.build_global().context("starting worker pool")?;
        Ok(rayon::current_num_threads())
    }
    #[cfg(not(feature = "parallel"))]
    {
        if n == Some(0) {
            bail!("worker count must be positive");
        }
        Ok(1)
    }
}

fn run(args: RunArgs) -> std::result::Result<bool, Failure> {
    let mut cfg = match (&args.config, args.kind) {
        (Some(p), _) => ExperimentConfig::load(p).map_err(Failure::Config)?,
        (None, Some(k)) => ExperimentConfig::new(k),
        (None, None) => return Err(Failure::Config(anyhow::anyhow!("give --config or --kind"))),
    };
    if let Some(k) = args.kind {
        cfg.kind = k;
    }
    cfg.apply(&Overrides {
        seed: args.seed,
        out: args.out,
        omega: args.omega,
        a: args.a,
        epsilon: args.epsilon,
        shell_levels: args.shell_levels,
        samples: args.samples,
    });
    cfg.validate().map_err(Failure::Config)?;
    let workers = init_workers(args.workers).map_err(Failure::Config)?;
    let m = execute(&cfg, workers).map_err(Failure::Runtime)?;
    for c in &m.checks {
        println!("{}: {} {}", c.name, if c.pass { "ok" } else { "FAILED" }, c.detail);
    }
    println!("wrote {} files to {}", m.outputs.len(), cfg.out.display());
    Ok(m.success)
}

fn plot(csv: &[PathBuf], output: Option<PathBuf>) -> Result<()> {
    let refs: Vec<&std::path::Path> = csv.iter().map(|p| p.as_path()).collect();
    let s = emit_plot_script(&refs, None)?;
    match output {
        Some(p) => std::fs::write(&p, s).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(args) => match run(args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(Failure::Config(e)) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
            Err(Failure::Runtime(e)) => {
                eprintln!("error: {e:#}");
                ExitCode::from(3)
            }
        },
        Cmd::Plot { csv, output } => match plot(&csv, output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Cmd::Schema => {
            print!("{CONFIG_SCHEMA}");
            ExitCode::SUCCESS
        }
    }
}
