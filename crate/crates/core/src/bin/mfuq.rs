use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mfuq::run::{compare, format_table, run, Method, RunConfig, RunOverrides};

#[derive(Parser)]
#[command(name = "mfuq", version, about = "Multi-fidelity forward uncertainty quantification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run MISC and/or SRBF as described by a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write SVG charts.
        #[arg(long)]
        svg: bool,
    },
    /// Tabulate intermediate and final estimates of one or more runs.
    Compare {
        /// `summary.json` files written by `run`.
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        /// Iteration of the intermediate snapshot (default: mid-run).
        #[arg(long)]
        iteration: Option<usize>,
        /// Emit JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Misc,
    Srbf,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Misc => Method::Misc,
            MethodArg::Srbf => Method::Srbf,
            MethodArg::Both => Method::Both,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> mfuq::Result<()> {
    match cli.command {
        Command::Run {
            config,
            method,
            budget,
            out,
            seed,
            svg,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            cfg.apply(&RunOverrides {
                method: method.map(Method::from),
                budget,
                output_dir: out,
                seed,
                svg,
                cache_file: std::env::var_os("MFUQ_CACHE")
                    .filter(|v| !v.is_empty())
                    .map(PathBuf::from),
            })?;
            let summary = run(&cfg)?;
            for m in &summary.methods {
                let f = &m.final_snapshot;
                println!(
                    "{}: iteration {} cost {} mean {} std {} ({})",
                    m.method, f.iteration, f.cost, f.mean, f.std, m.stop
                );
            }
            println!("outputs in {}", cfg.output_dir.display());
            Ok(())
        }
        Command::Compare {
            summaries,
            iteration,
            json,
        } => {
            let rows = compare(&summaries, iteration)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                print!("{}", format_table(&rows));
            }
            Ok(())
        }
    }
}
