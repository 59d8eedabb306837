use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gheat::corpus;
use gheat::experiment::{self, BackendKind, ExperimentSpec, Overrides};

#[derive(Parser)]
#[command(name = "gheat", version, about = "G-normal expectations and G-heat surfaces by iterative approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment description (JSON).
    spec: PathBuf,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid half width K.
    #[arg(long = "half-width")]
    half_width: Option<f64>,
    /// Output directory (default: out/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Solve {
        #[command(flatten)]
        args: RunArgs,
        /// quad | mc | mc-cv
        #[arg(long)]
        backend: Option<String>,
    },
    /// List the built-in terminal functions.
    Corpus,
    /// Run an experiment against the finite-difference reference.
    Compare {
        #[command(flatten)]
        args: RunArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("GHEAT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> gheat::Result<()> {
    match command {
        Command::Corpus => {
            let mut out = std::io::stdout().lock();
            for e in corpus::entries() {
                let _ = writeln!(out, "{:<20} {}d  {}", e.name, e.dimension, e.formula);
            }
            Ok(())
        }
        Command::Solve { args, backend } => {
            let backend = backend.map(|b| b.parse::<BackendKind>()).transpose()?;
            let (spec, out) = load(&args, backend)?;
            let report = experiment::run(&spec, &out)?;
            print_report(&report);
            Ok(())
        }
        Command::Compare { args } => {
            let (spec, out) = load(&args, None)?;
            let report = experiment::compare(&spec, &out)?;
            print_report(&report);
            Ok(())
        }
    }
}

fn load(args: &RunArgs, backend: Option<BackendKind>) -> gheat::Result<(ExperimentSpec, PathBuf)> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    spec.apply(&Overrides {
        n: args.n,
        seed: args.seed,
        half_width: args.half_width,
        backend,
    });
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(&spec.name));
    Ok((spec, out))
}

// write errors (a closed pipe) are ignored
fn print_report(report: &experiment::RunReport) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}: value = {}", report.value.name, report.value.value);
    if let Some(c) = &report.compare {
        let _ = writeln!(
            out,
            "max |solver - oracle| on |x| <= {} : {:.3e} (at x = {:.4})",
            c.window, c.max_abs_error, c.at
        );
    }
    for f in &report.files {
        let _ = writeln!(out, "wrote {}", f.display());
    }
}
