use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nesslab_cli::{run, validate_config, Experiment};

/// Run a parameter sweep and write CSV plus a JSON summary.
#[derive(Parser, Debug)]
#[command(name = "nesslab", version)]
struct Args {
    /// Experiment name; must match the config.
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// CSV path; the summary goes next to it with a .json extension.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let experiment = match args.experiment.parse::<Experiment>() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cfg = match validate_config(&args.config) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("invalid config {}:", args.config.display());
            for e in &errors.0 {
                eprintln!("  {e}");
            }
            return ExitCode::from(1);
        }
    };
    if cfg.experiment != experiment {
        eprintln!("error: config is for `{}`, not `{experiment}`", cfg.experiment);
        return ExitCode::from(1);
    }
    if args.workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(1);
    }
    let workers = args
        .workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out = args.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from(format!("{experiment}.csv")));
    let result = run(&cfg, workers);
    let summary = match result.write(&out) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", out.display());
            return ExitCode::from(1);
        }
    };
    let counts: Vec<String> =
        result.status_counts().iter().filter(|(_, n)| *n > 0).map(|(s, n)| format!("{s} {n}")).collect();
    println!("{} rows ({}) -> {}, {}", result.rows.len(), counts.join(", "), out.display(), summary.display());
    if result.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
