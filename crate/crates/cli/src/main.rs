use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use jang_penrose_core::initial_data::DataDescriptor;
use jang_penrose_core::pipeline::{
    batch, read_batch, read_json, run, validate_descriptor, write_json, DataSource, RunConfig,
    SolverBlock, EXIT_INVALID_INPUT,
};

const OUT_ENV: &str = "JANG_PENROSE_OUT";
const DEFAULT_OUT: &str = "jang-penrose-out";

#[derive(Parser)]
#[command(
    name = "jang-penrose",
    version,
    about = "Jang equation solver and mass/area inequality verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory. Falls back to the config's `out`, then $JANG_PENROSE_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a JSON list of configurations in parallel.
    Batch {
        #[arg(long)]
        configs: PathBuf,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a data set (energy condition, fall-off) without solving.
    Validate {
        #[arg(long)]
        data: PathBuf,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn run_one(config: &Path, out: Option<PathBuf>) -> anyhow::Result<u8> {
    let cfg = RunConfig::from_path(config)?;
    let dir = match (out, &cfg.out) {
        (Some(o), _) => o,
        (None, Some(o)) => cfg.base_dir.join(o),
        (None, None) => out_root(None),
    };
    let report = run(&cfg, &dir);
    let s = &report.comparable;
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    for stage in s.stages.iter().filter(|x| x.message.is_some()) {
        eprintln!(
            "{:?}: {}",
            stage.stage,
            stage.message.as_deref().unwrap_or_default()
        );
    }
    match &s.penrose {
        Some(p) => println!(
            "{} {:?} exit={} margin={:e} +- {:e} out={}",
            s.label,
            s.verdict,
            s.exit_code,
            p.margin,
            p.uncertainty,
            dir.display()
        ),
        None => println!(
            "{} {:?} exit={} out={}",
            s.label,
            s.verdict,
            s.exit_code,
            dir.display()
        ),
    }
    Ok(s.exit_code)
}

fn run_batch(list: &Path, workers: usize, out: Option<PathBuf>) -> anyhow::Result<u8> {
    let configs = read_batch(list)?;
    let root = out_root(out);
    let agg = batch(&configs, workers, &root);
    let path = root.join("batch.json");
    write_json(&path, &agg).with_context(|| "writing the aggregate report".to_string())?;
    for r in &agg.comparable.runs {
        println!(
            "{:03} {} {:?} exit={} {}",
            r.index,
            r.label,
            r.verdict,
            r.exit_code,
            r.failures.join("; ")
        );
    }
    println!(
        "batch {:?} exit={} report={}",
        agg.comparable.verdict,
        agg.comparable.exit_code,
        path.display()
    );
    Ok(agg.comparable.exit_code)
}

fn run_validate(path: &Path) -> anyhow::Result<u8> {
    let source: DataSource = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let desc: DataDescriptor = source.descriptor(base)?;
    let outcome = validate_descriptor(&desc, &SolverBlock::default());
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(m) = &outcome.message {
        eprintln!("{m}");
    }
    if let Some(r) = &outcome.report {
        println!("{}", serde_json::to_string_pretty(r)?);
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run_one(&config, out),
        Command::Batch {
            configs,
            workers,
            out,
        } => run_batch(&configs, workers, out),
        Command::Validate { data } => run_validate(&data),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID_INPUT)
        }
    }
}
