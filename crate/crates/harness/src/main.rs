//! `ohm`: command-line experiment runner.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ohm_core::benchmarks::{registry, BenchmarkId, DimRule};
use ohm_harness::{
    export_csv, export_json, export_markdown, load_csv, preferred_dim, run_experiment, Error,
    ExperimentConfig, OptimizerSpec, Preset, ProblemSpec,
};

#[derive(Parser)]
#[command(
    name = "ohm",
    version,
    about = "Seeded optimizer experiments: population search, hierarchy search, descent hybrids"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment from a JSON config file or a built-in preset.
    Run(RunArgs),
    /// Print the benchmark function catalog.
    ListBenchmarks,
    /// Print the optimizer registry.
    ListOptimizers,
    /// Summarize a previously exported raw-error CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: desk, multimodal, or hybrid.
    #[arg(long)]
    preset: Option<String>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of runs per cell.
    #[arg(long)]
    runs: Option<usize>,
    /// Override every problem's evaluation budget.
    #[arg(long)]
    nfe: Option<u64>,
    /// Override the benchmark dimension where the function supports it.
    #[arg(long)]
    dim: Option<usize>,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format: csv, json, or markdown.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Leave the CSV wall_ms column empty, making the bytes reproducible.
    #[arg(long)]
    no_wall_ms: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Raw-error CSV produced by `run --format csv`.
    #[arg(long)]
    input: PathBuf,
    /// Output format: markdown or json.
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A reader closing the pipe early (`ohm list-benchmarks | head`) is
        // not a failure.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> ohm_harness::Result<()> {
    match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::ListBenchmarks => cmd_list_benchmarks(),
        Cmd::ListOptimizers => cmd_list_optimizers(),
        Cmd::Report(args) => cmd_report(args),
    }
}

/// Opens the output sink: the file behind `--output`, stdout otherwise.
fn open_output(path: &Option<PathBuf>) -> ohm_harness::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_run(args: RunArgs) -> ohm_harness::Result<()> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let mut text = String::new();
            File::open(path)?.read_to_string(&mut text)?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => Preset::parse(name)?.config(),
        (None, None) => {
            return Err(Error::Config(
                "nothing to run: pass --config <file> or --preset <name>".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };

    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs_per_cell = runs;
    }
    for p in &mut cfg.problems {
        match p {
            ProblemSpec::Benchmark { id, dim, nfe } => {
                if let Some(n) = args.nfe {
                    *nfe = n;
                }
                if let Some(d) = args.dim {
                    *dim = preferred_dim(BenchmarkId::parse(id)?, d);
                }
            }
            ProblemSpec::Wcsp { nfe, .. } => {
                if let Some(n) = args.nfe {
                    *nfe = n;
                }
            }
        }
    }
    cfg.validate()?;

    // Reject cheap input mistakes before the run, not after minutes of
    // computation.
    let format = args.format.as_str();
    if !matches!(format, "csv" | "json" | "markdown") {
        return Err(Error::Config(format!(
            "unknown format '{format}' (expected csv, json, or markdown)"
        )));
    }
    let mut out = open_output(&args.output)?;

    let cells = run_experiment(&cfg)?;
    match format {
        "csv" => export_csv(&cells, !args.no_wall_ms, &mut out)?,
        "json" => export_json(&cells, &mut out)?,
        "markdown" => export_markdown(&cells, &mut out)?,
        _ => unreachable!("validated above"),
    }
    out.flush()?;
    Ok(())
}

fn cmd_list_benchmarks() -> ohm_harness::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{:<5} {:<22} {:>10} {:>10}  {:<7} flags",
        "id", "name", "lower", "upper", "dims"
    )?;
    for d in registry(0) {
        let dims = match d.dim_rule {
            DimRule::Exactly2 => "=2",
            DimRule::AnyAtLeast2 => ">=2",
        };
        let mut flags = Vec::new();
        if d.rotated {
            flags.push("rotated");
        }
        if d.shifted {
            flags.push("shifted");
        }
        if d.input_scale != 1.0 {
            flags.push("scaled");
        }
        writeln!(
            out,
            "{:<5} {:<22} {:>10} {:>10}  {:<7} {}",
            d.label,
            d.name,
            d.lower,
            d.upper,
            dims,
            flags.join(",")
        )?;
    }
    Ok(())
}

fn cmd_list_optimizers() -> ohm_harness::Result<()> {
    let mut out = std::io::stdout().lock();
    for spec in OptimizerSpec::all() {
        writeln!(out, "{:<12} {}", spec.key(), spec.description())?;
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> ohm_harness::Result<()> {
    let format = args.format.as_str();
    if !matches!(format, "markdown" | "json") {
        return Err(Error::Config(format!(
            "unknown format '{format}' (expected markdown or json)"
        )));
    }
    let cells = load_csv(File::open(&args.input)?)?;
    let mut out = open_output(&args.output)?;
    match format {
        "markdown" => export_markdown(&cells, &mut out)?,
        "json" => export_json(&cells, &mut out)?,
        _ => unreachable!("validated above"),
    }
    out.flush()?;
    Ok(())
}
