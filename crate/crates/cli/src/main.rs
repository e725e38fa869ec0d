//! Command-line front end for continual knowledge-graph embedding runs.
//!
//! `train` turns a config into a run directory, `eval` re-scores a stored
//! checkpoint, `gen-synthetic` writes a growing benchmark corpus, and
//! `report` renders finished runs into tables and plotting CSV.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ckge_core::error::DataError;
use ckge_core::eval::{Protocol, RunReport};
use ckge_core::experiment::{
    evaluate_checkpoint, load_data, load_run_report, long_csv, render_comparison, render_single,
    run_seed_sweep, run_training, NamedReport, RunConfig, CONFIG_FILE,
};
use ckge_core::kg::{
    generate_synthetic_sequence, load_snapshot_sequence, write_snapshot_sequence, SnapshotSequence,
};
use ckge_core::{Error, Scalar};

#[derive(Parser)]
#[command(name = "ckge", version, about = "Continual knowledge-graph embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train over all snapshots and write a run directory.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset without training.
    Eval(EvalArgs),
    /// Generate a synthetic growing corpus on disk.
    GenSynthetic(GenArgs),
    /// Render finished runs into comparison tables and CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Config file; defaults apply for every key it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set epochs=50. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for --set data_dir=DIR.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Shorthand for --set output_dir=DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shorthand for --set seed=N.
    #[arg(long)]
    seed: Option<u64>,
    /// Train this many consecutive seeds and average their reports.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint file to evaluate.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset root; overrides any config lookup.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Config describing the data source (for synthetic runs).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ranking protocol.
    #[arg(long, default_value = "filtered")]
    protocol: String,
}

#[derive(Args)]
struct GenArgs {
    /// Directory to write the corpus into.
    #[arg(long)]
    out: PathBuf,
    /// Growth regime: equal, higher or lower.
    #[arg(long, default_value = "equal")]
    regime: String,
    #[arg(long, default_value_t = 3)]
    snapshots: usize,
    /// Total entities across all snapshots.
    #[arg(long, default_value_t = 500)]
    entities: usize,
    /// Total triples across all snapshots and splits.
    #[arg(long, default_value_t = 6000)]
    triples: usize,
    #[arg(long, default_value_t = 20)]
    relations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories containing metrics.json.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Also write a long-format CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::GenSynthetic(args) => cmd_gen(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn parse_overrides(args: &TrainArgs) -> Result<Vec<(String, String)>, Error> {
    let mut overrides = Vec::new();
    for pair in &args.set {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            Error::Config(format!("--set expects KEY=VALUE, got '{pair}'"))
        })?;
        overrides.push((key.trim().to_string(), value.trim().to_string()));
    }
    if let Some(data) = &args.data {
        overrides.push(("data_dir".into(), data.display().to_string()));
    }
    if let Some(out) = &args.out {
        overrides.push(("output_dir".into(), out.display().to_string()));
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    Ok(overrides)
}

fn cmd_train(args: TrainArgs) -> Result<(), Error> {
    let overrides = parse_overrides(&args)?;
    let config = match &args.config {
        Some(path) => RunConfig::load(path, &overrides)?,
        None => RunConfig::from_text("", &overrides)?,
    };
    if args.seeds > 1 {
        let sweep = run_seed_sweep::<Scalar>(&config, args.seeds)?;
        println!(
            "averaged over {} seeds into {}",
            sweep.runs.len(),
            sweep.base_dir.display()
        );
        print!("{}", render_single(&sweep.mean));
    } else {
        let outcome = run_training::<Scalar>(&config)?;
        println!("run written to {}", outcome.run_dir.display());
        print!("{}", render_single(&outcome.report));
    }
    Ok(())
}

fn eval_dataset(args: &EvalArgs) -> Result<SnapshotSequence, Error> {
    if let Some(data) = &args.data {
        let sequence = load_snapshot_sequence(data)?;
        sequence.validate().map_err(Error::Data)?;
        return Ok(sequence);
    }
    let config_path = match &args.config {
        Some(path) => path.clone(),
        None => {
            let beside = args
                .checkpoint
                .parent()
                .map(|dir| dir.join(CONFIG_FILE))
                .filter(|path| path.exists());
            beside.ok_or_else(|| {
                Error::Config(format!(
                    "no --data or --config given and no {CONFIG_FILE} found next to the checkpoint"
                ))
            })?
        }
    };
    load_data(&RunConfig::load(&config_path, &[])?)
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let protocol: Protocol = args.protocol.parse().map_err(Error::Config)?;
    let sequence = eval_dataset(&args)?;
    let report = evaluate_checkpoint(&args.checkpoint, &sequence, protocol)?;
    let run = RunReport {
        reports: vec![report],
    };
    print!("{}", render_single(&run));
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let mut spec = RunConfig::default().synthetic;
    spec.regime = args.regime.parse().map_err(Error::Config)?;
    spec.snapshots = args.snapshots;
    spec.entities = args.entities;
    spec.triples = args.triples;
    spec.relations = args.relations;
    spec.seed = args.seed;
    let sequence = generate_synthetic_sequence(&spec).map_err(Error::Data)?;
    write_snapshot_sequence(&sequence, &args.out).map_err(Error::Data)?;
    println!("corpus written to {}", args.out.display());
    for stats in sequence.stats() {
        println!(
            "snapshot {}: {} entities, {} relations, {} triples",
            stats.snapshot, stats.num_entities, stats.num_relations, stats.num_triples
        );
    }
    Ok(())
}

fn run_name(dir: &Path) -> String {
    dir.file_name()
        .map(|name| name.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

fn cmd_report(args: ReportArgs) -> Result<(), Error> {
    let mut named: Vec<NamedReport> = Vec::with_capacity(args.runs.len());
    for dir in &args.runs {
        named.push((run_name(dir), load_run_report(dir)?));
    }
    print!("{}", render_comparison(&named));
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, long_csv(&named)).map_err(|source| {
            Error::Data(DataError::Io {
                path: csv_path.clone(),
                source,
            })
        })?;
        println!("csv written to {}", csv_path.display());
    }
    Ok(())
}
