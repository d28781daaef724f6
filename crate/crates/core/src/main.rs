use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hparse_eval::dataset_tools::manifest::DatasetManifest;
use hparse_eval::dataset_tools::report::{emit_report, ReportBundle, ReportFormat};
use hparse_eval::dataset_tools::stats::scan_stats;
use hparse_eval::dataset_tools::validate::{validate_dataset, ValidateOptions};
use hparse_eval::evaluate::{run_eval, Engine, EvalConfig, Metric};
use hparse_eval::instance_metrics::{Granularity, Thresholds};
use hparse_eval::json::to_canonical_string;
use hparse_eval::maskcore::Task;
use hparse_eval::semantic_metrics::MeanPolicy;
use hparse_eval::synth::{write_fixture, PerturbationSpec, SceneSpec, RNG_NAME};
use hparse_eval::{Error, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hparse-eval", version, about = "Evaluate and inspect characterized human parsing datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions against a ground-truth manifest.
    Eval(EvalArgs),
    /// Label, pixel and people counts for a dataset.
    Stats(StatsArgs),
    /// Check ground-truth rasters against the annotation schema.
    Validate(ValidateArgs),
    /// Write a synthetic dataset with matching prediction files.
    Synth(SynthArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth manifest JSON.
    #[arg(long)]
    gt: PathBuf,
    /// Directory of `<image_id>.json` prediction files.
    #[arg(long)]
    pred: PathBuf,
    /// Label maps for mIoU and AP^cr (attribute,size,pattern,color).
    #[arg(long, value_delimiter = ',', default_value = "attribute,size,pattern,color")]
    tasks: Vec<Task>,
    /// Metrics: miou, apr, app, apcr.
    #[arg(long, value_delimiter = ',', default_value = "miou,apr,app,apcr")]
    metrics: Vec<Metric>,
    /// IoU thresholds as `lo:hi:step` or a comma list.
    #[arg(long, default_value = "0.1:0.9:0.1")]
    thresholds: Thresholds,
    /// foreground_only or with_background.
    #[arg(long, default_value = "foreground_only")]
    mean_policy: MeanPolicy,
    /// per_attribute_region or per_instance.
    #[arg(long, default_value = "per_attribute_region")]
    granularity: Granularity,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// main or naive.
    #[arg(long, default_value = "main")]
    engine: Engine,
    /// Fail instead of scoring images without predictions as empty.
    #[arg(long)]
    require_complete: bool,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the report as Markdown tables.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    gt: PathBuf,
    /// Treat warnings as errors.
    #[arg(long)]
    strict: bool,
    /// Fraction of a region that containment warnings may violate silently.
    #[arg(long, default_value_t = 0.001)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory; receives `gt/` and `pred/`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: u64,
    /// Seed of the first scene; scene `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    width: u32,
    #[arg(long, default_value_t = 64)]
    height: u32,
    /// Persons per image as `lo:hi`.
    #[arg(long, default_value = "0:5")]
    persons: String,
    /// Part stripes per person as `lo:hi`.
    #[arg(long, default_value = "1:6")]
    parts: String,
    /// Erode every predicted part by this many pixels.
    #[arg(long, default_value_t = 0)]
    erosion: u32,
    #[arg(long, default_value_t = 0.0)]
    score_noise: f64,
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    /// Relabel probability applied to all four semantic tasks.
    #[arg(long, default_value_t = 0.0)]
    relabel: f64,
}

fn range(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidConfig(format!("expected `lo:hi`, got `{s}`"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn eval(args: EvalArgs) -> Result<ExitCode> {
    let manifest = DatasetManifest::load(&args.gt)?;
    let taxonomy = manifest.load_taxonomy()?;
    let config = EvalConfig {
        tasks: args.tasks,
        metrics: args.metrics,
        thresholds: args.thresholds,
        mean_policy: args.mean_policy,
        unit_granularity: args.granularity,
        engine: args.engine,
        require_complete: args.require_complete,
        workers: args.workers,
        ..EvalConfig::default()
    };
    let report = run_eval(&manifest, &args.pred, &taxonomy, &config)?;
    emit(args.out.as_deref(), &report.to_json())?;
    if let Some(t) = &args.table {
        write(t, &emit_report(&report.bundle(), ReportFormat::Table, &taxonomy, config.mean_policy))?;
    }
    for id in &report.metadata.missing_predictions {
        eprintln!("warning: no prediction for {id}; scored as empty");
    }
    Ok(ExitCode::SUCCESS)
}

fn stats(args: StatsArgs) -> Result<ExitCode> {
    let manifest = DatasetManifest::load(&args.gt)?;
    let taxonomy = manifest.load_taxonomy()?;
    let report = scan_stats(&manifest, &taxonomy);
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    emit(args.out.as_deref(), &to_canonical_string(&report))?;
    if let Some(t) = &args.table {
        let bundle = ReportBundle {
            stats: Some(report),
            ..Default::default()
        };
        write(t, &emit_report(&bundle, ReportFormat::Table, &taxonomy, MeanPolicy::ForegroundOnly))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let manifest = DatasetManifest::load(&args.gt)?;
    let taxonomy = manifest.load_taxonomy()?;
    let options = ValidateOptions {
        strict: args.strict,
        tolerance: args.tolerance,
    };
    let report = validate_dataset(&manifest, &taxonomy, &options);
    emit(args.out.as_deref(), &to_canonical_string(&report))?;
    Ok(if report.has_errors() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

#[derive(Serialize)]
struct SynthRecord<'a> {
    generator: &'a str,
    first_seed: u64,
    count: u64,
    scene: &'a SceneSpec,
    perturbation: &'a PerturbationSpec,
}

fn synth(args: SynthArgs) -> Result<ExitCode> {
    let taxonomy = hparse_eval::taxonomy::Taxonomy::default();
    let (plo, phi) = range(&args.persons)?;
    let (klo, khi) = range(&args.parts)?;
    let scene = SceneSpec::default().with_size(args.width, args.height).with_persons(plo, phi).with_parts(klo, khi);
    let perturbation = PerturbationSpec {
        mask_erosion: args.erosion,
        score_noise: args.score_noise,
        drop_instance_prob: args.drop,
        relabel_prob: Task::SEMANTIC.iter().map(|&t| (t, args.relabel)).collect(),
        seed: args.seed,
    };
    let seeds = args.seed..args.seed + args.count;
    let fixture = write_fixture(&args.out, seeds, &scene, Some(&perturbation), &taxonomy)?;
    let record = SynthRecord {
        generator: RNG_NAME,
        first_seed: args.seed,
        count: args.count,
        scene: &scene,
        perturbation: &perturbation,
    };
    write(&args.out.join("synth.json"), &to_canonical_string(&record))?;
    println!("{}", fixture.manifest_path.display());
    println!("{}", fixture.pred_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Stats(a) => stats(a),
        Command::Validate(a) => validate(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
