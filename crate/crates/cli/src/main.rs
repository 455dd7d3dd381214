use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vrubench::annotation::{
    convert_dataset, dataset_stats, ClassMap, ConvertOptions, DatasetManifest,
};
use vrubench::benchmark::{
    compare_models, continual_scenario, load_run_records, CompareOptions, Metric, ModelRunRecord,
    RunRecordFile, ScenarioOptions, DEFAULT_EPSILON, DEFAULT_FRAMES,
};
use vrubench::metrics::{evaluate, EvalConfig};
use vrubench::table::{OutputFormat, Table};

const FORMATS_HELP: &str = "\
File formats:
  VisDrone annotation   left,top,width,height,score,category,truncation,occlusion (integers)
  dimension index       image_id width height   (one line per image)
  YOLO label            class cx cy w h          (normalized, one object per line)
  ignore sidecar        cx cy w h                (normalized, class-agnostic)
  prediction            class confidence cx cy w h, one file per image: <dir>/<image_id>.txt
  class map             TOML: names = [...], ignore = [...], drop = [...], [[mapping]] source/target
  run records           TOML: [[run]] name, precision, recall, f1, map50, fps, inference_ms, ...

Exit status: 0 success, 1 usage error, 2 data or contract error.";

#[derive(Debug, Parser)]
#[command(name = "vrubench", version, about = "Detection evaluation and benchmarking for vulnerable road users", after_help = FORMATS_HELP)]
struct Cli {
    /// Output format: aligned, csv, markdown or structured (JSON).
    #[arg(long, global = true, default_value = "aligned")]
    format: OutputFormat,

    /// Suppress warnings on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a VisDrone-layout split to YOLO layout.
    #[command(
        after_help = "Source layout: <src>/images/<id>.<ext>, <src>/annotations/<id>.txt, <src>/dims.txt.\n\
Output: <out>/images/<split>/, <out>/labels/<split>/<id>.txt (+ .ignore sidecars), <out>/data.yaml, <out>/<split>.manifest.json.\n\n\
The default class map keeps VisDrone categories 1,2,3,7 as pedestrian, people, bicycle, tricycle, \
treats 0 as ignore regions and drops the rest."
    )]
    Convert(ConvertArgs),
    /// Per-class image and instance counts for a converted split.
    Stats(StatsArgs),
    /// Evaluate predictions against a converted split.
    #[command(
        after_help = "Precision, recall and F1 count only detections at or above --conf; \
AP uses every detection (all-point interpolation). mAP averages classes that have ground truth. \
The all-classes row pools TP/FP/FN across classes."
    )]
    Eval(EvalArgs),
    /// Compare run records against a baseline, or analyse a continual-learning scenario.
    #[command(after_help = "Improvements are relative: 100 * (new - base) / base.\n\
Scenario mode orders runs as: prior task, scratch on new task, then sequential runs.")]
    Compare(CompareArgs),
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be non-negative"))
    }
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// VisDrone-layout source root.
    #[arg(long)]
    src: PathBuf,
    /// YOLO-layout output root.
    #[arg(long)]
    out: PathBuf,
    /// Class map TOML; defaults to the four-class VisDrone map.
    #[arg(long)]
    classmap: Option<PathBuf>,
    /// Split name (train, val or test).
    #[arg(long, default_value = "val")]
    split: String,
    /// Dimension index; defaults to <src>/dims.txt.
    #[arg(long)]
    dims: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Do not copy image files into the output layout.
    #[arg(long)]
    no_copy_images: bool,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Manifest written by `convert`.
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory of per-image prediction files.
    #[arg(long)]
    detections: PathBuf,
    /// IoU threshold for a match.
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    iou: f64,
    /// Confidence threshold for precision, recall and F1.
    #[arg(long, default_value_t = 0.2, value_parser = unit_interval)]
    conf: f64,
    /// Also write the report to this file, in the selected format.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Append the result as a run record to this TOML file.
    #[arg(long, requires = "run_name")]
    run_record: Option<PathBuf>,
    /// Run name for --run-record.
    #[arg(long)]
    run_name: Option<String>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Run-record TOML files.
    #[arg(required = true)]
    records: Vec<PathBuf>,
    /// Baseline run name (required unless --scenario).
    #[arg(long, required_unless_present = "scenario")]
    baseline: Option<String>,
    /// Continual-learning scenario mode.
    #[arg(long)]
    scenario: bool,
    /// Forgetting-flag threshold, absolute metric units.
    #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = non_negative)]
    epsilon: f64,
    /// Metric checked for the forgetting flag (repeatable).
    #[arg(long = "flag-metric", default_values_t = [Metric::Map50])]
    flag_metrics: Vec<Metric>,
    /// Frames per computational-time budget.
    #[arg(long, default_value_t = DEFAULT_FRAMES, value_parser = positive)]
    frames: f64,
    /// Ranking metric.
    #[arg(long, default_value_t = Metric::Map50)]
    sort_by: Metric,
}

struct Ctx {
    format: OutputFormat,
    quiet: bool,
}

impl Ctx {
    fn warn(&self, msg: &str) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn render_table(
    table: &Table,
    structured: impl FnOnce() -> String,
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Structured => structured(),
        f => table.render(f),
    }
}

fn cmd_convert(ctx: &Ctx, args: ConvertArgs) -> Result<()> {
    let map = match &args.classmap {
        Some(p) => ClassMap::load(p)?,
        None => ClassMap::visdrone_vru(),
    };
    let images = args.src.join("images");
    let has_images = std::fs::read_dir(&images)
        .map(|mut d| d.any(|e| e.map(|e| e.path().is_file()).unwrap_or(false)))
        .unwrap_or(false);
    if !has_images {
        bail!("no images found in {}", images.display());
    }
    let opts = ConvertOptions {
        split: args.split,
        dims_index: args.dims,
        threads: args.threads,
        copy_images: !args.no_copy_images,
    };
    let conv = convert_dataset(&args.src, &map, &args.out, &opts)?;
    for w in &conv.warnings {
        ctx.warn(w);
    }
    let stats = dataset_stats(&conv.manifest)?;
    let mut table = Table::new(["Split", "Images", "Instances", "Warnings", "Manifest"]);
    table.push_row([
        conv.manifest.split.clone(),
        conv.manifest.images.len().to_string(),
        stats.total_instances.to_string(),
        conv.warnings.len().to_string(),
        conv.manifest_path.display().to_string(),
    ]);
    emit(&render_table(
        &table,
        || conv.manifest.to_json(),
        ctx.format,
    ))
}

fn cmd_stats(ctx: &Ctx, args: StatsArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let stats = dataset_stats(&manifest)?;
    let mut table = Table::new(["Class", "Images", "Instances"]);
    table.push_row([
        "all".to_string(),
        stats.total_images.to_string(),
        stats.total_instances.to_string(),
    ]);
    for c in &stats.per_class {
        table.push_row([
            c.name.clone(),
            c.images.to_string(),
            c.instances.to_string(),
        ]);
    }
    emit(&render_table(&table, || stats.to_json(), ctx.format))
}

fn cmd_eval(ctx: &Ctx, args: EvalArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let config = EvalConfig {
        iou_thresh: args.iou,
        conf_thresh: args.conf,
    };
    let report = evaluate(&manifest, &args.detections, config)?;
    for name in &report.excluded_from_map {
        ctx.warn(&format!(
            "class {name} has no ground truth and is left out of mAP"
        ));
    }
    let text = render_table(&report.to_table(), || report.to_json(), ctx.format);
    if let Some(path) = &args.output {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let (Some(path), Some(name)) = (&args.run_record, &args.run_name) {
        append_run_record(path, ModelRunRecord::from_eval_report(name, &report))?;
    }
    emit(&text)
}

fn append_run_record(path: &Path, rec: ModelRunRecord) -> Result<()> {
    let mut file = if path.exists() {
        RunRecordFile::load(path)?
    } else {
        RunRecordFile {
            run: Vec::new(),
            extra: Default::default(),
        }
    };
    file.run.retain(|r| r.name != rec.name);
    file.run.push(rec);
    file.save(path)?;
    Ok(())
}

fn cmd_compare(ctx: &Ctx, args: CompareArgs) -> Result<()> {
    let runs = load_run_records(&args.records)?;
    let (text, discrepancies) = if args.scenario {
        let opts = ScenarioOptions {
            epsilon: args.epsilon,
            flag_metrics: args.flag_metrics,
        };
        let report = continual_scenario(&runs, &opts)?;
        (report.render(ctx.format), report.discrepancies.len())
    } else {
        let baseline = args.baseline.expect("clap enforces --baseline");
        let opts = CompareOptions {
            frames: args.frames,
            sort_by: args.sort_by,
        };
        let report = compare_models(&runs, &baseline, opts)?;
        (report.render(ctx.format), report.discrepancies.len())
    };
    if discrepancies > 0 {
        ctx.warn(&format!(
            "{discrepancies} reported value(s) disagree with their own formulas; see the report"
        ));
    }
    emit(&text)
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        format: cli.format,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Convert(a) => cmd_convert(&ctx, a),
        Command::Stats(a) => cmd_stats(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Compare(a) => cmd_compare(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
