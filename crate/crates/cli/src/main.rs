use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use spillsynth::change::{cd_eval, diff_otsu, DEFAULT_BINS};
use spillsynth::dataset::{
    build_dataset, build_pair, dataset_stats, read_input_list, BuildOptions, InputScene, PipelineConfig,
};
use spillsynth::io::{
    load_binary_mask, load_label_mask, load_raster_auto, save_binary_mask, save_raster, RasterFormat,
};
use spillsynth::metrics::{restoration_report, DetectorParams};
use spillsynth::seed::derive_named;
use spillsynth::Error;

#[derive(Debug, Parser)]
#[command(
    name = "spillsynth",
    version,
    about = "Synthetic pre-event SAR scenes and change-detection evaluation"
)]
struct Cli {
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize the pre-event image for one post-event scene.
    Synth(SynthArgs),
    #[command(subcommand)]
    Dataset(DatasetCommand),
    #[command(subcommand)]
    Eval(EvalCommand),
    #[command(subcommand)]
    Cd(CdCommand),
}

#[derive(Debug, Clone, Copy)]
enum SeedArg {
    Fixed(u64),
    Random,
}

impl FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "random" {
            Ok(SeedArg::Random)
        } else {
            s.parse()
                .map(SeedArg::Fixed)
                .map_err(|_| format!("{s:?} is neither an integer nor \"random\""))
        }
    }
}

impl SeedArg {
    fn resolve(self) -> u64 {
        match self {
            SeedArg::Fixed(s) => s,
            SeedArg::Random => {
                let s = rand::random();
                log::info!("drew master seed {s}");
                s
            }
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    post: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Master seed, an integer or `random`. Defaults to the config's master_seed (0).
    #[arg(long)]
    seed: Option<SeedArg>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scene id used to derive the scene seed; defaults to the post file stem.
    #[arg(long)]
    id: Option<String>,
}

#[derive(Debug, Subcommand)]
enum DatasetCommand {
    /// Build a train/test dataset from a JSON list of {id?, post, labels}.
    Build(BuildArgs),
    /// Recompute split statistics from stored labels and check them against the manifest.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
    },
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    inputs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<SeedArg>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Train fraction in (0, 1).
    #[arg(long)]
    split: Option<f64>,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Log and skip unreadable or rejected scenes instead of aborting.
    #[arg(long)]
    skip_invalid: bool,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Restoration quality of an inpainted image against the original.
    Restore(RestoreArgs),
}

#[derive(Debug, Args)]
struct RestoreArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    restored: PathBuf,
    #[arg(long)]
    omega: PathBuf,
    #[arg(long)]
    sea_roi: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = DetectorParams::default().ring_width)]
    ring_width: u32,
    /// Residual-detector regions below this many pixels are dropped (1 keeps all).
    #[arg(long, default_value_t = DetectorParams::default().min_component_area)]
    min_component_area: usize,
}

#[derive(Debug, Subcommand)]
enum CdCommand {
    /// Threshold |post − pre| at its Otsu level.
    DiffOtsu {
        #[arg(long)]
        pre: PathBuf,
        #[arg(long)]
        post: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
    },
    /// Score a predicted change mask against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Degenerate(_) => 3,
        Error::Invariant(_) => 4,
        _ => 2,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Format { .. } => "format",
        Error::Io { .. } => "io",
        Error::Codec { .. } => "codec",
        Error::Invalid(_) => "invalid",
        Error::Dimensions(_) => "dimensions",
        Error::Precondition(_) => "precondition",
        Error::Config(_) => "config",
        Error::Degenerate(_) => "degenerate",
        Error::Invariant(_) => "invariant",
        Error::Json { .. } => "json",
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message, "exit_code": code }));
    ExitCode::from(code)
}

fn load_config(path: Option<&Path>) -> spillsynth::Result<PipelineConfig> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    PipelineConfig::from_json(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> spillsynth::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

fn create_dir(path: &Path) -> spillsynth::Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

fn synth(args: SynthArgs) -> spillsynth::Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.master_seed = seed.resolve();
    }
    config.validate()?;
    let id = InputScene {
        id: args.id,
        post: args.post.clone(),
        labels: args.labels.clone(),
    }
    .resolved_id()?;
    let post = load_raster_auto(&args.post)?;
    let labels = load_label_mask(&args.labels)?;
    let scene_seed = derive_named(config.master_seed, &id);
    let pair = build_pair(&id, &post, &labels, &config, scene_seed)?;
    log::info!("{id}: {:?}", pair.timings);

    create_dir(&args.out_dir)?;
    let pre = args.out_dir.join("pre.fras");
    let gt = args.out_dir.join("change_gt.png");
    let prov = args.out_dir.join("provenance.json");
    save_raster(&pair.pre, &pre, RasterFormat::FloatRaster)?;
    save_binary_mask(&pair.change_gt, &gt)?;
    let mut record = serde_json::to_value(&pair.provenance).expect("provenance serializes");
    record["config"] = serde_json::to_value(&config).expect("config serializes");
    write_json(&prov, &record)?;
    for p in [pre, gt, prov] {
        println!("{}", p.display());
    }
    Ok(())
}

fn dataset_build(args: BuildArgs) -> spillsynth::Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.master_seed = seed.resolve();
    }
    if let Some(f) = args.split {
        config.split_fraction = f;
    }
    let inputs = read_input_list(&args.inputs)?;
    let options = BuildOptions {
        jobs: args.jobs,
        skip_invalid: args.skip_invalid,
    };
    let manifest = build_dataset(&inputs, &config, &args.out, options)?;
    log::info!(
        "{} train / {} test, {} skipped",
        manifest.stats.train.pairs,
        manifest.stats.test.pairs,
        manifest.skipped.len()
    );
    println!("{}", args.out.join(spillsynth::dataset::MANIFEST_FILE).display());
    Ok(())
}

fn eval_restore(args: RestoreArgs) -> spillsynth::Result<()> {
    let original = load_raster_auto(&args.original)?;
    let restored = load_raster_auto(&args.restored)?;
    let omega = load_binary_mask(&args.omega)?;
    let sea = load_binary_mask(&args.sea_roi)?;
    let detector = DetectorParams {
        ring_width: args.ring_width,
        min_component_area: args.min_component_area,
    };
    let (a, b) = restoration_report(&original, &restored, &omega, &sea, &detector)?;
    write_json(
        &args.report,
        &json!({ "version": 1, "detector": detector, "original": a, "restored": b }),
    )?;
    println!("{}", args.report.display());
    Ok(())
}

fn run(cli: Cli) -> spillsynth::Result<()> {
    match cli.command {
        Command::Synth(args) => synth(args),
        Command::Dataset(DatasetCommand::Build(args)) => dataset_build(args),
        Command::Dataset(DatasetCommand::Stats { dataset }) => {
            let stats = dataset_stats(&dataset)?;
            println!("{}", serde_json::to_string(&stats).expect("stats serialize"));
            Ok(())
        }
        Command::Eval(EvalCommand::Restore(args)) => eval_restore(args),
        Command::Cd(CdCommand::DiffOtsu { pre, post, out, bins }) => {
            let mask = diff_otsu(&load_raster_auto(&pre)?, &load_raster_auto(&post)?, bins)?;
            save_binary_mask(&mask, &out)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Cd(CdCommand::Eval { pred, gt, report }) => {
            let r = cd_eval(&load_binary_mask(&pred)?, &load_binary_mask(&gt)?)?;
            let mut v: Value = serde_json::to_value(&r).expect("report serializes");
            v["version"] = json!(1);
            write_json(&report, &v)?;
            println!("{}", report.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            return fail("usage", first.trim_start_matches("error: "), 2);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(kind(&e), &e.to_string(), exit_code(&e)),
    }
}
