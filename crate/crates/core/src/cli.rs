//! Command-line surface: `annotate`, `evaluate`, `convert` and `split`.
//!
//! Results go to stdout as JSON, logs to stderr. Exit codes: 0 success,
//! 1 data error, 2 usage error.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::annotations::{
    convert, load_dataset, write_files, AnnotationFormat, ClassMap, DimsSource, LoadOptions,
};
use crate::detector::{
    detect_batch, parse_detections, BackgroundModel, Connectivity, DetectionSet, Rgb,
};
use crate::error::Error;
use crate::evaluation::{annotations_as_predictions, categorize_dataset, evaluate, EvalConfig};
use crate::geometry::{ImageDims, PostProcessConfig};
use crate::pipeline::{
    load_ppm_dir, run_batch, split_dataset, write_split_lists, AnnotateConfig, SplitConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "autobox",
    version,
    about = "Automatic bounding-box annotation for single objects on homogeneous backgrounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn detections (or baseline detections on PPM images) into annotation files
    Annotate(AnnotateArgs),
    /// Score predictions against ground truth
    Evaluate(EvaluateArgs),
    /// Convert an annotation dataset between formats
    Convert(ConvertArgs),
    /// Write a seeded train/val split as train.txt and val.txt
    Split(SplitArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["detections", "baseline"])))]
pub struct AnnotateArgs {
    /// Detection stream (JSON Lines, schema version 1)
    #[arg(long, value_name = "FILE", conflicts_with = "images")]
    pub detections: Option<PathBuf>,
    /// Use the built-in colour-threshold detector on --images
    #[arg(long, requires = "images")]
    pub baseline: bool,
    /// Directory of PPM images for --baseline
    #[arg(long, value_name = "DIR")]
    pub images: Option<PathBuf>,
    /// Class name written into every annotation
    #[arg(long, value_name = "NAME")]
    pub label: String,
    /// Merge all surviving boxes into their enclosing box (on by default)
    #[arg(long, overrides_with = "no_merge")]
    pub merge: bool,
    /// Keep only the highest-scoring box instead of merging
    #[arg(long)]
    pub no_merge: bool,
    /// Pixels added on each side of the final box
    #[arg(long, value_name = "N", default_value_t = 0.0, value_parser = non_negative)]
    pub slack: f64,
    /// Detections scoring below this are discarded
    #[arg(long, value_name = "T", default_value_t = AnnotateConfig::DEFAULT_SCORE_THRESHOLD, value_parser = unit_interval)]
    pub score_threshold: f64,
    /// Output annotation format
    #[arg(long, value_enum, default_value_t = AnnotationFormat::Voc)]
    pub format: AnnotationFormat,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Background reference colour for --baseline
    #[arg(long, value_name = "RRGGBB", default_value = "FFFFFF", value_parser = parse_rgb)]
    pub bg_color: Rgb,
    /// Euclidean RGB distance above which a pixel is foreground
    #[arg(long, value_name = "T", default_value_t = BackgroundModel::DEFAULT_TOLERANCE, value_parser = non_negative)]
    pub tolerance: f64,
    /// Smallest connected component kept, in pixels
    #[arg(long, value_name = "A", default_value_t = BackgroundModel::DEFAULT_MIN_AREA, value_parser = positive_usize)]
    pub min_area: usize,
    /// Pixel connectivity for components
    #[arg(long, value_name = "4|8", default_value_t = 8, value_parser = parse_connectivity)]
    pub connectivity: u8,
    /// Estimate each image's background from a border this many pixels wide
    #[arg(long, value_name = "BORDER", value_parser = clap::value_parser!(u32).range(1..))]
    pub auto_bg: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions: an annotation directory/file in --format, or a .jsonl detection stream
    #[arg(long, value_name = "PATH")]
    pub pred: PathBuf,
    /// Ground-truth annotation directory/file in --format
    #[arg(long, value_name = "PATH")]
    pub gt: PathBuf,
    /// Annotation format of --gt
    #[arg(long, value_enum, default_value_t = AnnotationFormat::Voc)]
    pub format: AnnotationFormat,
    /// Annotation format of --pred when it is not a .jsonl stream (default: --format)
    #[arg(long, value_enum)]
    pub pred_format: Option<AnnotationFormat>,
    #[command(flatten)]
    pub yolo: YoloInputArgs,
    /// IoU needed for a match
    #[arg(long, value_name = "T", default_value_t = 0.5)]
    pub iou: f64,
    /// IoU at which a box counts as touching the object (taxonomy)
    #[arg(long, value_name = "T", default_value_t = 0.1)]
    pub hit_iou: f64,
    /// Area ratio marking a box as oversize (taxonomy)
    #[arg(long, value_name = "F", default_value_t = 2.0)]
    pub oversize: f64,
    /// Operating score for precision, recall and the taxonomy
    #[arg(long, value_name = "T", default_value_t = 0.0, value_parser = unit_interval)]
    pub score_threshold: f64,
    /// Add the per-image category block
    #[arg(long)]
    pub categorize: bool,
    /// Treat ground-truth images without predictions as having none
    #[arg(long)]
    pub missing_as_empty: bool,
    /// Also write the report to this file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct YoloInputArgs {
    /// classes.txt for YOLO input (default: the one inside the YOLO directory)
    #[arg(long, value_name = "FILE")]
    pub classes: Option<PathBuf>,
    /// Image size for YOLO input, as WIDTHxHEIGHT
    #[arg(long, value_name = "WxH", value_parser = parse_dims, conflicts_with = "image_dir")]
    pub dims: Option<ImageDims>,
    /// Directory of <id>.ppm images giving per-image sizes for YOLO input
    #[arg(long = "image-dir", value_name = "DIR")]
    pub image_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Input directory (VOC, YOLO) or file/directory (COCO)
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub from: AnnotationFormat,
    #[arg(long, value_enum)]
    pub to: AnnotationFormat,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub yolo: YoloInputArgs,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("id_source").required(true).args(["ids", "dir"])))]
pub struct SplitArgs {
    /// File with one image id per line
    #[arg(long, value_name = "FILE")]
    pub ids: Option<PathBuf>,
    /// Directory whose file stems are the image ids
    #[arg(long, value_name = "DIR")]
    pub dir: Option<PathBuf>,
    /// Training fraction, strictly between 0 and 1
    #[arg(long, value_name = "F", default_value_t = SplitConfig::DEFAULT_TRAIN_FRACTION, value_parser = open_unit_interval)]
    pub ratio: f64,
    /// Shuffle seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving train.txt and val.txt
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    /// Flag combination or value rejected after parsing (exit 2).
    Usage(String),
    /// Input data problem (exit 1).
    Data(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }

    /// One-line JSON error for stderr.
    pub fn to_line(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Data(e) => (e.kind(), e.to_string()),
        };
        json!({ "error": kind, "message": message.replace('\n', " ") }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

pub fn run(cli: Cli) -> Result<Value, CliError> {
    match cli.command {
        Command::Annotate(a) => cmd_annotate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Split(a) => cmd_split(a),
    }
}

pub fn cmd_annotate(args: AnnotateArgs) -> Result<Value, CliError> {
    let post = PostProcessConfig::new(!args.no_merge, args.slack, true).map_err(usage)?;
    let cfg =
        AnnotateConfig::new(&args.label, args.score_threshold, post, args.format).map_err(usage)?;

    let sets = if let Some(path) = &args.detections {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_detections(&text)?
    } else {
        let dir = args
            .images
            .as_ref()
            .ok_or_else(|| CliError::Usage("--baseline requires --images".into()))?;
        let model = BackgroundModel::new(
            args.bg_color,
            args.tolerance,
            args.min_area,
            Connectivity::try_from(args.connectivity).map_err(usage)?,
        )
        .map_err(usage)?;
        let images = load_ppm_dir(dir)?;
        detect_batch(&images, &model, args.auto_bg)?
    };

    let summary = run_batch(&sets, &cfg, &args.out)?;
    Ok(serde_json::to_value(summary).unwrap_or(Value::Null))
}

pub fn cmd_evaluate(args: EvaluateArgs) -> Result<Value, CliError> {
    let cfg = EvalConfig::new(args.iou, args.oversize, args.hit_iou, args.score_threshold)
        .map_err(usage)?;
    let opts = load_options(&args.yolo)?;
    let gt = load_dataset(&args.gt, args.format, &opts)?.images;

    let is_stream = args.pred.is_file() && args.pred.extension().is_some_and(|e| e == "jsonl");
    let mut preds: Vec<DetectionSet> = if is_stream {
        let text = fs::read_to_string(&args.pred).map_err(|e| Error::io(&args.pred, e))?;
        parse_detections(&text)?
    } else {
        let format = args.pred_format.unwrap_or(args.format);
        annotations_as_predictions(&load_dataset(&args.pred, format, &opts)?.images)
    };
    if args.missing_as_empty {
        let present: HashSet<String> = preds.iter().map(|p| p.image_id.clone()).collect();
        for a in gt.iter().filter(|a| !present.contains(&a.image_id)) {
            preds.push(DetectionSet {
                image_id: a.image_id.clone(),
                dims: a.dims,
                detections: Vec::new(),
            });
        }
    }

    let mut report = evaluate(&preds, &gt, &cfg)?;
    if args.categorize {
        report.categories = Some(categorize_dataset(&preds, &gt, &cfg)?);
    }
    let value = serde_json::to_value(&report).unwrap_or(Value::Null);
    if let Some(out) = &args.out {
        let body = serde_json::to_string_pretty(&value).unwrap_or_default() + "\n";
        fs::write(out, body).map_err(|e| Error::io(out, e))?;
    }
    Ok(value)
}

pub fn cmd_convert(args: ConvertArgs) -> Result<Value, CliError> {
    let opts = load_options(&args.yolo)?;
    let files = convert(&args.input, args.from, args.to, &opts)?;
    write_files(&args.out, &files)?;
    Ok(json!({ "files": files.len() }))
}

pub fn cmd_split(args: SplitArgs) -> Result<Value, CliError> {
    let cfg = SplitConfig::new(args.ratio, args.seed).map_err(usage)?;
    let ids = match (&args.ids, &args.dir) {
        (Some(file), _) => {
            let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect()
        }
        (None, Some(dir)) => stems_in(dir)?,
        (None, None) => return Err(CliError::Usage("one of --ids or --dir is required".into())),
    };
    let (train, val) = split_dataset(&ids, &cfg)?;
    write_split_lists(&args.out, &train, &val)?;
    Ok(json!({ "train": train.len(), "val": val.len(), "seed": args.seed }))
}

fn load_options(args: &YoloInputArgs) -> Result<LoadOptions, CliError> {
    let classes = match &args.classes {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Some(ClassMap::parse_names_file(&text)?)
        }
        None => None,
    };
    let dims = match (&args.dims, &args.image_dir) {
        (Some(d), _) => Some(DimsSource::Uniform(*d)),
        (None, Some(dir)) => Some(DimsSource::ImageDir(dir.clone())),
        (None, None) => None,
    };
    Ok(LoadOptions { dims, classes })
}

fn stems_in(dir: &Path) -> Result<Vec<String>, Error> {
    let mut stems = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() {
            if let Some(s) = path.file_stem() {
                stems.push(s.to_string_lossy().into_owned());
            }
        }
    }
    stems.sort();
    stems.dedup();
    Ok(stems)
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn non_negative(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| {
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(format!("{v} must be >= 0"))
        }
    })
}

fn unit_interval(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| {
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(format!("{v} must lie in [0, 1]"))
        }
    })
}

fn open_unit_interval(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| {
        if v > 0.0 && v < 1.0 {
            Ok(v)
        } else {
            Err(format!("{v} must lie strictly between 0 and 1"))
        }
    })
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("`{s}` must be a whole number >= 1")),
    }
}

fn parse_connectivity(s: &str) -> Result<u8, String> {
    match s {
        "4" => Ok(4),
        "8" => Ok(8),
        _ => Err(format!("connectivity must be 4 or 8, got `{s}`")),
    }
}

fn parse_rgb(s: &str) -> Result<Rgb, String> {
    s.parse::<Rgb>().map_err(|e| e.to_string())
}

fn parse_dims(s: &str) -> Result<ImageDims, String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not WIDTHxHEIGHT"))?;
    let w: u32 = w
        .trim()
        .parse()
        .map_err(|_| format!("bad width in `{s}`"))?;
    let h: u32 = h
        .trim()
        .parse()
        .map_err(|_| format!("bad height in `{s}`"))?;
    ImageDims::new(w, h).map_err(|e| e.to_string())
}
