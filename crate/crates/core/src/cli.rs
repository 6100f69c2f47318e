//! Command-line front end: batch post-processing, box generation and evaluation.
//!
//! Every command works on a single file or on a directory of `.png`/`.pgm`
//! label maps. Files are processed on a bounded worker pool and results are
//! merged in filename order, so outputs do not depend on scheduling.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attention::{
    attention_gate_forward, maxout_default, pscse_forward, GateParams, Linear, SqueezeParams,
    Tensor,
};
use crate::error::Error;
use crate::labelmap::{
    patchify, read_labelmap, stitch, write_labelmap, Format, LabelMap, Patch, DEFAULT_OVERLAP,
    DEFAULT_PATCH_SIZE,
};
use crate::metrics::{evaluate_with, LossConfig, MetricReport, Scores};
use crate::obb::{export_obbs, generate_obbs, import_obbs, Obb};
use crate::postprocess::postprocess;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_PAIRING: i32 = 4;

/// Environment variable holding the log filter.
pub const LOG_ENV: &str = "DENTOBOX_LOG";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invariant(String),
    #[error("unpaired files: {}", .0.join(", "))]
    Pairing(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Pairing(_) => EXIT_PAIRING,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Malformed { .. } | Error::Json(_) => {
                CliError::Io(e.to_string())
            }
            other => CliError::Invariant(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "dentobox",
    version,
    about = "Tooth label-map post-processing, oriented boxes and evaluation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Worker threads (0 = one per CPU).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_PATCH_SIZE)]
    pub patch_size: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_OVERLAP)]
    pub overlap: usize,
    #[arg(long, global = true, default_value_t = 2.0)]
    pub focal_gamma: f64,
    #[arg(long, global = true, default_value_t = 0.25)]
    pub focal_alpha: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dissolve duplicate-label regions; writes maps and JSON change logs.
    Postprocess { input: PathBuf, output: PathBuf },
    /// Generate oriented bounding boxes for every tooth.
    Obb {
        labelmap: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted maps against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Directory of predicted OBB JSON files; generated from the maps when omitted.
        #[arg(long)]
        pred_obb: Option<PathBuf>,
        /// Directory of ground-truth OBB JSON files; generated from the maps when omitted.
        #[arg(long)]
        gt_obb: Option<PathBuf>,
    },
    /// Print gate statistics of the attention blocks on a built-in fixture.
    DemoAttention,
    /// Cut a label map into overlapping patches plus a manifest.
    Patchify {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reassemble patches listed in a manifest.
    Stitch { manifest: PathBuf, output: PathBuf },
}

/// Validated settings shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub patch_size: usize,
    pub overlap: usize,
    pub loss: LossConfig,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            patch_size: DEFAULT_PATCH_SIZE,
            overlap: DEFAULT_OVERLAP,
            loss: LossConfig::default(),
            jobs: 0,
        }
    }
}

impl RunConfig {
    pub fn from_args(g: &GlobalArgs) -> CliResult<Self> {
        let cfg = RunConfig {
            patch_size: g.patch_size,
            overlap: g.overlap,
            loss: LossConfig {
                focal_gamma: g.focal_gamma,
                focal_alpha: g.focal_alpha,
                ..LossConfig::default()
            },
            jobs: g.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.loss.validate()?;
        if self.patch_size == 0 {
            return Err(CliError::Invariant("patch size must be positive".into()));
        }
        if self.overlap >= self.patch_size {
            return Err(Error::InvalidOverlap {
                overlap: self.overlap,
                patch_size: self.patch_size,
            }
            .into());
        }
        Ok(())
    }

    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Invariant(format!("thread pool: {e}")))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_args(&cli.global).and_then(|cfg| match &cli.command {
        Command::Postprocess { input, output } => cmd_postprocess(input, output, &cfg),
        Command::Obb { labelmap, out } => cmd_obb(labelmap, out, &cfg),
        Command::Eval {
            pred,
            gt,
            out,
            pred_obb,
            gt_obb,
        } => cmd_eval(
            &EvalPaths {
                pred: pred.clone(),
                gt: gt.clone(),
                out: out.clone(),
                pred_obb: pred_obb.clone(),
                gt_obb: gt_obb.clone(),
            },
            &cfg,
        ),
        Command::DemoAttention => {
            print!("{}", demo_attention());
            Ok(())
        }
        Command::Patchify { input, out } => cmd_patchify(input, out, &cfg),
        Command::Stitch { manifest, output } => cmd_stitch(manifest, output),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Label maps under `path`: the file itself, or a directory's `.png`/`.pgm`
/// files sorted by name.
pub fn list_maps(path: &Path) -> CliResult<Vec<PathBuf>> {
    let meta = std::fs::metadata(path).map_err(|e| io_err(path, e))?;
    if meta.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(|e| io_err(path, e))? {
        let p = entry.map_err(|e| io_err(path, e))?.path();
        if p.is_file() && Format::from_path(&p).is_some() {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Runs `job` over `items` on the configured pool, keeping input order and
/// surfacing the first failure in that order.
fn run_batch<T, R, F>(cfg: &RunConfig, items: &[T], job: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> CliResult<R> + Sync + Send,
{
    let results: Vec<CliResult<R>> = cfg.pool()?.install(|| items.par_iter().map(&job).collect());
    results.into_iter().collect()
}

pub fn cmd_postprocess(input: &Path, output: &Path, cfg: &RunConfig) -> CliResult<()> {
    let files = list_maps(input)?;
    let single = input.is_file();
    if !single {
        ensure_dir(output)?;
    }
    run_batch(cfg, &files, |file| {
        let map = read_labelmap(file)?;
        let result = postprocess(&map);
        let (map_path, log_path) = if single {
            let log = output.with_file_name(format!("{}.changes.json", stem(output)));
            (output.to_path_buf(), log)
        } else {
            let name = file.file_name().expect("listed files have names");
            (
                output.join(name),
                output.join(format!("{}.changes.json", stem(file))),
            )
        };
        write_labelmap(&map_path, &result.map)?;
        let mut json = serde_json::to_string_pretty(&result.changes).map_err(Error::from)?;
        json.push('\n');
        write_file(&log_path, json)?;
        log::info!(
            "{}: {} region(s) dissolved",
            file.display(),
            result.changes.len()
        );
        Ok(())
    })?;
    Ok(())
}

/// Boxes for one image: duplicate regions are dissolved first so every label
/// is a single component. Labels too small to orient are skipped and logged.
pub fn boxes_for_image(name: &str, map: &LabelMap) -> Vec<Obb> {
    let cleaned = postprocess(map).map;
    let (boxes, skipped) = generate_obbs(&cleaned);
    for (label, reason) in skipped {
        log::warn!("{name}: label {label} omitted: {reason}");
    }
    boxes
}

pub fn cmd_obb(input: &Path, out: &Path, cfg: &RunConfig) -> CliResult<()> {
    let files = list_maps(input)?;
    let single = input.is_file();
    if !single {
        ensure_dir(out)?;
    }
    run_batch(cfg, &files, |file| {
        let map = read_labelmap(file)?;
        let name = stem(file);
        let json = export_obbs(&name, &boxes_for_image(&name, &map))?;
        let path = if single {
            out.to_path_buf()
        } else {
            out.join(format!("{name}.json"))
        };
        write_file(&path, json)
    })?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EvalPaths {
    pub pred: PathBuf,
    pub gt: PathBuf,
    pub out: PathBuf,
    pub pred_obb: Option<PathBuf>,
    pub gt_obb: Option<PathBuf>,
}

struct EvalJob {
    name: String,
    pred: PathBuf,
    gt: PathBuf,
}

/// Pairs files by stem; every file must have a partner.
fn pair_files(pred: &[PathBuf], gt: &[PathBuf]) -> CliResult<Vec<EvalJob>> {
    let p: BTreeMap<String, &PathBuf> = pred.iter().map(|f| (stem(f), f)).collect();
    let g: BTreeMap<String, &PathBuf> = gt.iter().map(|f| (stem(f), f)).collect();
    let mut orphans: Vec<String> = p
        .iter()
        .filter(|(k, _)| !g.contains_key(*k))
        .chain(g.iter().filter(|(k, _)| !p.contains_key(*k)))
        .map(|(_, f)| f.display().to_string())
        .collect();
    if !orphans.is_empty() {
        orphans.sort();
        return Err(CliError::Pairing(orphans));
    }
    Ok(p.into_iter()
        .map(|(name, pred)| EvalJob {
            pred: pred.clone(),
            gt: g[&name].clone(),
            name,
        })
        .collect())
}

fn load_boxes(dir: &Option<PathBuf>, name: &str, map: &LabelMap) -> CliResult<Vec<Obb>> {
    match dir {
        None => Ok(boxes_for_image(name, map)),
        Some(dir) => {
            let path = dir.join(format!("{name}.json"));
            if !path.is_file() {
                return Err(CliError::Pairing(vec![path.display().to_string()]));
            }
            let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            Ok(import_obbs(&text)?.obbs())
        }
    }
}

/// Evaluates every pair and pools the per-image reports.
pub fn evaluate_dirs(paths: &EvalPaths, cfg: &RunConfig) -> CliResult<(usize, MetricReport)> {
    let jobs = pair_files(&list_maps(&paths.pred)?, &list_maps(&paths.gt)?)?;
    let reports = run_batch(cfg, &jobs, |job| {
        let pred = read_labelmap(&job.pred)?;
        let gt = read_labelmap(&job.gt)?;
        let pred_boxes = load_boxes(&paths.pred_obb, &job.name, &pred)?;
        let gt_boxes = load_boxes(&paths.gt_obb, &job.name, &gt)?;
        Ok(evaluate_with(
            &pred,
            &gt,
            &pred_boxes,
            &gt_boxes,
            &cfg.loss,
        )?)
    })?;
    Ok((jobs.len(), MetricReport::merge(&reports)))
}

pub fn cmd_eval(paths: &EvalPaths, cfg: &RunConfig) -> CliResult<()> {
    let (images, report) = evaluate_dirs(paths, cfg)?;
    ensure_dir(&paths.out)?;
    write_file(&paths.out.join("per_label.csv"), per_label_csv(&report)?)?;
    write_file(&paths.out.join("radar.csv"), radar_csv(&report)?)?;
    let mut summary =
        serde_json::to_string_pretty(&summarize(images, &report)).map_err(Error::from)?;
    summary.push('\n');
    write_file(&paths.out.join("summary.json"), summary)?;
    log::info!(
        "{images} image(s), fp {} fn {}",
        report.missing.fp,
        report.missing.fn_
    );
    Ok(())
}

fn pct(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

fn pct_num(v: f64) -> f64 {
    (v * 10000.0).round() / 100.0
}

fn ratio_num(v: f64) -> f64 {
    (v * 10000.0).round() / 10000.0
}

fn csv_bytes(rows: Vec<Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)
            .map_err(|e| CliError::Io(format!("csv: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(format!("csv: {e}")))
}

/// Per-label table, percentages with two decimals.
pub fn per_label_csv(report: &MetricReport) -> CliResult<Vec<u8>> {
    let mut rows = vec![[
        "label",
        "category",
        "samples",
        "precision",
        "recall",
        "dsc",
        "iou",
        "riou",
        "loss",
    ]
    .map(String::from)
    .to_vec()];
    for r in &report.per_label {
        let s = r.scores;
        rows.push(vec![
            r.label.to_string(),
            r.category.to_string(),
            r.samples.to_string(),
            pct(s.precision),
            pct(s.recall),
            pct(s.dsc),
            pct(s.iou),
            s.riou.map(pct).unwrap_or_default(),
            format!("{:.4}", r.loss),
        ]);
    }
    csv_bytes(rows)
}

/// One row per tooth label 1..=32, blank where the label never occurred.
pub fn radar_csv(report: &MetricReport) -> CliResult<Vec<u8>> {
    let mut rows = vec![vec!["label".to_string(), "dsc".into(), "riou".into()]];
    for label in 1..=32u8 {
        let row = report.label_row(label);
        rows.push(vec![
            label.to_string(),
            row.map(|r| pct(r.scores.dsc)).unwrap_or_default(),
            row.and_then(|r| r.scores.riou).map(pct).unwrap_or_default(),
        ]);
    }
    csv_bytes(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentScores {
    pub precision: f64,
    pub recall: f64,
    pub dsc: f64,
    pub iou: f64,
    pub riou: Option<f64>,
}

impl From<Scores> for PercentScores {
    fn from(s: Scores) -> Self {
        PercentScores {
            precision: pct_num(s.precision),
            recall: pct_num(s.recall),
            dsc: pct_num(s.dsc),
            iou: pct_num(s.iou),
            riou: s.riou.map(pct_num),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub category: String,
    pub labels: Vec<u8>,
    pub scores: Option<PercentScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingSummary {
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub images: usize,
    pub teeth: usize,
    pub overall: Option<PercentScores>,
    pub overall_loss: Option<f64>,
    pub categories: Vec<CategorySummary>,
    pub missing: MissingSummary,
}

pub fn summarize(images: usize, report: &MetricReport) -> EvalSummary {
    EvalSummary {
        images,
        teeth: report.observations.len(),
        overall: report.overall.map(PercentScores::from),
        overall_loss: report.overall_loss.map(ratio_num),
        categories: report
            .per_category
            .iter()
            .map(|c| CategorySummary {
                category: c.category.to_string(),
                labels: c.labels.clone(),
                scores: c.scores.map(PercentScores::from),
            })
            .collect(),
        missing: MissingSummary {
            fp: report.missing.fp,
            fn_: report.missing.fn_,
        },
    }
}

/// Patch layout written next to the patches by `patchify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchManifest {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub patch_size: usize,
    pub overlap: usize,
    pub patches: Vec<PatchEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchEntry {
    pub file: String,
    pub x: usize,
    pub y: usize,
}

pub fn cmd_patchify(input: &Path, out: &Path, cfg: &RunConfig) -> CliResult<()> {
    let format = Format::from_path(input)
        .ok_or_else(|| CliError::Io(format!("{}: unsupported extension", input.display())))?;
    let map = read_labelmap(input)?;
    let grid = patchify(map.width(), map.height(), cfg.patch_size, cfg.overlap)?;
    ensure_dir(out)?;
    let name = stem(input);
    let mut entries = Vec::with_capacity(grid.len());
    for patch in grid.cut(&map)? {
        let (x, y) = patch.origin;
        let file = format!("{name}_x{x}_y{y}.{}", format.extension());
        write_labelmap(&out.join(&file), &patch.map)?;
        entries.push(PatchEntry { file, x, y });
    }
    let manifest = PatchManifest {
        image: name.clone(),
        width: map.width(),
        height: map.height(),
        patch_size: cfg.patch_size,
        overlap: cfg.overlap,
        patches: entries,
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
    json.push('\n');
    write_file(&out.join(format!("{name}.patches.json")), json)
}

pub fn cmd_stitch(manifest_path: &Path, output: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| io_err(manifest_path, e))?;
    let manifest: PatchManifest = serde_json::from_str(&text).map_err(Error::from)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let patches = manifest
        .patches
        .iter()
        .map(|e| {
            Ok(Patch {
                origin: (e.x, e.y),
                map: read_labelmap(&dir.join(&e.file))?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let map = stitch(&patches, manifest.width, manifest.height)?;
    write_labelmap(output, &map)?;
    Ok(())
}

/// Deterministic 8-channel fixture pushed through P-scSE and the attention
/// gate; returns a small text report of the gate statistics.
pub fn demo_attention() -> String {
    let (c, h, w) = (8usize, 4usize, 4usize);
    let wave =
        |n: usize, k: f64| -> Vec<f64> { (0..n).map(|i| ((i as f64 + 1.0) * k).sin()).collect() };

    let u = Tensor::new([c, h, w], wave(c * h * w, 0.37)).expect("fixture shape");
    let hidden = c / 2;
    let squeeze = SqueezeParams::new(
        Linear::new(c, hidden, wave(c * hidden, 0.53), wave(hidden, 0.11)).expect("reduce"),
        Linear::new(hidden, c, wave(hidden * c, 0.71), wave(c, 0.23)).expect("expand"),
        Linear::new(c, 1, wave(c, 0.29), vec![0.1]).expect("spatial"),
        2,
    )
    .expect("squeeze params");
    let fused = pscse_forward(&u, &squeeze, maxout_default(c)).expect("pscse");

    let g = Tensor::new([4, h, w], wave(4 * h * w, 0.61)).expect("gating shape");
    let gate = GateParams::new(
        Linear::new(c, 4, wave(4 * c, 0.43), wave(4, 0.17)).expect("w_x"),
        Linear::new(4, 4, wave(16, 0.89), wave(4, 0.05)).expect("w_g"),
        Linear::new(4, 1, wave(4, 1.3), vec![0.0]).expect("psi"),
    )
    .expect("gate params");
    let (alpha, _) = attention_gate_forward(&fused, &g, &gate).expect("gate");

    let a = alpha.data();
    let min = a.iter().copied().fold(f64::INFINITY, f64::min);
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "input: {c}x{h}x{w}, max-out {}",
        if maxout_default(c) { "on" } else { "off" }
    );
    let _ = writeln!(s, "alpha: {} values", a.len());
    let _ = writeln!(s, "alpha min:  {min:.4}");
    let _ = writeln!(s, "alpha max:  {max:.4}");
    let _ = writeln!(s, "alpha mean: {mean:.4}");
    s
}
