//! Command-line driver: synthesis, feature extraction, information-based
//! feature assessment, classifier training and ROC evaluation.

mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coughdet_core::error::Error as CoreError;
use coughdet_core::eval::{cross_validate, sweep_roc_weighted, EvalConfig, RocCurve};
use coughdet_core::features::{extract_feature_matrix, FeatureMatrix};
use coughdet_core::info::{build_report, select_features};
use coughdet_core::labels::parse_labels;
use coughdet_core::signal::resample_to_16k;
use coughdet_core::synth::{synth_dataset, SynthSpec};
use coughdet_core::wav;

use config::{Classifier, RunConfig};
use manifest::Manifest;

#[derive(Parser)]
#[command(
    name = "coughdet",
    version,
    about = "Frame-level audio cough/event detection: features, mutual-information selection, GMM/MLP/SVM classifiers, ROC evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by train, eval and run; every value falls back to the
/// config file and then to the built-in defaults.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of features kept by greedy selection (105 = all)
    #[arg(long = "features-k")]
    features_k: Option<usize>,
    #[arg(long)]
    classifier: Option<Classifier>,
    #[arg(long)]
    gaussians: Option<usize>,
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long)]
    cbox: Option<f64>,
    /// Gaussian kernel width (default: 1 / n_features)
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long = "w-tpr")]
    w_tpr: Option<f64>,
    #[arg(long = "w-fpr")]
    w_fpr: Option<f64>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Data(format!("cannot read config {}: {e}", path.display()))
                })?;
                RunConfig::from_text(&text).map_err(CliError::Usage)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.features_k {
            config.selection_k = v;
        }
        if let Some(v) = self.classifier {
            config.classifier = v;
        }
        if let Some(v) = self.gaussians {
            config.gaussians = v;
        }
        if let Some(v) = self.neurons {
            config.neurons = v;
        }
        if let Some(v) = self.cbox {
            config.cbox = v;
        }
        if let Some(v) = self.gamma {
            config.gamma = Some(v);
        }
        if let Some(v) = self.folds {
            config.folds = v;
        }
        if let Some(v) = self.bins {
            config.bins = v;
        }
        if let Some(v) = self.w_tpr {
            config.w_tpr = v;
        }
        if let Some(v) = self.w_fpr {
            config.w_fpr = v;
        }
        config.validate().map_err(CliError::Usage)?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled recording (WAV plus label track)
    Synth {
        /// Output path prefix; writes <out>.wav and <out>.labels
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60.0)]
        duration: f64,
        #[arg(long = "coughs-per-min", default_value_t = 25.0)]
        coughs_per_min: f64,
        #[arg(long = "distractors-per-min", default_value_t = 48.0)]
        distractors_per_min: f64,
        #[arg(long = "noise-db", default_value_t = -33.0)]
        noise_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Extract the 105-column labeled feature matrix from one recording
    Extract {
        wav: PathBuf,
        labels: PathBuf,
        /// Output path prefix; writes <out>.fmx and <out>.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise mutual-information report over every feature column
    Rank {
        matrix: PathBuf,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Output path prefix; writes <out>.csv and <out>.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Greedy forward feature selection with its information report
    Select {
        matrix: PathBuf,
        #[arg(long = "features-k")]
        features_k: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Output path prefix; writes <out>.json and <out>.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one classifier on a full matrix and save the model JSON
    Train {
        matrix: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Model output path
        #[arg(long)]
        out: PathBuf,
    },
    /// k-fold cross-validation with per-fold selection and pooled ROC
    Eval {
        matrix: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory; writes roc.csv, roc.svg and metrics.json
        #[arg(long)]
        out: PathBuf,
    },
    /// ROC curve and revised error rate from a score,label CSV
    Roc {
        scores: PathBuf,
        #[arg(long = "w-tpr", default_value_t = 1.0)]
        w_tpr: f64,
        #[arg(long = "w-fpr", default_value_t = 1.0)]
        w_fpr: f64,
        /// Output path prefix; writes <out>.csv, <out>.svg and <out>.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: ingest, extract, rank, select, train, eval
    Run {
        /// Input WAV recordings
        #[arg(required = true)]
        wavs: Vec<PathBuf>,
        /// Label files matching the WAVs by position
        /// (default: the WAV path with a .labels extension)
        #[arg(long)]
        labels: Vec<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        /// Keep each recording's frames inside a single fold
        #[arg(long = "group-by-recording", default_value_t = false)]
        group_by_recording: bool,
        /// Run directory
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match &err {
            CoreError::Numeric(_) => CliError::Numeric(err.to_string()),
            CoreError::ParamOutOfRange { .. } => CliError::Usage(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

fn data_err(context: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{context}: {err}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth {
            out,
            duration,
            coughs_per_min,
            distractors_per_min,
            noise_db,
            seed,
        } => cmd_synth(
            &out,
            SynthSpec {
                duration,
                coughs_per_minute: coughs_per_min,
                distractors_per_minute: distractors_per_min,
                noise_db,
                seed,
            },
        ),
        Command::Extract { wav, labels, out } => cmd_extract(&wav, &labels, &out),
        Command::Rank { matrix, bins, out } => cmd_rank(&matrix, bins, &out),
        Command::Select {
            matrix,
            features_k,
            bins,
            out,
        } => cmd_select(&matrix, features_k, bins, &out),
        Command::Train {
            matrix,
            overrides,
            out,
        } => cmd_train(&matrix, &overrides.resolve()?, &out),
        Command::Eval {
            matrix,
            overrides,
            out,
        } => cmd_eval(&matrix, &overrides.resolve()?, &out),
        Command::Roc {
            scores,
            w_tpr,
            w_fpr,
            out,
        } => cmd_roc(&scores, w_tpr, w_fpr, &out),
        Command::Run {
            wavs,
            labels,
            overrides,
            group_by_recording,
            out,
        } => cmd_run(&wavs, &labels, &overrides.resolve()?, group_by_recording, &out),
    }
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut path = prefix.as_os_str().to_owned();
    path.push(".");
    path.push(ext);
    PathBuf::from(path)
}

fn cmd_synth(out: &Path, spec: SynthSpec) -> Result<(), CliError> {
    let (audio, track) = synth_dataset(&spec)?;
    let wav_path = with_extension(out, "wav");
    let labels_path = with_extension(out, "labels");
    wav::write(&wav_path, &audio)?;
    std::fs::write(&labels_path, track.to_text())
        .map_err(|e| data_err("writing labels", e))?;
    println!(
        "wrote {} ({:.1} s) and {} ({} cough segments, {:.2} s coughing)",
        wav_path.display(),
        audio.duration(),
        labels_path.display(),
        track.segments.len(),
        track.total_cough_seconds()
    );
    Ok(())
}

fn load_recording(wav_path: &Path, labels_path: &Path) -> Result<FeatureMatrix, CliError> {
    let raw = wav::read(wav_path)
        .map_err(|e| data_err(&format!("reading {}", wav_path.display()), e))?;
    let audio = resample_to_16k(&raw)?;
    let label_text = std::fs::read_to_string(labels_path)
        .map_err(|e| data_err(&format!("reading {}", labels_path.display()), e))?;
    let track = parse_labels(&label_text)?;
    Ok(extract_feature_matrix(&audio, &track)?)
}

fn cmd_extract(wav_path: &Path, labels_path: &Path, out: &Path) -> Result<(), CliError> {
    let matrix = load_recording(wav_path, labels_path)?;
    let fmx = with_extension(out, "fmx");
    let csv = with_extension(out, "csv");
    matrix.write_fmx(&fmx)?;
    std::fs::write(&csv, matrix.to_csv()).map_err(|e| data_err("writing CSV", e))?;
    let positives = matrix.labels().iter().filter(|&&l| l != 0).count();
    println!(
        "wrote {} and {}: {} frames x {} features, {} cough frames",
        fmx.display(),
        csv.display(),
        matrix.nrows(),
        matrix.ncols(),
        positives
    );
    Ok(())
}

fn read_matrix(path: &Path) -> Result<FeatureMatrix, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| data_err(&format!("reading {}", path.display()), e))?;
    if bytes.starts_with(b"FMX1") {
        Ok(FeatureMatrix::from_fmx(&bytes)?)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|e| data_err(&format!("{} is neither FMX1 nor CSV", path.display()), e))?;
        Ok(FeatureMatrix::from_csv(&text)?)
    }
}

fn cmd_rank(matrix_path: &Path, bins: usize, out: &Path) -> Result<(), CliError> {
    let matrix = read_matrix(matrix_path)?;
    let report = build_report(&matrix, matrix.names(), bins)?;
    let csv = with_extension(out, "csv");
    let json = with_extension(out, "json");
    std::fs::write(&csv, report.to_csv()).map_err(|e| data_err("writing report CSV", e))?;
    std::fs::write(&json, report.to_json()).map_err(|e| data_err("writing report JSON", e))?;
    let mut ranked: Vec<(usize, f64)> = report.intrinsic.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("top features by relative intrinsic information (% of H(C)):");
    for (idx, value) in ranked.iter().take(10) {
        println!("  {:<22} {value:5.1}", report.features[*idx]);
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn cmd_select(matrix_path: &Path, k: usize, bins: usize, out: &Path) -> Result<(), CliError> {
    let matrix = read_matrix(matrix_path)?;
    let selection = select_features(&matrix, k, bins)?;
    let json = with_extension(out, "json");
    let csv = with_extension(out, "csv");
    std::fs::write(&json, selection.to_json()).map_err(|e| data_err("writing selection", e))?;
    std::fs::write(&csv, selection.report.to_csv())
        .map_err(|e| data_err("writing selection CSV", e))?;
    println!("selected {} features (rank order):", selection.order.len());
    for (name, score) in selection.order.iter().zip(&selection.scores) {
        println!("  {name:<22} {score:+.4} bits");
    }
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

/// Restrict a matrix to the k greedily selected columns, keeping registry
/// order; k covering every column is a no-op.
fn apply_selection(
    matrix: &FeatureMatrix,
    k: usize,
    bins: usize,
) -> Result<(FeatureMatrix, Vec<String>), CliError> {
    if k >= matrix.ncols() {
        return Ok((matrix.clone(), Vec::new()));
    }
    let selection = select_features(matrix, k, bins)?;
    let mut cols = selection.indices.clone();
    cols.sort_unstable();
    Ok((matrix.select_columns(&cols), selection.order))
}

fn cmd_train(matrix_path: &Path, config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let matrix = read_matrix(matrix_path)?;
    let (train_view, _) = apply_selection(&matrix, config.selection_k, config.bins)?;
    let model = config.classifier_spec().train(&train_view, config.seed)?;
    model.write_json(out)?;
    println!(
        "trained {} model on {} frames x {} features -> {}",
        model.kind_name(),
        train_view.nrows(),
        train_view.ncols(),
        out.display()
    );
    Ok(())
}

fn write_eval_outputs(
    dir: &Path,
    curve: &RocCurve,
    metrics_json: &str,
) -> Result<[PathBuf; 3], CliError> {
    std::fs::create_dir_all(dir).map_err(|e| data_err("creating output directory", e))?;
    let roc_csv = dir.join("roc.csv");
    let roc_svg = dir.join("roc.svg");
    let metrics = dir.join("metrics.json");
    std::fs::write(&roc_csv, curve.to_csv()).map_err(|e| data_err("writing roc.csv", e))?;
    std::fs::write(&roc_svg, curve.to_svg()).map_err(|e| data_err("writing roc.svg", e))?;
    std::fs::write(&metrics, metrics_json).map_err(|e| data_err("writing metrics.json", e))?;
    Ok([roc_csv, roc_svg, metrics])
}

fn eval_config(config: &RunConfig, groups: Option<Vec<usize>>) -> EvalConfig {
    EvalConfig {
        folds: config.folds,
        bins: config.bins,
        selection_k: Some(config.selection_k),
        seed: config.seed,
        w_tpr: config.w_tpr,
        w_fpr: config.w_fpr,
        groups,
    }
}

fn cmd_eval(matrix_path: &Path, config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let matrix = read_matrix(matrix_path)?;
    let cv = cross_validate(&matrix, &config.classifier_spec(), &eval_config(config, None))?;
    write_eval_outputs(out, &cv.curve, &cv.metrics_json())?;
    println!(
        "{} {}-fold CV: RER {:.4} at threshold {:.4} (TPR {:.4}, FPR {:.4}), AUC {:.4}",
        config.classifier,
        config.folds,
        cv.curve.rer,
        cv.curve.rer_threshold,
        cv.curve.tpr,
        cv.curve.fpr,
        cv.curve.auc
    );
    println!("wrote roc.csv, roc.svg and metrics.json under {}", out.display());
    Ok(())
}

fn parse_scores_csv(text: &str) -> Result<(Vec<f64>, Vec<u8>), CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "score,label" => {}
        _ => {
            return Err(CliError::Data(
                "score CSV must start with a `score,label` header".into(),
            ))
        }
    }
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (s, l) = line
            .split_once(',')
            .ok_or_else(|| CliError::Data(format!("line {}: expected score,label", idx + 2)))?;
        scores.push(
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Data(format!("line {}: bad score: {e}", idx + 2)))?,
        );
        labels.push(
            l.trim()
                .parse::<u8>()
                .map_err(|e| CliError::Data(format!("line {}: bad label: {e}", idx + 2)))?,
        );
    }
    Ok((scores, labels))
}

fn cmd_roc(scores_path: &Path, w_tpr: f64, w_fpr: f64, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(scores_path)
        .map_err(|e| data_err(&format!("reading {}", scores_path.display()), e))?;
    let (scores, labels) = parse_scores_csv(&text)?;
    let curve = sweep_roc_weighted(&scores, &labels, w_tpr, w_fpr)?;
    let csv = with_extension(out, "csv");
    let svg = with_extension(out, "svg");
    let json = with_extension(out, "json");
    std::fs::write(&csv, curve.to_csv()).map_err(|e| data_err("writing roc CSV", e))?;
    std::fs::write(&svg, curve.to_svg()).map_err(|e| data_err("writing roc SVG", e))?;
    let summary = serde_json::json!({
        "tpr": curve.tpr,
        "fpr": curve.fpr,
        "rer": curve.rer,
        "rer_threshold": curve.rer_threshold,
        "auc": curve.auc,
    });
    std::fs::write(&json, serde_json::to_string_pretty(&summary).unwrap())
        .map_err(|e| data_err("writing roc JSON", e))?;
    println!(
        "RER {:.4} at threshold {:.4} (TPR {:.4}, FPR {:.4}), AUC {:.4}",
        curve.rer, curve.rer_threshold, curve.tpr, curve.fpr, curve.auc
    );
    Ok(())
}

fn cmd_run(
    wavs: &[PathBuf],
    labels: &[PathBuf],
    config: &RunConfig,
    group_by_recording: bool,
    out: &Path,
) -> Result<(), CliError> {
    if !labels.is_empty() && labels.len() != wavs.len() {
        return Err(CliError::Usage(format!(
            "{} label paths for {} WAVs",
            labels.len(),
            wavs.len()
        )));
    }
    std::fs::create_dir_all(out).map_err(|e| data_err("creating run directory", e))?;
    let mut manifest = Manifest::new(config);
    match run_stages(wavs, labels, config, group_by_recording, out, &mut manifest) {
        Ok(()) => {
            manifest.finish();
            let path = manifest
                .write(out)
                .map_err(|e| data_err("writing manifest", e))?;
            let broken = manifest
                .verify(out)
                .map_err(|e| data_err("verifying manifest", e))?;
            if !broken.is_empty() {
                return Err(CliError::Data(format!(
                    "artifacts changed while the manifest was written: {}",
                    broken.join(", ")
                )));
            }
            println!("run complete; manifest at {}", path.display());
            Ok(())
        }
        Err((stage, err)) => {
            manifest.fail(stage, err.to_string());
            manifest.write(out).ok();
            Err(match err {
                CliError::Usage(m) => CliError::Usage(format!("stage {stage}: {m}")),
                CliError::Data(m) => CliError::Data(format!("stage {stage}: {m}")),
                CliError::Numeric(m) => CliError::Numeric(format!("stage {stage}: {m}")),
            })
        }
    }
}

type StageResult = Result<(), (&'static str, CliError)>;

fn run_stages(
    wavs: &[PathBuf],
    labels: &[PathBuf],
    config: &RunConfig,
    group_by_recording: bool,
    out: &Path,
    manifest: &mut Manifest,
) -> StageResult {
    let stage = |name: &'static str| move |err: CliError| (name, err);

    // resolved configuration echo, diffable
    let config_path = out.join("config.txt");
    std::fs::write(&config_path, config.to_text())
        .map_err(|e| ("ingest", data_err("writing config echo", e)))?;
    manifest
        .record_artifact(out, &config_path)
        .map_err(|e| ("ingest", data_err("hashing artifact", e)))?;

    // ingest + extract, one recording at a time
    let features_dir = out.join("features");
    std::fs::create_dir_all(&features_dir)
        .map_err(|e| ("ingest", data_err("creating features dir", e)))?;
    let mut combined: Option<FeatureMatrix> = None;
    let mut groups = Vec::new();
    for (idx, wav_path) in wavs.iter().enumerate() {
        let labels_path = match labels.get(idx) {
            Some(p) => p.clone(),
            None => wav_path.with_extension("labels"),
        };
        manifest.record_input(wav_path).map_err(|e| {
            ("ingest", data_err(&format!("reading {}", wav_path.display()), e))
        })?;
        manifest.record_input(&labels_path).map_err(|e| {
            ("ingest", data_err(&format!("reading {}", labels_path.display()), e))
        })?;
        let matrix = load_recording(wav_path, &labels_path).map_err(stage("ingest"))?;

        let stem = wav_path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| format!("recording{idx}"));
        let fmx_path = features_dir.join(format!("{stem}.fmx"));
        matrix
            .write_fmx(&fmx_path)
            .map_err(|e| stage("extract")(e.into()))?;
        manifest
            .record_artifact(out, &fmx_path)
            .map_err(|e| ("extract", data_err("hashing artifact", e)))?;

        groups.extend(std::iter::repeat_n(idx, matrix.nrows()));
        match &mut combined {
            None => combined = Some(matrix),
            Some(all) => all.append(&matrix).map_err(|e| stage("extract")(e.into()))?,
        }
    }
    let dataset = combined.ok_or(("ingest", CliError::Usage("no input WAVs".into())))?;
    let dataset_fmx = features_dir.join("dataset.fmx");
    let dataset_csv = features_dir.join("dataset.csv");
    dataset
        .write_fmx(&dataset_fmx)
        .map_err(|e| stage("extract")(e.into()))?;
    std::fs::write(&dataset_csv, dataset.to_csv())
        .map_err(|e| ("extract", data_err("writing dataset.csv", e)))?;
    for path in [&dataset_fmx, &dataset_csv] {
        manifest
            .record_artifact(out, path)
            .map_err(|e| ("extract", data_err("hashing artifact", e)))?;
    }
    println!(
        "extracted {} frames x {} features from {} recording(s)",
        dataset.nrows(),
        dataset.ncols(),
        wavs.len()
    );

    // rank
    let reports_dir = out.join("reports");
    std::fs::create_dir_all(&reports_dir)
        .map_err(|e| ("rank", data_err("creating reports dir", e)))?;
    let report = build_report(&dataset, dataset.names(), config.bins)
        .map_err(|e| stage("rank")(e.into()))?;
    let report_csv = reports_dir.join("mi_report.csv");
    let report_json = reports_dir.join("mi_report.json");
    std::fs::write(&report_csv, report.to_csv())
        .map_err(|e| ("rank", data_err("writing mi_report.csv", e)))?;
    std::fs::write(&report_json, report.to_json())
        .map_err(|e| ("rank", data_err("writing mi_report.json", e)))?;
    for path in [&report_csv, &report_json] {
        manifest
            .record_artifact(out, path)
            .map_err(|e| ("rank", data_err("hashing artifact", e)))?;
    }

    // select
    let selection = select_features(&dataset, config.selection_k.min(dataset.ncols()), config.bins)
        .map_err(|e| stage("select")(e.into()))?;
    let selection_json = reports_dir.join("selection.json");
    let selection_csv = reports_dir.join("selection.csv");
    std::fs::write(&selection_json, selection.to_json())
        .map_err(|e| ("select", data_err("writing selection.json", e)))?;
    std::fs::write(&selection_csv, selection.report.to_csv())
        .map_err(|e| ("select", data_err("writing selection.csv", e)))?;
    for path in [&selection_json, &selection_csv] {
        manifest
            .record_artifact(out, path)
            .map_err(|e| ("select", data_err("hashing artifact", e)))?;
    }
    println!(
        "selected {} features: {}",
        selection.order.len(),
        selection.order.join(", ")
    );

    // train on the full dataset with the selected columns
    let models_dir = out.join("models");
    std::fs::create_dir_all(&models_dir)
        .map_err(|e| ("train", data_err("creating models dir", e)))?;
    let (train_view, _) =
        apply_selection(&dataset, config.selection_k, config.bins).map_err(stage("train"))?;
    let model = config
        .classifier_spec()
        .train(&train_view, config.seed)
        .map_err(|e| stage("train")(e.into()))?;
    let model_path = models_dir.join("model.json");
    model
        .write_json(&model_path)
        .map_err(|e| stage("train")(e.into()))?;
    manifest
        .record_artifact(out, &model_path)
        .map_err(|e| ("train", data_err("hashing artifact", e)))?;

    // eval
    let groups = group_by_recording.then_some(groups);
    let cv = cross_validate(&dataset, &config.classifier_spec(), &eval_config(config, groups))
        .map_err(|e| stage("eval")(e.into()))?;
    let roc_dir = out.join("roc");
    let paths =
        write_eval_outputs(&roc_dir, &cv.curve, &cv.metrics_json()).map_err(stage("eval"))?;
    for path in &paths {
        manifest
            .record_artifact(out, path)
            .map_err(|e| ("eval", data_err("hashing artifact", e)))?;
    }
    println!(
        "{} {}-fold CV: RER {:.4} (TPR {:.4}, FPR {:.4}), AUC {:.4}",
        config.classifier, config.folds, cv.curve.rer, cv.curve.tpr, cv.curve.fpr, cv.curve.auc
    );
    Ok(())
}
