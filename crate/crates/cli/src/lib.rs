//! The `orient` command line: synthesize rotation datasets, train and apply
//! the learned regressor, score estimators and tabulate the results.
//!
//! A typical run is five commands:
//!
//! ```text
//! orient synthesize --kind stripes --n 2400 --level pm45 --seed 7 --out data
//! orient train      --data data --out model
//! orient evaluate   --data data --method oad --checkpoint model/model.ock --out eval
//! orient evaluate   --data data --method hough-pow --out eval
//! orient compare    eval/report-*.jsonl --out eval
//! ```

pub mod config;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use config::CliConfig;
use orient_core::classical::{ClassicalMethod, EstimatorConfig};
use orient_core::dataset::{
    build_split, ingest_directory, load_rgb, materialize, read_discard_list, rotate_image, save_rgb,
    synthesize_with_size, DifficultyLevel, FillPolicy, RotatedSample, SourceImage, Split, SplitCounts,
    SplitManifest, SynthKind, DEFAULT_SYNTH_SIZE,
};
use orient_core::evaluation::{
    compare, evaluate, learned_method_name, render_error_histogram, run_ablation, AblationData, ClassicalEstimator,
    ComparisonTable, EvalReport, Estimator, LearnedEstimator,
};
use orient_core::regressor::{
    build_model, prepare_examples, train_with_log, BackboneName, BackboneSpec, HeadSpec, LossKind, ModelCheckpoint,
    Predictor, TrainConfig,
};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const IMAGES_DIR: &str = "images";
pub const CHECKPOINT_FILE: &str = "model.ock";
pub const TRAIN_LOG_FILE: &str = "train_log.jsonl";
const DEFAULT_OUT: &str = "orient-out";

#[derive(Debug, Parser)]
#[command(name = "orient", version, about = "Estimate and correct image orientation")]
pub struct Cli {
    /// TOML settings file (or an artifact's embedded JSON config).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// pm30, pm45 or full360.
    #[arg(long, global = true)]
    pub level: Option<DifficultyLevel>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate (or ingest) upright images and a split manifest.
    Synthesize {
        /// stripes, text_blocks, gradient_scene or checkerboard.
        #[arg(long)]
        kind: Option<SynthKind>,
        #[arg(long)]
        n: Option<usize>,
        /// Side of the square synthetic images.
        #[arg(long)]
        size: Option<u32>,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        val: Option<usize>,
        #[arg(long)]
        test: Option<usize>,
        /// Ids to exclude, one per line.
        #[arg(long)]
        discard: Option<PathBuf>,
        /// Use the images in this directory instead of synthesizing.
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Train the regressor on a dataset's train and val splits.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        backbone: Option<BackboneName>,
        #[arg(long)]
        loss: Option<LossKind>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        fill: Option<FillPolicy>,
    },
    /// Score one method on a dataset's test split.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        /// oad, hough-var, hough-pow or fourier.
        #[arg(long)]
        method: Option<String>,
        /// Required for `oad`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        fill: Option<FillPolicy>,
        #[arg(long)]
        angle_step: Option<f64>,
    },
    /// Run a classical estimator on one image.
    Estimate {
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        angle_step: Option<f64>,
        image: PathBuf,
    },
    /// Tabulate reports with levels as rows and methods as columns.
    Compare { reports: Vec<PathBuf> },
    /// Train and test every backbone × loss pair on one dataset.
    Ablate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "tiny_desk,micro_desk")]
        backbones: Vec<BackboneName>,
        #[arg(long, value_delimiter = ',', default_value = "circular,l1")]
        losses: Vec<LossKind>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        fill: Option<FillPolicy>,
    },
    /// Print a trained model's angle for one image.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        image: PathBuf,
    },
    /// Predict the angle and write the counter-rotated image.
    Correct {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        fill: Option<FillPolicy>,
        input: PathBuf,
        output: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synthesize { .. } => "synthesize",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Estimate { .. } => "estimate",
            Command::Compare { .. } => "compare",
            Command::Ablate { .. } => "ablate",
            Command::Predict { .. } => "predict",
            Command::Correct { .. } => "correct",
        }
    }

    /// Settings given as flags on this subcommand.
    fn flag_settings(&self) -> CliConfig {
        let mut c = CliConfig::default();
        match self {
            Command::Synthesize { kind, n, size, train, val, test, .. } => {
                c.kind = *kind;
                c.n = *n;
                c.size = *size;
                c.train = *train;
                c.val = *val;
                c.test = *test;
            }
            Command::Train { backbone, loss, epochs, batch_size, learning_rate, fill, .. } => {
                c.backbone = *backbone;
                c.loss = *loss;
                c.epochs = *epochs;
                c.batch_size = *batch_size;
                c.learning_rate = *learning_rate;
                c.fill = *fill;
            }
            Command::Evaluate { method, fill, angle_step, .. } => {
                c.method = method.clone();
                c.fill = *fill;
                c.angle_step = *angle_step;
            }
            Command::Estimate { method, angle_step, .. } => {
                c.method = method.clone();
                c.angle_step = *angle_step;
            }
            Command::Ablate { epochs, batch_size, learning_rate, fill, .. } => {
                c.epochs = *epochs;
                c.batch_size = *batch_size;
                c.learning_rate = *learning_rate;
                c.fill = *fill;
            }
            Command::Correct { fill, .. } => c.fill = *fill,
            Command::Compare { .. } | Command::Predict { .. } => {}
        }
        c
    }
}

/// Built-in defaults, below the config file and flags.
pub fn defaults() -> CliConfig {
    CliConfig {
        seed: Some(0),
        level: Some(DifficultyLevel::Pm45),
        kind: Some(SynthKind::Stripes),
        n: Some(100),
        size: Some(DEFAULT_SYNTH_SIZE),
        train: None,
        val: None,
        test: None,
        method: None,
        backbone: Some(BackboneName::TinyDesk),
        loss: Some(LossKind::Circular),
        epochs: Some(30),
        batch_size: Some(8),
        learning_rate: Some(0.1),
        fill: Some(FillPolicy::FillBlack),
        angle_step: Some(EstimatorConfig::default().angle_step),
    }
}

/// Keeps only the settings `command` reads, so artifacts do not record
/// defaults that had no effect on them.
fn used_by(command: &str, all: CliConfig) -> CliConfig {
    let mut kept = CliConfig::default();
    macro_rules! keep {
        ($($field:ident),*) => {{ $(kept.$field = all.$field.clone();)* }};
    }
    match command {
        "synthesize" => keep!(seed, level, kind, n, size, train, val, test),
        "train" => keep!(seed, level, backbone, loss, epochs, batch_size, learning_rate, fill),
        "evaluate" => keep!(level, method, fill, angle_step),
        "estimate" => keep!(method, angle_step),
        "ablate" => keep!(seed, level, epochs, batch_size, learning_rate, fill),
        "correct" => keep!(fill),
        _ => {}
    }
    kept
}

struct Ctx {
    settings: CliConfig,
    out: PathBuf,
    command: &'static str,
    /// Whether `--level` was set explicitly (flag or file).
    level_given: bool,
}

impl Ctx {
    fn provenance(&self) -> serde_json::Value {
        self.settings.provenance(self.command)
    }

    fn level(&self) -> DifficultyLevel {
        self.settings.level.expect("defaulted")
    }

    fn fill(&self) -> FillPolicy {
        self.settings.fill.expect("defaulted")
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

/// Writes through a temporary sibling and renames, so a failed command
/// never leaves a partial artifact behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(p) => CliConfig::load(p)?,
        None => CliConfig::default(),
    };
    let flags = CliConfig { seed: cli.seed, level: cli.level, ..cli.command.flag_settings() };
    let given = file.overlay(&flags);
    let ctx = Ctx {
        level_given: given.level.is_some(),
        settings: used_by(cli.command.name(), defaults().overlay(&given)),
        out: cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        command: cli.command.name(),
    };
    match &cli.command {
        Command::Synthesize { discard, source, .. } => cmd_synthesize(ctx, discard.as_deref(), source.as_deref(), stdout),
        Command::Train { data, .. } => cmd_train(ctx, data, stdout),
        Command::Evaluate { data, checkpoint, .. } => cmd_evaluate(ctx, data, checkpoint.as_deref(), stdout),
        Command::Estimate { image, .. } => cmd_estimate(ctx, image, stdout),
        Command::Compare { reports } => cmd_compare(ctx, reports, stdout),
        Command::Ablate { data, backbones, losses, .. } => cmd_ablate(ctx, data, backbones, losses, stdout),
        Command::Predict { checkpoint, image } => cmd_predict(checkpoint, image, stdout),
        Command::Correct { checkpoint, input, output, .. } => cmd_correct(ctx, checkpoint, input, output, stdout),
    }
}

fn default_counts(eligible: usize) -> SplitCounts {
    let val = eligible / 10;
    let test = eligible / 10;
    SplitCounts::new(eligible - val - test, val, test)
}

fn cmd_synthesize(mut ctx: Ctx, discard: Option<&Path>, source: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let s = ctx.settings.clone();
    let seed = s.seed.expect("defaulted");
    let corpus: Vec<SourceImage> = match source {
        Some(dir) => {
            let ingested = ingest_directory(dir)?;
            for p in &ingested.rejected {
                writeln!(stdout, "skipped {} (too small)", p.display())?;
            }
            // provenance of an ingested corpus has no synthesis settings
            ctx.settings.kind = None;
            ctx.settings.n = None;
            ctx.settings.size = None;
            ingested.images
        }
        None => synthesize_with_size(s.n.expect("defaulted"), s.kind.expect("defaulted"), seed, s.size.expect("defaulted"))?,
    };
    let discard_ids = match discard {
        Some(p) => read_discard_list(p)?,
        None => Vec::new(),
    };
    let discarded: BTreeSet<&str> = discard_ids.iter().map(String::as_str).collect();
    let eligible = corpus.iter().filter(|c| !discarded.contains(c.id.as_str())).count();
    let counts = match (s.train, s.val, s.test) {
        (None, None, None) => default_counts(eligible),
        (train, val, test) => {
            let (val, test) = (val.unwrap_or(0), test.unwrap_or(0));
            let train = train.unwrap_or_else(|| eligible.saturating_sub(val + test));
            SplitCounts::new(train, val, test)
        }
    };
    ctx.settings.train = Some(counts.train);
    ctx.settings.val = Some(counts.val);
    ctx.settings.test = Some(counts.test);

    let ids: Vec<&str> = corpus.iter().map(|c| c.id.as_str()).collect();
    let discard_refs: Vec<&str> = discard_ids.iter().map(String::as_str).collect();
    let mut manifest = build_split(&ids, ctx.level(), seed, counts, &discard_refs)?;
    manifest.config = Some(ctx.provenance());

    let out = ctx.out_dir()?.to_path_buf();
    let images = out.join(IMAGES_DIR);
    std::fs::create_dir_all(&images).with_context(|| format!("creating {}", images.display()))?;
    let used: BTreeSet<&str> = manifest.entries.iter().map(|e| e.source_id.as_str()).collect();
    for img in corpus.iter().filter(|c| used.contains(c.id.as_str())) {
        save_rgb(&img.pixels, &images.join(format!("{}.png", img.id)))?;
    }
    write_atomic(&out.join(MANIFEST_FILE), manifest.to_jsonl().as_bytes())?;
    writeln!(
        stdout,
        "wrote {} entries ({} train, {} val, {} test) at {} to {}",
        manifest.entries.len(),
        counts.train,
        counts.val,
        counts.test,
        manifest.level,
        out.display()
    )?;
    Ok(())
}

/// Loads a dataset directory and the source images its manifest uses.
pub fn load_dataset(dir: &Path) -> Result<(SplitManifest, Vec<SourceImage>)> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading manifest {}", path.display()))?;
    let manifest = SplitManifest::from_jsonl(&text).with_context(|| format!("parsing {}", path.display()))?;
    let ids: BTreeSet<&str> = manifest.entries.iter().map(|e| e.source_id.as_str()).collect();
    let corpus = ids
        .into_iter()
        .map(|id| {
            let p = dir.join(IMAGES_DIR).join(format!("{id}.png"));
            Ok(SourceImage::new(id, load_rgb(&p)?)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, corpus))
}

fn dataset_level(ctx: &mut Ctx, manifest: &SplitManifest) -> Result<DifficultyLevel> {
    if ctx.level_given && ctx.level() != manifest.level {
        bail!("--level {} does not match the dataset level {}", ctx.level(), manifest.level);
    }
    ctx.settings.level = Some(manifest.level);
    Ok(manifest.level)
}

fn train_config(ctx: &Ctx, level: DifficultyLevel, loss: LossKind) -> TrainConfig {
    let s = &ctx.settings;
    let mut cfg = TrainConfig::new(level, loss);
    cfg.epochs = s.epochs.expect("defaulted");
    cfg.batch_size = s.batch_size.expect("defaulted");
    cfg.optimizer.learning_rate = s.learning_rate.expect("defaulted");
    cfg.seed = s.seed.expect("defaulted");
    cfg.fill_policy = ctx.fill();
    cfg
}

fn cmd_train(mut ctx: Ctx, data: &Path, stdout: &mut dyn Write) -> Result<()> {
    let (manifest, corpus) = load_dataset(data)?;
    let level = dataset_level(&mut ctx, &manifest)?;
    let backbone = BackboneSpec::by_name(ctx.settings.backbone.expect("defaulted"))?;
    let cfg = train_config(&ctx, level, ctx.settings.loss.expect("defaulted"));
    let train_set = materialize(&manifest, Split::Train, &corpus, cfg.fill_policy)?;
    let val_set = materialize(&manifest, Split::Val, &corpus, cfg.fill_policy)?;
    if train_set.is_empty() || val_set.is_empty() {
        bail!("dataset needs non-empty train and val splits (has {} and {})", train_set.len(), val_set.len());
    }
    let train_ex = prepare_examples(&train_set, backbone.input_size);
    let val_ex = prepare_examples(&val_set, backbone.input_size);

    let mut model = build_model(&backbone, &HeadSpec::for_level(level), cfg.seed)?;
    let provenance = ctx.provenance();
    let mut log = serde_json::to_string(&serde_json::json!({ "config": provenance }))? + "\n";
    let mut echo = Vec::new();
    let outcome = train_with_log(&mut model, &cfg, &train_ex, &val_ex, |r| {
        log.push_str(&serde_json::to_string(r).expect("record serializes"));
        log.push('\n');
        echo.push(format!("epoch {:3}  train_loss {:8.3}  val_mae {:7.3}", r.epoch, r.train_loss, r.val_mae));
    })?;
    for line in echo {
        writeln!(stdout, "{line}")?;
    }
    let mut ckpt = ModelCheckpoint::from_model(&model, &cfg, &outcome);
    ckpt.provenance = Some(provenance);
    let out = ctx.out_dir()?;
    write_atomic(&out.join(TRAIN_LOG_FILE), log.as_bytes())?;
    write_atomic(&out.join(CHECKPOINT_FILE), &ckpt.to_bytes())?;
    match outcome.best_epoch {
        Some(e) => writeln!(stdout, "kept epoch {e} (val_mae {:.3})", outcome.history[e - 1].val_mae)?,
        None => writeln!(stdout, "no epochs run; saved initial weights")?,
    }
    Ok(())
}

fn load_predictor(path: &Path) -> Result<Predictor> {
    let ckpt = ModelCheckpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))?;
    Ok(Predictor::from_checkpoint(&ckpt)?)
}

fn classical_method(ctx: &Ctx) -> Result<ClassicalEstimator> {
    let name = ctx.settings.method.as_deref().context("--method is required")?;
    let method: ClassicalMethod = name.parse().map_err(anyhow::Error::msg)?;
    let config = EstimatorConfig { angle_step: ctx.settings.angle_step.expect("defaulted"), ..EstimatorConfig::default() };
    Ok(ClassicalEstimator { method, config })
}

/// PNG bytes with the provenance JSON in a text chunk.
fn png_with_provenance(img: &image::RgbImage, provenance: &serde_json::Value) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut bytes, img.width(), img.height());
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        enc.add_text_chunk("orient-config".into(), provenance.to_string())?;
        let mut w = enc.write_header()?;
        w.write_image_data(img.as_raw())?;
    }
    Ok(bytes)
}

fn cmd_evaluate(mut ctx: Ctx, data: &Path, checkpoint: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let (manifest, corpus) = load_dataset(data)?;
    let level = dataset_level(&mut ctx, &manifest)?;
    let method = ctx.settings.method.clone().context("--method is required")?;
    let estimator: Box<dyn Estimator> = if method.eq_ignore_ascii_case("oad") {
        let path = checkpoint.context("--checkpoint is required for --method oad")?;
        Box::new(LearnedEstimator { predictor: load_predictor(path)? })
    } else {
        ctx.settings.method = Some(method.to_ascii_lowercase());
        Box::new(classical_method(&ctx)?)
    };
    // refuse before rotating anything
    if !estimator.applicable(level) {
        bail!(orient_core::evaluation::EvalError::NotApplicable { method: estimator.name(), level });
    }
    let test = materialize(&manifest, Split::Test, &corpus, ctx.fill())?;
    let mut report = evaluate(estimator.as_ref(), &test)?;
    report.config = Some(ctx.provenance());
    let out = ctx.out_dir()?;
    let stem = format!("{}-{}", report.method, level);
    write_atomic(&out.join(format!("report-{stem}.jsonl")), report.to_jsonl().as_bytes())?;
    if !report.per_sample.is_empty() {
        let png = png_with_provenance(&render_error_histogram(&report)?, &ctx.provenance())?;
        write_atomic(&out.join(format!("hist-{stem}.png")), &png)?;
    }
    match report.mae {
        Some(m) => writeln!(stdout, "{} at {}: mae {m:.3} over {} samples, {} failures", report.method, level, report.per_sample.len(), report.failures())?,
        None => writeln!(stdout, "{} at {}: every sample failed ({})", report.method, level, report.failures())?,
    }
    Ok(())
}

fn cmd_estimate(ctx: Ctx, image: &Path, stdout: &mut dyn Write) -> Result<()> {
    let est = classical_method(&ctx)?;
    let img = load_rgb(image)?;
    let a = est.method.estimate(&img, &est.config).with_context(|| format!("estimating {}", image.display()))?;
    writeln!(stdout, "{} {:.3}", est.method, a)?;
    Ok(())
}

fn table_text(table: &ComparisonTable, provenance: &serde_json::Value) -> (String, String) {
    let header = format!("# config: {provenance}\n");
    (format!("{header}{}", table.to_text()), format!("{header}{}", table.to_csv()))
}

fn cmd_compare(ctx: Ctx, reports: &[PathBuf], stdout: &mut dyn Write) -> Result<()> {
    let loaded = reports
        .iter()
        .map(|p| EvalReport::load(p).with_context(|| format!("loading report {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let table = compare(&loaded)?;
    let provenance = serde_json::json!({
        "command": ctx.command,
        "reports": loaded.iter().map(|r| serde_json::json!({"method": r.method, "level": r.level, "config": r.config})).collect::<Vec<_>>(),
    });
    let (text, csv) = table_text(&table, &provenance);
    let out = ctx.out_dir()?;
    write_atomic(&out.join("comparison.txt"), text.as_bytes())?;
    write_atomic(&out.join("comparison.csv"), csv.as_bytes())?;
    write!(stdout, "{}", table.to_text())?;
    Ok(())
}

fn cmd_ablate(mut ctx: Ctx, data: &Path, backbones: &[BackboneName], losses: &[LossKind], stdout: &mut dyn Write) -> Result<()> {
    let (manifest, corpus) = load_dataset(data)?;
    let level = dataset_level(&mut ctx, &manifest)?;
    let fill = ctx.fill();
    let data = AblationData {
        train: materialize(&manifest, Split::Train, &corpus, fill)?,
        val: materialize(&manifest, Split::Val, &corpus, fill)?,
        test: materialize(&manifest, Split::Test, &corpus, fill)?,
    };
    let specs = backbones.iter().map(|&b| BackboneSpec::by_name(b)).collect::<Result<Vec<_>, _>>()?;
    let grid: Vec<(BackboneSpec, LossKind)> =
        specs.iter().flat_map(|b| losses.iter().map(move |&l| (b.clone(), l))).collect();
    let cfg = train_config(&ctx, level, LossKind::Circular);
    let outcome = run_ablation(&grid, level, &data, &cfg)?;
    let mut provenance = ctx.provenance();
    provenance["grid"] = serde_json::json!({ "backbones": backbones, "losses": losses });
    let (text, csv) = table_text(&outcome.table, &provenance);
    let out = ctx.out_dir()?;
    write_atomic(&out.join("ablation.txt"), text.as_bytes())?;
    write_atomic(&out.join("ablation.csv"), csv.as_bytes())?;
    write!(stdout, "{}", outcome.table.to_text())?;
    Ok(())
}

fn cmd_predict(checkpoint: &Path, image: &Path, stdout: &mut dyn Write) -> Result<()> {
    let predictor = load_predictor(checkpoint)?;
    let img = load_rgb(image)?;
    let a = predictor.predict_angle(&img).with_context(|| format!("predicting {}", image.display()))?;
    writeln!(stdout, "{} wrapped {:.3} signed {:+.3}", learned_method_name(predictor.level()), a.degrees(), a.to_signed())?;
    Ok(())
}

fn cmd_correct(ctx: Ctx, checkpoint: &Path, input: &Path, output: &Path, stdout: &mut dyn Write) -> Result<()> {
    let predictor = load_predictor(checkpoint)?;
    let img = load_rgb(input)?;
    let a = predictor.predict_angle(&img).with_context(|| format!("predicting {}", input.display()))?;
    // undo along the shorter way round
    let corrected = rotate_image(&img, -a.to_signed(), ctx.fill())?;
    save_rgb(&corrected, output)?;
    writeln!(stdout, "wrapped {:.3} signed {:+.3}", a.degrees(), a.to_signed())?;
    Ok(())
}

/// Rotated test samples of a dataset directory, for callers that drive the
/// library directly.
pub fn load_split(dir: &Path, split: Split, fill: FillPolicy) -> Result<Vec<RotatedSample>> {
    let (manifest, corpus) = load_dataset(dir)?;
    Ok(materialize(&manifest, split, &corpus, fill)?)
}
