//! Command-line driver for every pipeline stage.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error, 3 I/O error.
//! Payloads go to stdout; diagnostics go to stderr.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slider_core::{build_point_cloud, tokenize_bytes, Dimension, Image, LatentImageModel, PoleLabels, TrainingConfig};

use crate::error::StudioError;
use crate::pgm::{encode_pgm, parse_pgm};
use crate::service::{self, ServiceConfig, CLASS_AXIS};
use crate::store::{self, StoredModel};
use crate::wire::{probe_json, serialize_point_cloud};

#[derive(Debug, Parser)]
#[command(name = "slider", version, about = "Train latent models, build sliders, probe them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a word embedding on a UTF-8 text corpus.
    TrainWords(TrainWordsArgs),
    /// Fit a latent image model on two classes of PGM images.
    TrainImages(TrainImagesArgs),
    /// Build a slider from two comma-separated pole word lists.
    Slider(SliderArgs),
    /// Probe a slider at position t.
    Probe(ProbeArgs),
    /// Print vocabulary coordinates on a slider, ascending.
    Project(ProjectArgs),
    /// Write the 2D point cloud of a words model.
    Pointcloud(PointcloudArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TrainWordsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr_start: Option<f32>,
    #[arg(long)]
    lr_end: Option<f32>,
}

#[derive(Debug, Args)]
pub struct TrainImagesArgs {
    #[arg(long)]
    class_a: PathBuf,
    #[arg(long)]
    class_b: PathBuf,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    out: PathBuf,
    /// Pole labels, "A,B". Defaults to the class directory names.
    #[arg(long)]
    labels: Option<String>,
}

#[derive(Debug, Args)]
pub struct SliderArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    pole_a: String,
    #[arg(long)]
    pole_b: String,
    #[arg(long)]
    labels: String,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    slider: String,
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// Base word (words models).
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Output PGM path (image models).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Anchor image (image models); defaults to the slider midpoint.
    #[arg(long)]
    base_image: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    slider: String,
    /// Comma-separated subset of words; defaults to the whole vocabulary.
    #[arg(long)]
    words: Option<String>,
}

#[derive(Debug, Args)]
pub struct PointcloudArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    slider: Option<String>,
    #[arg(long, default_value_t = 200)]
    max_points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "DATA_DIR", default_value = "./data")]
    data_dir: PathBuf,
    #[arg(long, env = "BIND", default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Built web UI assets to serve alongside the API.
    #[arg(long, env = "STATIC_DIR")]
    static_dir: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Studio(StudioError),
}

impl From<StudioError> for Failure {
    fn from(e: StudioError) -> Self {
        Failure::Studio(e)
    }
}

impl From<slider_core::Error> for Failure {
    fn from(e: slider_core::Error) -> Self {
        Failure::Studio(e.into())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Studio(e)) => {
            eprintln!("{}: {e}", e.code());
            ExitCode::from(match e {
                StudioError::Io { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::TrainWords(args) => train_words(args),
        Command::TrainImages(args) => train_images(args),
        Command::Slider(args) => slider(args),
        Command::Probe(args) => probe(args),
        Command::Project(args) => project(args),
        Command::Pointcloud(args) => pointcloud(args),
        Command::Serve(args) => serve(args),
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    Ok(std::fs::read(path).map_err(StudioError::io(path))?)
}

fn list(raw: &str) -> Vec<&str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn labels(raw: &str) -> CliResult<PoleLabels> {
    match raw.split(',').map(str::trim).collect::<Vec<_>>()[..] {
        [a, b] => Ok(PoleLabels::new(a, b)),
        _ => Err(Failure::Usage(format!("--labels expects \"A,B\", got {raw:?}"))),
    }
}

fn emit(bytes: &[u8]) -> CliResult {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(StudioError::io("<stdout>"))?;
    Ok(())
}

fn train_words(args: TrainWordsArgs) -> CliResult {
    let defaults = TrainingConfig::default();
    let config = TrainingConfig {
        dim: args.dim.unwrap_or(defaults.dim),
        window: args.window.unwrap_or(defaults.window),
        negatives: args.negatives.unwrap_or(defaults.negatives),
        epochs: args.epochs.unwrap_or(defaults.epochs),
        lr_start: args.lr_start.unwrap_or(defaults.lr_start),
        lr_end: args.lr_end.unwrap_or(defaults.lr_end),
        min_count: args.min_count.unwrap_or(defaults.min_count),
        seed: args.seed.unwrap_or(defaults.seed),
    };
    config.validate()?;
    let tokens = tokenize_bytes(&read(&args.corpus)?)?;
    let model = slider_core::train_embeddings(&tokens, &config)?;
    eprintln!("trained {} words x {} dims", model.vocab().len(), model.dim());
    store::save_model(&StoredModel::Words(model), &args.out)?;
    Ok(())
}

fn read_class(dir: &Path) -> CliResult<(Vec<Image>, Vec<String>)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(StudioError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    let mut images = Vec::with_capacity(files.len());
    let mut names = Vec::with_capacity(files.len());
    for f in files {
        images.push(parse_pgm(&read(&f)?)?);
        names.push(f.file_name().unwrap_or_default().to_string_lossy().into_owned());
    }
    if images.is_empty() {
        return Err(Failure::Usage(format!("no .pgm files in {}", dir.display())));
    }
    Ok((images, names))
}

fn dir_label(dir: &Path) -> String {
    dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn train_images(args: TrainImagesArgs) -> CliResult {
    let (class_a, names_a) = read_class(&args.class_a)?;
    let (class_b, names_b) = read_class(&args.class_b)?;
    let pole_labels = match &args.labels {
        Some(raw) => labels(raw)?,
        None => PoleLabels::new(dir_label(&args.class_a), dir_label(&args.class_b)),
    };
    let union: Vec<Image> = class_a.iter().chain(&class_b).cloned().collect();
    let model = LatentImageModel::fit(&union, args.q)?;
    let dim = Dimension::from_images(&model, &class_a, &class_b, pole_labels)?.with_pole_items(names_a, names_b);
    store::save_model(&StoredModel::Images(model), &args.out)?;
    store::save_slider(&dim, &args.out, Some(CLASS_AXIS))?;
    eprintln!("fitted latent model; slider {CLASS_AXIS} saved");
    Ok(())
}

fn slider(args: SliderArgs) -> CliResult {
    let stored = store::load_model(&args.model)?;
    let model = stored.as_words()?;
    let (pole_a, pole_b) = (list(&args.pole_a), list(&args.pole_b));
    if pole_a.is_empty() || pole_b.is_empty() {
        return Err(Failure::Usage("both pole lists need at least one word".into()));
    }
    let dim = Dimension::from_words(model, &pole_a, &pole_b, labels(&args.labels)?)?;
    let id = store::save_slider(&dim, &args.model, None)?;
    emit(format!("{id}\n").as_bytes())
}

fn probe(args: ProbeArgs) -> CliResult {
    if !args.t.is_finite() {
        return Err(Failure::Usage("--t must be finite".into()));
    }
    let stored = store::load_model(&args.model)?;
    let dim = store::load_slider(&args.model, &args.slider)?;
    match &stored {
        StoredModel::Words(model) => {
            let base = args
                .base
                .as_deref()
                .ok_or_else(|| Failure::Usage("--base is required for words models".into()))?;
            if args.k < 1 {
                return Err(Failure::Usage("--k must be at least 1".into()));
            }
            let result = dim.probe_words(model, base, args.t, args.k)?;
            let mut out = probe_json(&result);
            out.push(b'\n');
            emit(&out)
        }
        StoredModel::Images(model) => {
            let out = args
                .out
                .as_deref()
                .ok_or_else(|| Failure::Usage("--out is required for image models".into()))?;
            let base = match &args.base_image {
                Some(path) => Some(parse_pgm(&read(path)?)?),
                None => None,
            };
            let result = dim.probe_image(model, args.t, base.as_ref())?;
            let slider_core::ProbeOutput::Image(img) = &result.output else {
                unreachable!("image probes return images")
            };
            std::fs::write(out, encode_pgm(img)).map_err(StudioError::io(out))?;
            Ok(())
        }
    }
}

fn project(args: ProjectArgs) -> CliResult {
    let stored = store::load_model(&args.model)?;
    let model = stored.as_words()?;
    let dim = store::load_slider(&args.model, &args.slider)?;
    let subset = args.words.as_deref().map(list);
    let rows = dim.project_vocabulary(model, subset.as_deref())?;
    let mut out = Vec::new();
    for (word, coord) in rows {
        serde_json::to_writer(&mut out, &(word, coord)).expect("row serializes");
        out.push(b'\n');
    }
    emit(&out)
}

fn pointcloud(args: PointcloudArgs) -> CliResult {
    let stored = store::load_model(&args.model)?;
    let model = stored.as_words()?;
    let dim = args
        .slider
        .as_deref()
        .map(|id| store::load_slider(&args.model, id))
        .transpose()?;
    let cloud = build_point_cloud(model, dim.as_ref(), args.max_points)?;
    std::fs::write(&args.out, serialize_point_cloud(&cloud)).map_err(StudioError::io(&args.out))?;
    Ok(())
}

fn serve(args: ServeArgs) -> CliResult {
    let runtime = tokio::runtime::Runtime::new().map_err(StudioError::io("tokio runtime"))?;
    let config = ServiceConfig {
        data_dir: args.data_dir,
        static_dir: args.static_dir,
    };
    runtime.block_on(service::serve(config, SocketAddr::new(args.bind, args.port)))?;
    Ok(())
}
