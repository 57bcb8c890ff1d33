//! On-disk model store.
//!
//! One directory per model:
//!
//! ```text
//! manifest.json    format version, type, config, shape, CRC-32 per payload
//! vocab.txt        words: "<word> <count>" per line, vocabulary order
//! vectors.bin      words: input then output matrix, f32 little-endian
//! mean.bin         images: mean image, f32 LE
//! components.bin   images: q x n component matrix, f32 LE
//! singulars.bin    images: q singular values, f32 LE
//! sliders.json     sliders built against this model
//! ```
//!
//! Models are written to a sibling temp directory and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use slider_core::{Dimension, EmbeddingModel, LatentImageModel, PoleLabels, TrainingConfig, Vocabulary};

use crate::error::{Result, StudioError};

pub const FORMAT_VERSION: u64 = 1;
pub const MANIFEST: &str = "manifest.json";
pub const SLIDERS: &str = "sliders.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Words,
    Images,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Words => "words",
            ModelKind::Images => "images",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u64,
    pub model_type: ModelKind,
    pub created_at: String,
    pub config: Value,
    pub shape: Value,
    /// Payload file name -> CRC-32, as 8 lowercase hex digits.
    pub checksum: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordsShape {
    pub vocab_size: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImagesShape {
    pub width: usize,
    pub height: usize,
    pub q: usize,
    pub n_train: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageFitParams {
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoredModel {
    Words(EmbeddingModel),
    Images(LatentImageModel),
}

impl StoredModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            StoredModel::Words(_) => ModelKind::Words,
            StoredModel::Images(_) => ModelKind::Images,
        }
    }

    pub fn as_words(&self) -> Result<&EmbeddingModel> {
        match self {
            StoredModel::Words(m) => Ok(m),
            StoredModel::Images(_) => Err(StudioError::WrongModelType { expected: "words" }),
        }
    }

    pub fn as_images(&self) -> Result<&LatentImageModel> {
        match self {
            StoredModel::Images(m) => Ok(m),
            StoredModel::Words(_) => Err(StudioError::WrongModelType { expected: "images" }),
        }
    }

    /// Length of the latent vectors a slider on this model must have.
    pub fn latent_dim(&self) -> usize {
        match self {
            StoredModel::Words(m) => m.dim(),
            StoredModel::Images(m) => m.q(),
        }
    }
}

impl From<EmbeddingModel> for StoredModel {
    fn from(m: EmbeddingModel) -> Self {
        StoredModel::Words(m)
    }
}

impl From<LatentImageModel> for StoredModel {
    fn from(m: LatentImageModel) -> Self {
        StoredModel::Images(m)
    }
}

fn crc_hex(bytes: &[u8]) -> String {
    format!("{:08x}", crc32fast::hash(bytes))
}

fn f32_bytes<'a>(parts: impl IntoIterator<Item = &'a [f32]>) -> Vec<u8> {
    parts
        .into_iter()
        .flat_map(|p| p.iter().flat_map(|x| x.to_le_bytes()))
        .collect()
}

fn f32s_from(bytes: &[u8], name: &str) -> Result<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(StudioError::CorruptStore(format!("{name} length is not a multiple of 4")));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn payloads(model: &StoredModel) -> Vec<(&'static str, Vec<u8>)> {
    match model {
        StoredModel::Words(m) => {
            let mut vocab = String::new();
            for (word, count) in m.vocab().iter() {
                vocab.push_str(word);
                vocab.push(' ');
                vocab.push_str(&count.to_string());
                vocab.push('\n');
            }
            vec![
                ("vocab.txt", vocab.into_bytes()),
                ("vectors.bin", f32_bytes([m.input_vectors(), m.output_vectors()])),
            ]
        }
        StoredModel::Images(m) => vec![
            ("mean.bin", f32_bytes([m.mean()])),
            ("components.bin", f32_bytes([m.components()])),
            ("singulars.bin", f32_bytes([m.singular_values()])),
        ],
    }
}

fn manifest_for(model: &StoredModel, files: &[(&'static str, Vec<u8>)]) -> Manifest {
    let (config, shape) = match model {
        StoredModel::Words(m) => (
            serde_json::to_value(m.config()),
            serde_json::to_value(WordsShape {
                vocab_size: m.vocab().len(),
                dim: m.dim(),
            }),
        ),
        StoredModel::Images(m) => (
            serde_json::to_value(ImageFitParams { q: m.q() }),
            serde_json::to_value(ImagesShape {
                width: m.width(),
                height: m.height(),
                q: m.q(),
                n_train: m.n_train(),
            }),
        ),
    };
    Manifest {
        format_version: FORMAT_VERSION,
        model_type: model.kind(),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        config: config.expect("config serializes"),
        shape: shape.expect("shape serializes"),
        checksum: files
            .iter()
            .map(|(name, bytes)| (name.to_string(), crc_hex(bytes)))
            .collect(),
    }
}

fn sibling(dir: &Path, tag: &str) -> PathBuf {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    let nonce = chrono::Utc::now().timestamp_nanos_opt().unwrap_or_default();
    dir.with_file_name(format!(".{name}.{tag}-{}-{nonce}", std::process::id()))
}

fn write_model_files(model: &StoredModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(StudioError::io(dir))?;
    let files = payloads(model);
    for (name, bytes) in &files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(StudioError::io(&path))?;
    }
    let manifest = serde_json::to_vec_pretty(&manifest_for(model, &files)).expect("manifest serializes");
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest).map_err(StudioError::io(&path))
}

/// Writes `model` to `dir`, replacing any previous model there.
pub fn save_model(model: &StoredModel, dir: &Path) -> Result<()> {
    let dir = absolute(dir)?;
    if let Some(parent) = dir.parent() {
        fs::create_dir_all(parent).map_err(StudioError::io(parent))?;
    }
    let tmp = sibling(&dir, "tmp");
    if let Err(e) = write_model_files(model, &tmp) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if dir.exists() {
        let old = sibling(&dir, "old");
        fs::rename(&dir, &old).map_err(StudioError::io(&dir))?;
        fs::rename(&tmp, &dir).map_err(StudioError::io(&dir))?;
        let _ = fs::remove_dir_all(&old);
    } else {
        fs::rename(&tmp, &dir).map_err(StudioError::io(&dir))?;
    }
    Ok(())
}

fn absolute(dir: &Path) -> Result<PathBuf> {
    std::path::absolute(dir).map_err(StudioError::io(dir))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(StudioError::UnknownModel(dir.display().to_string()))
        }
        Err(e) => return Err(StudioError::io(&path)(e)),
    };
    let raw: Value = serde_json::from_slice(&bytes)
        .map_err(|e| StudioError::CorruptStore(format!("manifest.json: {e}")))?;
    match raw.get("format_version").and_then(Value::as_u64) {
        Some(FORMAT_VERSION) => {}
        Some(other) => return Err(StudioError::UnsupportedVersion(other)),
        None => return Err(StudioError::CorruptStore("manifest lacks format_version".into())),
    }
    serde_json::from_value(raw).map_err(|e| StudioError::CorruptStore(format!("manifest.json: {e}")))
}

fn read_payload(dir: &Path, manifest: &Manifest, name: &str) -> Result<Vec<u8>> {
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(StudioError::io(&path))?;
    let expected = manifest
        .checksum
        .get(name)
        .ok_or_else(|| StudioError::CorruptStore(format!("no checksum recorded for {name}")))?;
    if crc_hex(&bytes) != *expected {
        return Err(StudioError::CorruptStore(format!("checksum mismatch in {name}")));
    }
    Ok(bytes)
}

fn shape_error(what: &str) -> StudioError {
    StudioError::CorruptStore(format!("{what} does not match the manifest shape"))
}

/// Loads and validates the model stored in `dir`.
pub fn load_model(dir: &Path) -> Result<StoredModel> {
    let manifest = read_manifest(dir)?;
    let bad_field = |e: serde_json::Error| StudioError::CorruptStore(format!("manifest: {e}"));
    match manifest.model_type {
        ModelKind::Words => {
            let config: TrainingConfig = serde_json::from_value(manifest.config.clone()).map_err(bad_field)?;
            let shape: WordsShape = serde_json::from_value(manifest.shape.clone()).map_err(bad_field)?;
            let vocab_bytes = read_payload(dir, &manifest, "vocab.txt")?;
            let vocab = parse_vocab(&vocab_bytes)?;
            if vocab.len() != shape.vocab_size || config.dim != shape.dim {
                return Err(shape_error("vocab.txt"));
            }
            let vectors = f32s_from(&read_payload(dir, &manifest, "vectors.bin")?, "vectors.bin")?;
            let half = shape.vocab_size * shape.dim;
            if vectors.len() != 2 * half {
                return Err(shape_error("vectors.bin"));
            }
            let (input, output) = vectors.split_at(half);
            let model = EmbeddingModel::from_parts(vocab, input.to_vec(), output.to_vec(), config)
                .map_err(|e| StudioError::CorruptStore(e.to_string()))?;
            Ok(StoredModel::Words(model))
        }
        ModelKind::Images => {
            let shape: ImagesShape = serde_json::from_value(manifest.shape.clone()).map_err(bad_field)?;
            let n = shape.width * shape.height;
            let mean = f32s_from(&read_payload(dir, &manifest, "mean.bin")?, "mean.bin")?;
            let components = f32s_from(&read_payload(dir, &manifest, "components.bin")?, "components.bin")?;
            let singulars = f32s_from(&read_payload(dir, &manifest, "singulars.bin")?, "singulars.bin")?;
            if mean.len() != n || components.len() != shape.q * n || singulars.len() != shape.q {
                return Err(shape_error("image payloads"));
            }
            let model = LatentImageModel::from_parts(
                shape.width,
                shape.height,
                mean,
                components,
                singulars,
                shape.n_train,
            )
            .map_err(|e| StudioError::CorruptStore(e.to_string()))?;
            Ok(StoredModel::Images(model))
        }
    }
}

fn parse_vocab(bytes: &[u8]) -> Result<Vocabulary> {
    let text = std::str::from_utf8(bytes).map_err(|_| StudioError::CorruptStore("vocab.txt is not UTF-8".into()))?;
    let entries = text
        .lines()
        .map(|line| {
            let (word, count) = line
                .rsplit_once(' ')
                .ok_or_else(|| StudioError::CorruptStore(format!("bad vocab line {line:?}")))?;
            let count = count
                .parse()
                .map_err(|_| StudioError::CorruptStore(format!("bad count in {line:?}")))?;
            Ok((word.to_string(), count))
        })
        .collect::<Result<Vec<_>>>()?;
    Vocabulary::from_entries(entries).map_err(|e| StudioError::CorruptStore(e.to_string()))
}

/// A slider as persisted in `sliders.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliderRecord {
    pub id: String,
    pub model_id: String,
    pub labels: [String; 2],
    pub pole_a: Vec<String>,
    pub pole_b: Vec<String>,
    pub axis_unit: Vec<f32>,
    pub midpoint: Vec<f32>,
    pub half_span: f32,
}

impl SliderRecord {
    pub fn to_dimension(&self) -> Result<Dimension> {
        let widen = |v: &[f32]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
        let dim = Dimension::from_parts(
            widen(&self.axis_unit),
            widen(&self.midpoint),
            self.half_span as f64,
            PoleLabels::new(self.labels[0].clone(), self.labels[1].clone()),
        )
        .map_err(|e| StudioError::CorruptStore(format!("slider {}: {e}", self.id)))?;
        Ok(dim
            .with_pole_items(self.pole_a.clone(), self.pole_b.clone())
            .with_model_id(self.model_id.clone()))
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct SliderFile {
    sliders: Vec<SliderRecord>,
}

fn model_id_of(dir: &Path) -> String {
    absolute(dir)
        .ok()
        .and_then(|d| d.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_default()
}

fn read_sliders(dir: &Path) -> Result<SliderFile> {
    if !dir.join(MANIFEST).is_file() {
        return Err(StudioError::UnknownModel(dir.display().to_string()));
    }
    let path = dir.join(SLIDERS);
    match fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes)
            .map_err(|e| StudioError::CorruptStore(format!("sliders.json: {e}"))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(SliderFile::default()),
        Err(e) => Err(StudioError::io(&path)(e)),
    }
}

/// Appends `dim` to the model's slider list and returns its id.
///
/// Without an explicit id the next free `s<N>` is used.
pub fn save_slider(dim: &Dimension, model_dir: &Path, id: Option<&str>) -> Result<String> {
    let mut file = read_sliders(model_dir)?;
    let taken = |candidate: &str| file.sliders.iter().any(|s| s.id == candidate);
    let id = match id {
        Some(id) if taken(id) => return Err(StudioError::DuplicateSlider(id.to_string())),
        Some(id) => id.to_string(),
        None => (file.sliders.len() + 1..)
            .map(|n| format!("s{n}"))
            .find(|c| !taken(c))
            .expect("unbounded id range"),
    };
    let narrow = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<_>>();
    let model_id = if dim.model_id().is_empty() {
        model_id_of(model_dir)
    } else {
        dim.model_id().to_string()
    };
    file.sliders.push(SliderRecord {
        id: id.clone(),
        model_id,
        labels: [dim.labels().a.clone(), dim.labels().b.clone()],
        pole_a: dim.pole_a_items().to_vec(),
        pole_b: dim.pole_b_items().to_vec(),
        axis_unit: narrow(dim.axis_unit()),
        midpoint: narrow(dim.midpoint()),
        half_span: dim.half_span() as f32,
    });
    let bytes = serde_json::to_vec_pretty(&file).expect("sliders serialize");
    let path = model_dir.join(SLIDERS);
    let tmp = model_dir.join(format!(".{SLIDERS}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(StudioError::io(&tmp))?;
    fs::rename(&tmp, &path).map_err(StudioError::io(&path))?;
    Ok(id)
}

/// Slider records in creation order.
pub fn list_sliders(model_dir: &Path) -> Result<Vec<SliderRecord>> {
    Ok(read_sliders(model_dir)?.sliders)
}

pub fn load_slider(model_dir: &Path, id: &str) -> Result<Dimension> {
    read_sliders(model_dir)?
        .sliders
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| StudioError::UnknownSlider(id.to_string()))?
        .to_dimension()
}
