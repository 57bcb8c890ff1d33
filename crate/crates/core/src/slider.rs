//! User-defined dimensions ("sliders") and probing along them.
//!
//! A dimension is the line through two pole centroids. Positions on it are
//! normalized so that pole A sits at `t = -1`, pole B at `t = +1` and the
//! midpoint at `0`; values outside `[-1, 1]` extrapolate past the poles.

use alloc::string::String;
use alloc::vec::Vec;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::latent::{Image, LatentImageModel};
use crate::linalg::dot;

/// Pole separations shorter than this cannot define a direction.
const MIN_POLE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PoleLabels {
    pub a: String,
    pub b: String,
}

impl PoleLabels {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        PoleLabels {
            a: a.into(),
            b: b.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    axis_unit: Vec<f64>,
    midpoint: Vec<f64>,
    half_span: f64,
    labels: PoleLabels,
    pole_a_items: Vec<String>,
    pole_b_items: Vec<String>,
    model_id: String,
}

/// A word returned by a probe, with its own position on the dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub word: String,
    pub similarity: f64,
    pub coord: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeOutput {
    Associations(Vec<Association>),
    Image(Image),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub t: f64,
    pub probe_point: Vec<f64>,
    pub output: ProbeOutput,
}

impl Dimension {
    /// Axis from pole A's centroid to pole B's.
    pub fn from_centroids(centroid_a: &[f64], centroid_b: &[f64], labels: PoleLabels) -> Result<Self> {
        Error::check_len(centroid_a.len(), centroid_b.len())?;
        let delta: Vec<f64> = centroid_b.iter().zip(centroid_a).map(|(b, a)| b - a).collect();
        let length = libm::sqrt(dot(&delta, &delta));
        if length.is_nan() || length < MIN_POLE_DISTANCE {
            return Err(Error::DegenerateAxis);
        }
        Ok(Dimension {
            axis_unit: delta.iter().map(|d| d / length).collect(),
            midpoint: centroid_a
                .iter()
                .zip(centroid_b)
                .map(|(a, b)| (a + b) / 2.0)
                .collect(),
            half_span: length / 2.0,
            labels,
            pole_a_items: Vec::new(),
            pole_b_items: Vec::new(),
            model_id: String::new(),
        })
    }

    /// Word poles: each centroid is the mean of the raw input vectors.
    pub fn from_words(
        model: &EmbeddingModel,
        pole_a: &[&str],
        pole_b: &[&str],
        labels: PoleLabels,
    ) -> Result<Self> {
        let centroid_a = word_centroid(model, pole_a)?;
        let centroid_b = word_centroid(model, pole_b)?;
        let dim = Self::from_centroids(&centroid_a, &centroid_b, labels)?;
        Ok(dim.with_pole_items(to_strings(pole_a), to_strings(pole_b)))
    }

    /// Image classes: each centroid is the mean latent code of the class.
    /// Items default to `a0, a1, ...` and `b0, b1, ...`.
    pub fn from_images(
        model: &LatentImageModel,
        class_a: &[Image],
        class_b: &[Image],
        labels: PoleLabels,
    ) -> Result<Self> {
        let centroid_a = latent_centroid(model, class_a)?;
        let centroid_b = latent_centroid(model, class_b)?;
        let items = |prefix: char, n: usize| (0..n).map(|i| alloc::format!("{prefix}{i}")).collect();
        let dim = Self::from_centroids(&centroid_a, &centroid_b, labels)?;
        Ok(dim.with_pole_items(items('a', class_a.len()), items('b', class_b.len())))
    }

    /// Rebuilds a stored dimension. The axis is renormalized, since storage
    /// may have rounded it.
    pub fn from_parts(
        axis: Vec<f64>,
        midpoint: Vec<f64>,
        half_span: f64,
        labels: PoleLabels,
    ) -> Result<Self> {
        Error::check_len(axis.len(), midpoint.len())?;
        let length = libm::sqrt(dot(&axis, &axis));
        if !(length > 0.0 && length.is_finite()) || !(half_span > 0.0 && half_span.is_finite()) {
            return Err(Error::DegenerateAxis);
        }
        Ok(Dimension {
            axis_unit: axis.iter().map(|x| x / length).collect(),
            midpoint,
            half_span,
            labels,
            pole_a_items: Vec::new(),
            pole_b_items: Vec::new(),
            model_id: String::new(),
        })
    }

    pub fn with_pole_items(mut self, a: Vec<String>, b: Vec<String>) -> Self {
        self.pole_a_items = a;
        self.pole_b_items = b;
        self
    }

    pub fn with_model_id(mut self, id: impl Into<String>) -> Self {
        self.model_id = id.into();
        self
    }

    /// The same line with the poles exchanged; every coordinate changes sign.
    pub fn swapped(&self) -> Self {
        Dimension {
            axis_unit: self.axis_unit.iter().map(|x| -x).collect(),
            midpoint: self.midpoint.clone(),
            half_span: self.half_span,
            labels: PoleLabels::new(self.labels.b.clone(), self.labels.a.clone()),
            pole_a_items: self.pole_b_items.clone(),
            pole_b_items: self.pole_a_items.clone(),
            model_id: self.model_id.clone(),
        }
    }

    pub fn axis_unit(&self) -> &[f64] {
        &self.axis_unit
    }

    pub fn midpoint(&self) -> &[f64] {
        &self.midpoint
    }

    pub fn half_span(&self) -> f64 {
        self.half_span
    }

    pub fn labels(&self) -> &PoleLabels {
        &self.labels
    }

    pub fn pole_a_items(&self) -> &[String] {
        &self.pole_a_items
    }

    pub fn pole_b_items(&self) -> &[String] {
        &self.pole_b_items
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn len(&self) -> usize {
        self.axis_unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_unit.is_empty()
    }

    /// Point at position `t` on the axis line.
    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.midpoint
            .iter()
            .zip(&self.axis_unit)
            .map(|(m, a)| m + t * self.half_span * a)
            .collect()
    }

    pub fn centroid_a(&self) -> Vec<f64> {
        self.point_at(-1.0)
    }

    pub fn centroid_b(&self) -> Vec<f64> {
        self.point_at(1.0)
    }

    /// `((x - midpoint) . axis) / half_span`.
    pub fn coordinate<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<f64> {
        Error::check_len(self.len(), x.len())?;
        let along: f64 = x
            .iter()
            .zip(&self.midpoint)
            .zip(&self.axis_unit)
            .map(|((&xi, m), a)| (xi.into() - m) * a)
            .sum();
        Ok(along / self.half_span)
    }

    /// Moves `anchor` along the axis so its coordinate becomes `t`; the
    /// components orthogonal to the axis are untouched.
    pub fn place<T: Copy + Into<f64>>(&self, anchor: &[T], t: f64) -> Result<Vec<f64>> {
        Error::check_len(self.len(), anchor.len())?;
        let along: f64 = anchor
            .iter()
            .zip(&self.midpoint)
            .zip(&self.axis_unit)
            .map(|((&x, m), a)| (x.into() - m) * a)
            .sum();
        let shift = t * self.half_span - along;
        Ok(anchor
            .iter()
            .zip(&self.axis_unit)
            .map(|(&x, a)| x.into() + shift * a)
            .collect())
    }

    /// Places `base` at position `t` and lists its `k` nearest words.
    ///
    /// The base word is excluded from its own associations; pole words are
    /// not.
    pub fn probe_words(
        &self,
        model: &EmbeddingModel,
        base: &str,
        t: f64,
        k: usize,
    ) -> Result<ProbeResult> {
        let anchor = model.vector(base)?;
        let probe_point = self.place(anchor, t)?;
        let associations = model
            .nearest_neighbors(&probe_point, k, &[base])?
            .into_iter()
            .map(|hit| {
                Ok(Association {
                    word: String::from(hit.word),
                    similarity: hit.similarity,
                    coord: self.coordinate(model.row(hit.index))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbeResult {
            t,
            probe_point,
            output: ProbeOutput::Associations(associations),
        })
    }

    /// Decodes the image at position `t`, anchored at `base`'s code or, when
    /// no base is given, at the midpoint.
    pub fn probe_image(
        &self,
        model: &LatentImageModel,
        t: f64,
        base: Option<&Image>,
    ) -> Result<ProbeResult> {
        let anchor = match base {
            Some(img) => model.encode(img)?,
            None => self.midpoint.clone(),
        };
        let probe_point = self.place(&anchor, t)?;
        let image = model.decode(&probe_point)?;
        Ok(ProbeResult {
            t,
            probe_point,
            output: ProbeOutput::Image(image),
        })
    }

    /// Coordinates of `words` (default: the whole vocabulary), sorted
    /// ascending. Equal coordinates keep vocabulary order.
    pub fn project_vocabulary(
        &self,
        model: &EmbeddingModel,
        words: Option<&[&str]>,
    ) -> Result<Vec<(String, f64)>> {
        let indices: Vec<usize> = match words {
            Some(list) => list
                .iter()
                .map(|w| model.vocab().index_of(w).ok_or_else(|| Error::UnknownWord(String::from(*w))))
                .collect::<Result<_>>()?,
            None => (0..model.vocab().len()).collect(),
        };
        let mut projected = indices
            .into_iter()
            .map(|i| Ok((i, self.coordinate(model.row(i))?)))
            .collect::<Result<Vec<_>>>()?;
        projected.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        Ok(projected
            .into_iter()
            .map(|(i, c)| (model.vocab().words()[i].clone(), c))
            .collect())
    }
}

fn to_strings(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| String::from(*w)).collect()
}

fn word_centroid(model: &EmbeddingModel, words: &[&str]) -> Result<Vec<f64>> {
    if words.is_empty() {
        return Err(Error::InsufficientData("pole word list is empty".into()));
    }
    let mut sum = alloc::vec![0.0f64; model.dim()];
    for w in words {
        let v = model.vector(w)?;
        sum.iter_mut().zip(v).for_each(|(s, &x)| *s += x as f64);
    }
    let n = words.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

fn latent_centroid(model: &LatentImageModel, images: &[Image]) -> Result<Vec<f64>> {
    if images.is_empty() {
        return Err(Error::InsufficientData("image class is empty".into()));
    }
    let mut sum = alloc::vec![0.0f64; model.q()];
    for img in images {
        let z = model.encode(img)?;
        sum.iter_mut().zip(&z).for_each(|(s, x)| *s += x);
    }
    let n = images.len() as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}
