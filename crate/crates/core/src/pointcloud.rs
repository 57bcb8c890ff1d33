use alloc::string::String;
use alloc::vec::Vec;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::linalg::{dot, truncated_svd};
use crate::slider::Dimension;

/// Output of [`pca_2d`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection2d {
    pub mean: Vec<f64>,
    /// The two leading principal directions, orthonormal.
    pub basis: [Vec<f64>; 2],
    pub coords: Vec<[f64; 2]>,
}

impl Projection2d {
    pub fn project(&self, x: &[f64]) -> [f64; 2] {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        [dot(&self.basis[0], &centered), dot(&self.basis[1], &centered)]
    }
}

/// Projects the rows of a row-major `rows x cols` matrix onto their top two
/// principal components.
pub fn pca_2d(rows: usize, cols: usize, data: &[f64]) -> Result<Projection2d> {
    if rows < 3 || cols < 2 {
        return Err(Error::InsufficientData(alloc::format!(
            "need at least 3 points of dimension 2, got {rows} x {cols}"
        )));
    }
    Error::check_len(rows * cols, data.len())?;
    let mut mean = alloc::vec![0.0; cols];
    for r in data.chunks(cols) {
        mean.iter_mut().zip(r).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    let centered: Vec<f64> = data
        .chunks(cols)
        .flat_map(|r| r.iter().zip(&mean).map(|(x, m)| x - m))
        .collect();
    let svd = truncated_svd(rows, cols, &centered, 2);
    let mut vectors = svd.right_vectors.into_iter();
    let basis = [vectors.next().unwrap_or_default(), vectors.next().unwrap_or_default()];
    let coords = centered
        .chunks(cols)
        .map(|r| [dot(&basis[0], r), dot(&basis[1], r)])
        .collect();
    Ok(Projection2d {
        mean,
        basis,
        coords,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CloudPoint {
    pub label: String,
    pub x: f32,
    pub y: f32,
    /// Position on the slider used to build the cloud, if any.
    pub coord: Option<f32>,
}

/// Pole centroids projected into the plane of the cloud.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisAnnotation {
    pub pole_a_label: String,
    pub pole_b_label: String,
    pub a_xy: [f32; 2],
    pub b_xy: [f32; 2],
}

/// Flattened, annotated view of an embedding space.
///
/// `basis` and `mean` let a consumer project extra points into the same
/// plane: `xy = basis · (v - mean)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
    pub axis: Option<AxisAnnotation>,
    pub basis: [Vec<f32>; 2],
    pub mean: Vec<f32>,
}

/// Builds a 2D cloud of the `max_points` most frequent words.
///
/// The vocabulary is already sorted by frequency, so this takes its first
/// `max_points` entries.
pub fn build_point_cloud(
    model: &EmbeddingModel,
    dim: Option<&Dimension>,
    max_points: usize,
) -> Result<PointCloud> {
    if max_points < 3 {
        return Err(Error::InvalidConfig("max_points must be at least 3".into()));
    }
    let d = model.dim();
    if let Some(slider) = dim {
        Error::check_len(d, slider.len())?;
    }
    let count = max_points.min(model.vocab().len());
    if count < 3 {
        return Err(Error::InsufficientData(alloc::format!(
            "a point cloud needs at least 3 words, the vocabulary has {count}"
        )));
    }
    let data: Vec<f64> = model.input_vectors()[..count * d]
        .iter()
        .map(|&x| x as f64)
        .collect();
    let proj = pca_2d(count, d, &data)?;

    let points = proj
        .coords
        .iter()
        .enumerate()
        .map(|(i, xy)| {
            let coord = dim.map(|s| s.coordinate(model.row(i))).transpose()?;
            Ok(CloudPoint {
                label: model.vocab().words()[i].clone(),
                x: xy[0] as f32,
                y: xy[1] as f32,
                coord: coord.map(|c| c as f32),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let axis = dim.map(|s| {
        let to32 = |p: [f64; 2]| [p[0] as f32, p[1] as f32];
        AxisAnnotation {
            pole_a_label: s.labels().a.clone(),
            pole_b_label: s.labels().b.clone(),
            a_xy: to32(proj.project(&s.centroid_a())),
            b_xy: to32(proj.project(&s.centroid_b())),
        }
    });

    let to32 = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<_>>();
    Ok(PointCloud {
        points,
        axis,
        basis: [to32(&proj.basis[0]), to32(&proj.basis[1])],
        mean: to32(&proj.mean),
    })
}
