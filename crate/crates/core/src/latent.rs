use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::truncated_svd;

/// Grayscale image, row-major, pixels in `[0, 1]` (binary32).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("image sides must be positive".into()));
        }
        Error::check_len(width * height, pixels.len())?;
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig("pixels must lie in [0, 1]".into()));
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }
}

/// Linear latent model over flattened images: a mean image plus `q`
/// orthonormal principal directions.
///
/// Parameters are stored in binary32 so a saved model reloads bit-exactly;
/// encode and decode accumulate in binary64.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentImageModel {
    width: usize,
    height: usize,
    mean: Vec<f32>,
    components: Vec<f32>,
    singular_values: Vec<f32>,
    n_train: usize,
}

impl LatentImageModel {
    /// Fits the top-`q` principal components of the mean-centred image set.
    ///
    /// Components come from the SVD of the centred data matrix, ordered by
    /// non-increasing singular value, with the largest-magnitude entry of
    /// each made positive.
    pub fn fit(images: &[Image], q: usize) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| Error::InsufficientData("at least two images are required".into()))?;
        let (width, height) = (first.width, first.height);
        let n = width * height;
        for img in images {
            if img.width != width || img.height != height {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: img.width * img.height,
                });
            }
        }
        let count = images.len();
        if count < 2 {
            return Err(Error::InsufficientData("at least two images are required".into()));
        }
        let max_q = (count - 1).min(n);
        if q < 1 || q > max_q {
            return Err(Error::InsufficientData(format!(
                "q must be in 1..={max_q} for {count} images of {n} pixels, got {q}"
            )));
        }

        let mut mean = alloc::vec![0.0f64; n];
        for img in images {
            mean.iter_mut().zip(&img.pixels).for_each(|(m, &p)| *m += p as f64);
        }
        mean.iter_mut().for_each(|m| *m /= count as f64);

        let mut centered = Vec::with_capacity(count * n);
        for img in images {
            centered.extend(img.pixels.iter().zip(&mean).map(|(&p, m)| p as f64 - m));
        }
        let svd = truncated_svd(count, n, &centered, q);

        Ok(LatentImageModel {
            width,
            height,
            mean: mean.iter().map(|&m| m as f32).collect(),
            components: svd
                .right_vectors
                .iter()
                .flat_map(|v| v.iter().map(|&x| x as f32))
                .collect(),
            singular_values: svd.singular_values.iter().map(|&s| s as f32).collect(),
            n_train: count,
        })
    }

    /// Reassembles a model from stored parameters, checking shapes.
    pub fn from_parts(
        width: usize,
        height: usize,
        mean: Vec<f32>,
        components: Vec<f32>,
        singular_values: Vec<f32>,
        n_train: usize,
    ) -> Result<Self> {
        let n = width * height;
        let q = singular_values.len();
        Error::check_len(n, mean.len())?;
        Error::check_len(q * n, components.len())?;
        if n == 0 || q == 0 {
            return Err(Error::InsufficientData("empty latent model".into()));
        }
        Ok(LatentImageModel {
            width,
            height,
            mean,
            components,
            singular_values,
            n_train,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn q(&self) -> usize {
        self.singular_values.len()
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn mean(&self) -> &[f32] {
        &self.mean
    }

    /// Row-major `q x n` component matrix.
    pub fn components(&self) -> &[f32] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &[f32] {
        let n = self.pixel_count();
        &self.components[i * n..(i + 1) * n]
    }

    pub fn singular_values(&self) -> &[f32] {
        &self.singular_values
    }

    /// `z = C (x - mean)`.
    pub fn encode(&self, image: &Image) -> Result<Vec<f64>> {
        if image.width != self.width || image.height != self.height {
            return Err(Error::DimensionMismatch {
                expected: self.pixel_count(),
                found: image.width * image.height,
            });
        }
        let centered: Vec<f64> = image
            .pixels
            .iter()
            .zip(&self.mean)
            .map(|(&p, &m)| p as f64 - m as f64)
            .collect();
        Ok((0..self.q())
            .map(|i| {
                self.component(i)
                    .iter()
                    .zip(&centered)
                    .map(|(&c, &x)| c as f64 * x)
                    .sum()
            })
            .collect())
    }

    /// `mean + C^T z` without clamping; values may leave `[0, 1]`.
    pub fn decode_unclamped(&self, z: &[f64]) -> Result<Vec<f64>> {
        Error::check_len(self.q(), z.len())?;
        let mut out: Vec<f64> = self.mean.iter().map(|&m| m as f64).collect();
        for (i, &zi) in z.iter().enumerate() {
            out.iter_mut()
                .zip(self.component(i))
                .for_each(|(o, &c)| *o += c as f64 * zi);
        }
        Ok(out)
    }

    /// Decodes a latent vector, saturating each pixel to `[0, 1]`.
    pub fn decode(&self, z: &[f64]) -> Result<Image> {
        let pixels = self
            .decode_unclamped(z)?
            .into_iter()
            .map(|p| if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) as f32 })
            .collect();
        Ok(Image {
            width: self.width,
            height: self.height,
            pixels,
        })
    }
}
