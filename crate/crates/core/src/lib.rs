//! Latent-space models and user-defined "slider" dimensions.
//!
//! Two pipelines share one slider engine:
//!
//! * **words**: [`tokenize`] a corpus, train a skip-gram negative-sampling
//!   [`EmbeddingModel`], then query vectors and nearest neighbours.
//! * **images**: fit a linear [`LatentImageModel`] (mean image plus
//!   principal components) and encode/decode grayscale images.
//!
//! A [`Dimension`] is built from two pole sets in either latent space. Probing
//! a dimension at position `t` places an anchor at that coordinate of the axis
//! (poles sit at `-1` and `+1`) and returns word associations or a decoded
//! image. [`build_point_cloud`] flattens an embedding space to 2D.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, persistence and
//! the service live in `slider-studio`.
#![cfg_attr(not(test), no_std)]
#![deny(missing_debug_implementations)]

extern crate alloc;

mod embedding;
mod error;
mod latent;
pub mod linalg;
mod pointcloud;
mod scalar;
mod sgns;
mod slider;
mod text;

pub use embedding::{cosine, EmbeddingModel, Neighbor};
pub use error::{Error, Result};
pub use latent::{Image, LatentImageModel};
pub use pointcloud::{pca_2d, AxisAnnotation, CloudPoint, PointCloud, Projection2d};
pub use scalar::Scalar;
pub use sgns::{
    sgns_step, train_embeddings, train_embeddings_with_report, NegativeTable, SgnsGradients,
    TrainingConfig, TrainingReport,
};
pub use slider::{Association, Dimension, PoleLabels, ProbeOutput, ProbeResult};
pub use text::{tokenize, tokenize_bytes, Vocabulary};

pub use pointcloud::build_point_cloud;
