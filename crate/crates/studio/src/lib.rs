//! Persistence, file formats, HTTP service and CLI around `slider-core`.

pub mod cli;
pub mod error;
pub mod pgm;
pub mod service;
pub mod store;
pub mod wire;

pub use error::{Result, StudioError};
