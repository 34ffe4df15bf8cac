//! Diversity-driven sample selection for labeling.
//!
//! Samples are embedded with a small self-supervised autoencoder, and a
//! labeling budget is spent by farthest-point sampling on Euclidean distances
//! in that latent space. The crate also carries the pieces needed to check
//! the effect: a seeded random baseline, PCA for 2-D export, a synthetic
//! imbalanced mixture generator and a k-NN learning-curve harness.

pub mod autoencoder;
pub mod datagen;
mod error;
pub mod evaluation;
pub mod io;
pub mod linalg;
pub mod pca;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
pub use linalg::DataMatrix;
pub use rng::Rng;
