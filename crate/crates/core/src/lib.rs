//! Statistical self-similarity analysis of natural stochastic textures.
//!
//! The crate separates stochastic texture from structural content by
//! nonlinear diffusion, characterizes the texture layer (Gaussianity of
//! wavelet detail coefficients, uniformity of the spectral phase), and
//! quantifies self-similarity three ways: mutual information between
//! pyramid scales, normalized mutual information between patches, and a
//! mutual-information functional of gray-level co-occurrence matrices.
//! An exact fractional Brownian synthesizer provides the self-similar
//! reference against which all measures are validated.

pub mod composite;
pub mod diffusion;
pub mod error;
pub mod fbm;
mod fft;
pub mod glcm;
pub mod image;
pub mod io;
mod linalg;
pub mod mi;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, ErrorClass, Result};
pub use image::{quantize, quantize_with_range, GrayImage, QuantizedImage};
pub use rng::RngSeed;
