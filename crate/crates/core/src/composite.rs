//! Synthetic fixtures: fully-textured composites with known ground-truth
//! layers, and a deterministic structured reference image.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fbm::{synth_field, FbmParams};
use crate::image::GrayImage;
use crate::rng::RngSeed;

/// Structural overlay painted on top of the texture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    /// Right half raised by the amplitude.
    Step,
    /// Centered disk of radius side/4.
    Disk,
    /// Alternating blocks of side/8.
    Checker,
}

/// A texture + structure composite with its ground-truth layers.
#[derive(Debug, Clone)]
pub struct Composite {
    pub image: GrayImage,
    /// The stochastic layer: a synthesized field affinely mapped to [0, 1].
    pub texture_truth: GrayImage,
    /// The deterministic overlay, already scaled by the amplitude.
    pub structure_truth: GrayImage,
}

// Edges are anchored off the even sampling grid; a jump exactly between
// 2x2 blocks is invisible to level-1 Haar details.
fn overlay(kind: StructureKind, side: usize, x: usize, y: usize) -> f64 {
    match kind {
        StructureKind::Step => {
            if x >= (side / 2) | 1 {
                1.0
            } else {
                0.0
            }
        }
        StructureKind::Disk => {
            let c = (side as f64 - 1.0) / 2.0;
            let r = side as f64 / 4.0;
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            if dx * dx + dy * dy <= r * r {
                1.0
            } else {
                0.0
            }
        }
        StructureKind::Checker => {
            let b = (side / 8).max(1);
            if ((x + 1) / b + (y + 1) / b).is_multiple_of(2) {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Synthesizes a self-similar field, maps it to [0, 1], and adds a
/// deterministic structural overlay of the given amplitude. The two layers
/// are returned alongside the composite so tests can compare a separation
/// against ground truth. Amplitude 0 yields pure texture.
pub fn make_composite(
    hurst: f64,
    side: usize,
    kind: StructureKind,
    amplitude: f64,
    seed: RngSeed,
) -> Result<Composite> {
    let params = FbmParams::new(hurst, 1.0)?;
    let field = synth_field(params, side, seed)?;
    let texture_truth = field.grid.normalized_unit();
    let structure_truth =
        GrayImage::from_fn(side, side, |x, y| amplitude * overlay(kind, side, x, y))?;
    let image = GrayImage::new(
        side,
        side,
        texture_truth
            .data()
            .iter()
            .zip(structure_truth.data())
            .map(|(t, s)| t + s)
            .collect(),
    )?;
    Ok(Composite {
        image,
        texture_truth,
        structure_truth,
    })
}

/// Same composite construction reusing an already-synthesized field.
pub fn composite_from_field(
    field: &GrayImage,
    kind: StructureKind,
    amplitude: f64,
) -> Result<Composite> {
    let side = field.width();
    let texture_truth = field.normalized_unit();
    let structure_truth =
        GrayImage::from_fn(side, field.height(), |x, y| amplitude * overlay(kind, side, x, y))?;
    let image = GrayImage::new(
        texture_truth.width(),
        texture_truth.height(),
        texture_truth
            .data()
            .iter()
            .zip(structure_truth.data())
            .map(|(t, s)| t + s)
            .collect(),
    )?;
    Ok(Composite {
        image,
        texture_truth,
        structure_truth,
    })
}

/// Deterministic per-pixel dither in [0, 1), from an integer hash.
fn hash_unit(x: usize, y: usize) -> f64 {
    let h = (x as u64)
        .wrapping_mul(0x9E3779B97F4A7C15)
        .wrapping_add((y as u64).wrapping_mul(0xC2B2AE3D27D4EB4F));
    let h = (h ^ (h >> 31)).wrapping_mul(0xD6E8FEB86659FD93);
    ((h >> 11) as f64) / ((1u64 << 53) as f64)
}

/// Grain amplitude of [`structured_reference`].
pub const REFERENCE_GRAIN: f64 = 0.02;

/// A deterministic piecewise-smooth "scene": large flat regions, a ramp
/// background, hard edges, and a little incoherent fine grain (so the
/// residual layer is not empty, as for a real photograph). A stand-in for
/// edge-dominated images when a structured (non-texture) reference is
/// needed.
pub fn structured_reference(side: usize) -> GrayImage {
    let s = side as f64;
    GrayImage::from_fn(side, side, |x, y| {
        let (xf, yf) = (x as f64 / s, y as f64 / s);
        // Ramp sky.
        let mut v = 0.35 + 0.4 * yf;
        // Dark standing figure.
        if (0.18..0.42).contains(&xf) && (0.38..0.92).contains(&yf) {
            v = 0.08;
        }
        // Head.
        let (dx, dy) = (xf - 0.30, yf - 0.28);
        if dx * dx + dy * dy <= 0.012 {
            v = 0.10;
        }
        // Bright building block with a ledge.
        if (0.58..0.88).contains(&xf) && (0.50..0.86).contains(&yf) {
            v = if yf < 0.56 { 0.95 } else { 0.78 };
        }
        // Thin dark pole.
        if (0.50..0.53).contains(&xf) && yf > 0.30 {
            v = 0.05;
        }
        v + REFERENCE_GRAIN * (hash_unit(x, y) - 0.5)
    })
    .expect("side > 0")
}

/// A deterministic plaid of crossing blocks and grid lines. Its spectral
/// power is spread over many modes, which makes it a stable structured
/// fixture for phase-randomization contrasts.
pub fn structured_plaid(side: usize) -> GrayImage {
    GrayImage::from_fn(side, side, |x, y| {
        let mut v = 0.5;
        if ((x + 1) / 8 + (y + 1) / 8) % 2 == 0 {
            v += 0.25;
        }
        if ((x + 3) / 16 + (y + 5) / 16) % 2 == 0 {
            v -= 0.35;
        }
        if (x + 2) % 32 < 3 || (y + 7) % 32 < 2 {
            v = 0.05;
        }
        v
    })
    .expect("side > 0")
}
