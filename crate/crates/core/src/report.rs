//! End-to-end analysis of one image: separation, distributional tests, and
//! all three self-similarity measures on the texture layer, bundled with
//! the exact settings that produced them.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::diffusion::{separate, DiffusionSettings};
use crate::error::{Error, Result};
use crate::glcm::{glcm_mi_profile, OffsetMi};
use crate::image::GrayImage;
use crate::mi::{mi_patches, mi_scales, HistogramSpec, MiScaleReport, OffDiagonalSummary};
use crate::stats::{gaussianity_report, GaussianityReport};

/// Everything needed to reproduce a report run.
#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    pub diffusion: DiffusionSettings,
    pub alpha: f64,
    pub lilliefors: bool,
    /// Histogram bins for entropy/MI estimation.
    pub bins: usize,
    /// Pyramid depth for scale-wise MI.
    pub scale_levels: usize,
    /// Patch side and pyramid depth for patch-wise MI.
    pub patch: usize,
    pub patch_levels: usize,
    /// Gray-level count for the co-occurrence measure.
    pub glcm_levels: usize,
    /// Offsets, as distances `d`, swept both horizontally and diagonally.
    pub glcm_distances: Vec<i32>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            diffusion: DiffusionSettings::default(),
            alpha: 0.05,
            lilliefors: false,
            bins: 256,
            scale_levels: 4,
            patch: 32,
            patch_levels: 3,
            glcm_levels: 32,
            glcm_distances: vec![1, 2, 5, 10],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDescriptor {
    pub path: String,
    pub width: usize,
    pub height: usize,
    pub sha256: String,
}

/// Per-level median/IQR digest of the patch-MI matrices.
#[derive(Debug, Clone, Serialize)]
pub struct PatchMiSummary {
    pub patch: usize,
    pub bins: usize,
    pub levels: Vec<PatchLevelSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchLevelSummary {
    pub level: usize,
    pub width: usize,
    pub height: usize,
    pub off_diagonal: OffDiagonalSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlcmProfiles {
    pub levels: usize,
    pub horizontal: Vec<OffsetMi>,
    pub diagonal: Vec<OffsetMi>,
}

/// The full analysis of one image. Field order is declaration order, so
/// serialized keys are stable run to run.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub input: InputDescriptor,
    pub settings: ReportConfig,
    pub gaussianity: GaussianityReport,
    pub scale_mi: MiScaleReport,
    pub patch_mi: Option<PatchMiSummary>,
    /// Present when the patch analysis was skipped (levels smaller than the
    /// patch), with the reason.
    pub patch_mi_skipped: Option<String>,
    pub glcm: GlcmProfiles,
}

/// Loads an image and runs the full pipeline.
pub fn run_report(path: impl AsRef<Path>, config: &ReportConfig) -> Result<ReportDocument> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).at_stage("load"))?;
    let img = crate::io::decode_image(&bytes).map_err(|e| e.at_stage("load"))?;
    let descriptor = InputDescriptor {
        path: path.display().to_string(),
        width: img.width(),
        height: img.height(),
        sha256: hex_digest(&bytes),
    };
    run_report_on(&img, descriptor, config)
}

/// Runs the pipeline on an already-loaded image.
pub fn run_report_on(
    img: &GrayImage,
    input: InputDescriptor,
    config: &ReportConfig,
) -> Result<ReportDocument> {
    let spec = HistogramSpec::new(config.bins)?;

    let gaussianity = gaussianity_report(img, &config.diffusion, config.alpha, config.lilliefors)
        .map_err(|e| e.at_stage("stats"))?;

    let sep = separate(img, &config.diffusion).map_err(|e| e.at_stage("separate"))?;
    let texture = &sep.texture;

    let scale_mi =
        mi_scales(texture, config.scale_levels, &spec).map_err(|e| e.at_stage("mi-scales"))?;

    let (patch_mi, patch_mi_skipped) =
        match mi_patches(texture, config.patch, config.patch_levels, &spec) {
            Ok(rep) => {
                let levels = rep
                    .levels
                    .iter()
                    .map(|l| PatchLevelSummary {
                        level: l.level,
                        width: l.width,
                        height: l.height,
                        off_diagonal: l.off_diagonal,
                    })
                    .collect();
                (
                    Some(PatchMiSummary {
                        patch: rep.patch,
                        bins: rep.bins,
                        levels,
                    }),
                    None,
                )
            }
            Err(e @ Error::PatchTooLarge(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e.at_stage("mi-patches")),
        };

    let glcm = GlcmProfiles {
        levels: config.glcm_levels,
        horizontal: glcm_mi_profile(
            texture,
            config.glcm_levels,
            &offsets_from(&config.glcm_distances, false),
        )
        .map_err(|e| e.at_stage("glcm"))?,
        diagonal: glcm_mi_profile(
            texture,
            config.glcm_levels,
            &offsets_from(&config.glcm_distances, true),
        )
        .map_err(|e| e.at_stage("glcm"))?,
    };

    Ok(ReportDocument {
        input,
        settings: config.clone(),
        gaussianity,
        scale_mi,
        patch_mi,
        patch_mi_skipped,
        glcm,
    })
}

fn offsets_from(distances: &[i32], diagonal: bool) -> Vec<crate::glcm::GlcmOffset> {
    distances
        .iter()
        .map(|&d| crate::glcm::GlcmOffset {
            dx: d,
            dy: if diagonal { d } else { 0 },
        })
        .collect()
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Table-style aggregate over a batch of reports: the share of images whose
/// raw detail coefficients pass the Gaussianity test, whose texture layers
/// pass it, and whose texture phases test uniform.
#[derive(Debug, Clone, Serialize)]
pub struct BatchAggregate {
    pub images: usize,
    pub gaussian_raw_pass_pct: f64,
    pub gaussian_texture_pass_pct: f64,
    pub uniform_phase_pass_pct: f64,
}

pub fn aggregate(reports: &[ReportDocument]) -> BatchAggregate {
    let pct = |f: &dyn Fn(&ReportDocument) -> Option<bool>| {
        let total = reports.len();
        if total == 0 {
            return 0.0;
        }
        let passed = reports.iter().filter(|r| f(r) == Some(true)).count();
        100.0 * passed as f64 / total as f64
    };
    BatchAggregate {
        images: reports.len(),
        gaussian_raw_pass_pct: pct(&|r| r.gaussianity.raw.accepted()),
        gaussian_texture_pass_pct: pct(&|r| r.gaussianity.texture.accepted()),
        uniform_phase_pass_pct: pct(&|r| r.gaussianity.texture_phase.accepted()),
    }
}
