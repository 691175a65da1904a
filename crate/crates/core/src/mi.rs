//! Histogram-based entropy and mutual information, measured between
//! pyramid scales and between image patches.
//!
//! All quantities are plug-in estimates from joint histograms, in bits.
//! Quantization ranges are always taken jointly over the pair being
//! compared, so every measure is invariant to adding a constant to the
//! intensities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{quantize_with_range, GrayImage, QuantizedImage};

/// Histogram settings for the MI estimators. The binning range is always
/// the joint min/max of the pair under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramSpec {
    pub bins: usize,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self { bins: 256 }
    }
}

impl HistogramSpec {
    pub fn new(bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidParameter("bins must be >= 2".into()));
        }
        Ok(Self { bins })
    }
}

/// Compensated accumulator; entropy sums must be stable enough that
/// algebraically equal routes agree to ~1e-12 bits.
#[derive(Default)]
struct KahanSum {
    s: f64,
    c: f64,
}

impl KahanSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }
}

fn entropy_from_counts<'a>(counts: impl Iterator<Item = &'a u64>, total: u64) -> f64 {
    let n = total as f64;
    let mut acc = KahanSum::default();
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            acc.add(-(p * p.log2()));
        }
    }
    acc.s
}

/// Plug-in Shannon entropy of a code sequence, in bits.
pub fn entropy_codes(codes: &[u32]) -> f64 {
    assert!(!codes.is_empty(), "entropy of an empty sequence");
    let levels = *codes.iter().max().unwrap() as usize + 1;
    let mut counts = vec![0u64; levels];
    for &c in codes {
        counts[c as usize] += 1;
    }
    entropy_from_counts(counts.iter(), codes.len() as u64)
}

/// Plug-in Shannon entropy of a quantized image, in bits.
pub fn entropy(q: &QuantizedImage) -> f64 {
    entropy_codes(q.codes())
}

/// Entropies and mutual information of a paired sample, all derived from
/// one joint histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiValues {
    /// `H(X) + H(Y) - H(X,Y)`, clamped at 0 (the plug-in estimate is a KL
    /// divergence and only rounding can push it negative).
    pub mi: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
}

/// Joint histogram of two equally long code sequences.
struct JointHistogram {
    counts: Vec<u64>,
    lx: usize,
    ly: usize,
    total: u64,
}

impl JointHistogram {
    fn build(x: &[u32], y: &[u32], lx: usize, ly: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        assert!(!x.is_empty(), "mutual information of empty sequences");
        let mut counts = vec![0u64; lx * ly];
        for (&a, &b) in x.iter().zip(y) {
            debug_assert!((a as usize) < lx && (b as usize) < ly);
            counts[a as usize * ly + b as usize] += 1;
        }
        Ok(Self {
            counts,
            lx,
            ly,
            total: x.len() as u64,
        })
    }

    fn h_xy(&self) -> f64 {
        entropy_from_counts(self.counts.iter(), self.total)
    }

    fn h_x(&self) -> f64 {
        let rows: Vec<u64> = (0..self.lx)
            .map(|i| self.counts[i * self.ly..(i + 1) * self.ly].iter().sum())
            .collect();
        entropy_from_counts(rows.iter(), self.total)
    }

    fn h_y(&self) -> f64 {
        let mut cols = vec![0u64; self.ly];
        for i in 0..self.lx {
            for (j, c) in cols.iter_mut().enumerate() {
                *c += self.counts[i * self.ly + j];
            }
        }
        entropy_from_counts(cols.iter(), self.total)
    }
}

/// Plug-in mutual information of two code sequences, in bits.
///
/// `levels_x` and `levels_y` bound the codes; every returned quantity comes
/// from the same joint histogram.
pub fn mutual_information(x: &[u32], y: &[u32], levels_x: usize, levels_y: usize) -> Result<MiValues> {
    let joint = JointHistogram::build(x, y, levels_x, levels_y)?;
    let h_x = joint.h_x();
    let h_y = joint.h_y();
    let h_xy = joint.h_xy();
    Ok(MiValues {
        mi: (h_x + h_y - h_xy).max(0.0),
        h_x,
        h_y,
        h_xy,
    })
}

/// Gaussian-style image pyramid: level 1 is the original; each coarser
/// level is binomially smoothed and decimated by 2 per axis.
#[derive(Debug, Clone)]
pub struct Pyramid {
    pub levels: Vec<GrayImage>,
}

/// Separable 5-tap binomial smoothing (1,4,6,4,1)/16 with replicated
/// boundaries.
pub fn binomial_smooth(img: &GrayImage) -> GrayImage {
    const K: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let (w, h) = (img.width(), img.height());
    let d = img.data();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for (t, k) in K.iter().enumerate() {
                let xi = (x as isize + t as isize - 2).clamp(0, w as isize - 1) as usize;
                s += k * d[y * w + xi];
            }
            tmp[y * w + x] = s;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for (t, k) in K.iter().enumerate() {
                let yi = (y as isize + t as isize - 2).clamp(0, h as isize - 1) as usize;
                s += k * tmp[yi * w + x];
            }
            out[y * w + x] = s;
        }
    }
    GrayImage::new(w, h, out).expect("smoothing keeps values finite")
}

fn decimate2(img: &GrayImage) -> GrayImage {
    let (w2, h2) = (img.width() / 2, img.height() / 2);
    GrayImage::from_fn(w2, h2, |x, y| img.get(2 * x, 2 * y)).expect("halved dims nonzero")
}

/// Builds `levels` pyramid images (level 1 = original).
pub fn build_pyramid(img: &GrayImage, levels: usize) -> Result<Pyramid> {
    if levels < 2 {
        return Err(Error::InvalidParameter("pyramid needs >= 2 levels".into()));
    }
    let mut out = vec![img.clone()];
    for l in 1..levels {
        let prev = &out[l - 1];
        if prev.width() / 2 < 2 || prev.height() / 2 < 2 {
            return Err(Error::TooManyLevels(format!(
                "level {} would be {}x{}",
                l + 1,
                prev.width() / 2,
                prev.height() / 2
            )));
        }
        let next = decimate2(&binomial_smooth(prev));
        out.push(next);
    }
    Ok(Pyramid { levels: out })
}

/// Nearest-neighbor upsampling of `coarse` to `(w, h)`; introduces no new
/// intensity values, so the coarse level's histogram is untouched.
fn upsample_nn(coarse: &GrayImage, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        let cx = (x / 2).min(coarse.width() - 1);
        let cy = (y / 2).min(coarse.height() - 1);
        coarse.get(cx, cy)
    })
    .expect("upsample target nonzero")
}

/// MI of one consecutive level pair. `h_cond` is the conditional entropy of
/// the finer level given the coarser one; by construction
/// `mi == h_fine - h_cond` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelMi {
    pub mi: f64,
    pub h_fine: f64,
    pub h_cond: f64,
}

/// Pairs the finer level with the nearest-neighbor-upsampled coarser level
/// pixel by pixel, quantizes both over their joint range, and reads the
/// entropies off the joint histogram.
pub fn mi_between_levels(fine: &GrayImage, coarse: &GrayImage, spec: &HistogramSpec) -> Result<LevelMi> {
    let up = upsample_nn(coarse, fine.width(), fine.height());
    let (lo_f, hi_f) = fine.min_max();
    let (lo_c, hi_c) = up.min_max();
    let (lo, hi) = (lo_f.min(lo_c), hi_f.max(hi_c));
    let qf = quantize_with_range(fine, spec.bins, lo, hi);
    let qc = quantize_with_range(&up, spec.bins, lo, hi);
    let joint = JointHistogram::build(qf.codes(), qc.codes(), spec.bins, spec.bins)?;
    let h_fine = joint.h_x();
    let h_coarse = joint.h_y();
    let h_joint = joint.h_xy();
    // H(fine | coarse) = H(joint) - H(coarse), clamped into [0, H(fine)].
    let h_cond = (h_joint - h_coarse).clamp(0.0, h_fine);
    Ok(LevelMi {
        mi: h_fine - h_cond,
        h_fine,
        h_cond,
    })
}

/// One row of a scale-wise MI report. `n` labels the pair by its finer
/// member, `n = 1` being the pair at the original resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalePairMi {
    pub n: usize,
    pub fine_width: usize,
    pub fine_height: usize,
    pub mi: f64,
    pub h_fine: f64,
    pub h_cond: f64,
}

/// Scale-wise MI across a pyramid, coarsest pair first (descending `n`),
/// matching the orientation self-similarity tables are usually printed in.
#[derive(Debug, Clone, Serialize)]
pub struct MiScaleReport {
    pub bins: usize,
    pub pairs: Vec<ScalePairMi>,
}

/// MI between every pair of consecutive pyramid levels of `img`.
pub fn mi_scales(img: &GrayImage, levels: usize, spec: &HistogramSpec) -> Result<MiScaleReport> {
    let pyramid = build_pyramid(img, levels)?;
    let mut pairs = Vec::with_capacity(levels - 1);
    for k in (0..levels - 1).rev() {
        let fine = &pyramid.levels[k];
        let lm = mi_between_levels(fine, &pyramid.levels[k + 1], spec)?;
        pairs.push(ScalePairMi {
            n: k + 1,
            fine_width: fine.width(),
            fine_height: fine.height(),
            mi: lm.mi,
            h_fine: lm.h_fine,
            h_cond: lm.h_cond,
        });
    }
    Ok(MiScaleReport {
        bins: spec.bins,
        pairs,
    })
}

/// Median and interquartile range of the off-diagonal normalized MI values
/// at one pyramid level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffDiagonalSummary {
    pub count: usize,
    pub median: Option<f64>,
    pub iqr: Option<f64>,
}

/// Patch-wise normalized MI at one pyramid level.
#[derive(Debug, Clone, Serialize)]
pub struct PatchLevelReport {
    /// Pyramid level, 1 = original resolution.
    pub level: usize,
    pub width: usize,
    pub height: usize,
    /// Patch grid dimensions.
    pub patches_x: usize,
    pub patches_y: usize,
    /// Row-major `MI(P_i, P_j) / H(P_i)` for all ordered pairs; `None` when
    /// `H(P_i) = 0`. Values are stored unclamped.
    pub matrix: Vec<Option<f64>>,
    pub off_diagonal: OffDiagonalSummary,
    /// Display histogram of off-diagonal values over [0, 1] plus an
    /// overflow bin for values that exceed 1 through the asymmetric
    /// normalization; only the histogram clamps.
    pub histogram: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MiPatchReport {
    pub patch: usize,
    pub bins: usize,
    pub levels: Vec<PatchLevelReport>,
}

/// Number of bins in the off-diagonal display histogram ([0,1] in 20 bins
/// plus one overflow bin).
pub const PATCH_HISTOGRAM_BINS: usize = 21;

fn extract_patch(img: &GrayImage, px: usize, py: usize, patch: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(patch * patch);
    for y in 0..patch {
        for x in 0..patch {
            out.push(img.get(px * patch + x, py * patch + y));
        }
    }
    out
}

fn quantize_codes(vals: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<u32> {
    let img = GrayImage::new(vals.len(), 1, vals.to_vec()).expect("patch values finite");
    quantize_with_range(&img, bins, lo, hi).codes().to_vec()
}

fn min_max(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn quartile_sorted(sorted: &[f64], q: f64) -> f64 {
    // Linear interpolation between order statistics.
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Normalized MI between all ordered pairs of non-overlapping patches, per
/// pyramid level. Each pair is paired pixel-by-pixel at identical
/// within-patch coordinates and quantized over the pair's joint range;
/// the normalization divisor is the first patch's entropy.
pub fn mi_patches(
    img: &GrayImage,
    patch: usize,
    levels: usize,
    spec: &HistogramSpec,
) -> Result<MiPatchReport> {
    if patch < 8 {
        return Err(Error::InvalidParameter(format!(
            "patch must be >= 8, got {patch}"
        )));
    }
    let pyramid = build_pyramid(img, levels)?;
    for (k, level) in pyramid.levels.iter().enumerate() {
        if level.width() < patch || level.height() < patch {
            return Err(Error::PatchTooLarge(format!(
                "level {} is {}x{}, patch is {patch}",
                k + 1,
                level.width(),
                level.height()
            )));
        }
    }

    let mut out = Vec::with_capacity(levels);
    for (k, level) in pyramid.levels.iter().enumerate() {
        let (px, py) = (level.width() / patch, level.height() / patch);
        let n_patches = px * py;
        let patches: Vec<Vec<f64>> = (0..n_patches)
            .map(|p| extract_patch(level, p % px, p / px, patch))
            .collect();
        let ranges: Vec<(f64, f64)> = patches.iter().map(|p| min_max(p)).collect();

        let mut matrix = vec![None; n_patches * n_patches];
        let mut off_diag = Vec::new();
        for i in 0..n_patches {
            for j in 0..n_patches {
                let lo = ranges[i].0.min(ranges[j].0);
                let hi = ranges[i].1.max(ranges[j].1);
                let ci = quantize_codes(&patches[i], spec.bins, lo, hi);
                let cj = quantize_codes(&patches[j], spec.bins, lo, hi);
                let joint = JointHistogram::build(&ci, &cj, spec.bins, spec.bins)?;
                let h_i = joint.h_x();
                if h_i <= 0.0 {
                    continue;
                }
                let h_cond = (joint.h_xy() - joint.h_y()).clamp(0.0, h_i);
                let norm = (h_i - h_cond) / h_i;
                matrix[i * n_patches + j] = Some(norm);
                if i != j {
                    off_diag.push(norm);
                }
            }
        }

        let mut histogram = vec![0u32; PATCH_HISTOGRAM_BINS];
        for &v in &off_diag {
            let bin = if v >= 1.0 {
                if v > 1.0 {
                    PATCH_HISTOGRAM_BINS - 1
                } else {
                    PATCH_HISTOGRAM_BINS - 2
                }
            } else {
                ((v * 20.0).floor() as usize).min(PATCH_HISTOGRAM_BINS - 2)
            };
            histogram[bin] += 1;
        }

        off_diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let off_diagonal = if off_diag.is_empty() {
            OffDiagonalSummary {
                count: 0,
                median: None,
                iqr: None,
            }
        } else {
            OffDiagonalSummary {
                count: off_diag.len(),
                median: Some(median_sorted(&off_diag)),
                iqr: Some(quartile_sorted(&off_diag, 0.75) - quartile_sorted(&off_diag, 0.25)),
            }
        };

        out.push(PatchLevelReport {
            level: k + 1,
            width: level.width(),
            height: level.height(),
            patches_x: px,
            patches_y: py,
            matrix,
            off_diagonal,
            histogram,
        });
    }
    Ok(MiPatchReport {
        patch,
        bins: spec.bins,
        levels: out,
    })
}
