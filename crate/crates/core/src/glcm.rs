//! Gray-level co-occurrence matrices and the mutual information they carry.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{quantize, GrayImage, QuantizedImage};
use crate::mi::HistogramSpec;

/// Spatial offset defining which pixel pairs are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GlcmOffset {
    pub dx: i32,
    pub dy: i32,
}

impl GlcmOffset {
    pub fn new(dx: i32, dy: i32) -> Result<Self> {
        if dx == 0 && dy == 0 {
            return Err(Error::InvalidOffset("offset must be nonzero".into()));
        }
        Ok(Self { dx, dy })
    }
}

/// Directed co-occurrence counts `C(i, j)` of code `i` at a base pixel and
/// code `j` at the offset pixel, over every position where both lie in
/// bounds. No symmetrization is applied.
#[derive(Debug, Clone)]
pub struct Glcm {
    levels: usize,
    counts: Vec<u64>,
    total: u64,
}

impl Glcm {
    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.levels + j]
    }

    /// Normalized probability matrix `P = C / sum(C)`.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Accumulates the co-occurrence matrix of `q` for one offset.
pub fn glcm(q: &QuantizedImage, offset: GlcmOffset) -> Result<Glcm> {
    let (w, h) = (q.width() as i64, q.height() as i64);
    let (dx, dy) = (offset.dx as i64, offset.dy as i64);
    if dx.unsigned_abs() as i64 >= w || dy.unsigned_abs() as i64 >= h {
        return Err(Error::InvalidOffset(format!(
            "offset ({}, {}) leaves no valid pairs in a {w}x{h} image",
            offset.dx, offset.dy
        )));
    }
    let p = q.levels();
    let mut counts = vec![0u64; p * p];
    let (x0, x1) = if dx >= 0 { (0, w - dx) } else { (-dx, w) };
    let (y0, y1) = if dy >= 0 { (0, h - dy) } else { (-dy, h) };
    for y in y0..y1 {
        for x in x0..x1 {
            let i = q.get(x as usize, y as usize) as usize;
            let j = q.get((x + dx) as usize, (y + dy) as usize) as usize;
            counts[i * p + j] += 1;
        }
    }
    let total = counts.iter().sum();
    Ok(Glcm {
        levels: p,
        counts,
        total,
    })
}

/// Mutual information carried by a co-occurrence matrix, in bits:
/// `sum_ij P(i,j) log2(P(i,j) / (P_i(i) P_j(j)))`, zero cells contributing 0.
///
/// Terms are accumulated per unordered index pair, which makes the result
/// exactly invariant under transposition (and hence under offset negation).
pub fn glcm_mi(g: &Glcm) -> Result<f64> {
    if g.total == 0 {
        return Err(Error::EmptyGlcm);
    }
    let p = g.levels;
    let probs = g.probabilities();
    let mut row = vec![0.0f64; p];
    let mut col = vec![0.0f64; p];
    for i in 0..p {
        for j in 0..p {
            let v = probs[i * p + j];
            row[i] += v;
            col[j] += v;
        }
    }
    let term = |i: usize, j: usize| -> f64 {
        let pij = probs[i * p + j];
        if pij > 0.0 {
            pij * (pij / (row[i] * col[j])).log2()
        } else {
            0.0
        }
    };
    let mut s = 0.0;
    let mut c = 0.0;
    let mut kahan = |v: f64| {
        let y = v - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    };
    for i in 0..p {
        kahan(term(i, i));
    }
    for i in 0..p {
        for j in (i + 1)..p {
            kahan(term(i, j) + term(j, i));
        }
    }
    Ok(s.max(0.0))
}

/// MI of one offset in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffsetMi {
    pub dx: i32,
    pub dy: i32,
    pub mi: f64,
}

/// Quantizes `img` once to `levels` gray codes and evaluates the GLCM MI at
/// each offset. Signed layers are handled by the per-image min/max
/// quantization range.
pub fn glcm_mi_profile(
    img: &GrayImage,
    levels: usize,
    offsets: &[GlcmOffset],
) -> Result<Vec<OffsetMi>> {
    HistogramSpec::new(levels)?;
    let q = quantize(img, levels);
    offsets
        .iter()
        .map(|&o| {
            Ok(OffsetMi {
                dx: o.dx,
                dy: o.dy,
                mi: glcm_mi(&glcm(&q, o)?)?,
            })
        })
        .collect()
}

/// Offsets `(d, 0)` for `d = 1..=d_max`.
pub fn horizontal_sweep(d_max: i32) -> Vec<GlcmOffset> {
    (1..=d_max).map(|d| GlcmOffset { dx: d, dy: 0 }).collect()
}

/// Offsets `(d, d)` for `d = 1..=d_max`.
pub fn diagonal_sweep(d_max: i32) -> Vec<GlcmOffset> {
    (1..=d_max).map(|d| GlcmOffset { dx: d, dy: d }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::QuantizedImage;

    fn quantized(w: usize, h: usize, levels: usize, codes: Vec<u32>) -> QuantizedImage {
        QuantizedImage::new(w, h, levels, codes).unwrap()
    }

    #[test]
    fn two_by_two_hand_enumeration() {
        let q = quantized(2, 2, 2, vec![0, 0, 1, 1]);
        let g = glcm(&q, GlcmOffset { dx: 1, dy: 0 }).unwrap();
        assert_eq!(g.count(0, 0), 1);
        assert_eq!(g.count(1, 1), 1);
        assert_eq!(g.count(0, 1), 0);
        assert_eq!(g.count(1, 0), 0);
        assert_eq!(g.total(), 2);
        let p = g.probabilities();
        assert_eq!(p, vec![0.5, 0.0, 0.0, 0.5]);
        // diag(1/2, 1/2) carries exactly one bit.
        assert_eq!(glcm_mi(&g).unwrap(), 1.0);
    }

    #[test]
    fn constant_image_single_cell() {
        let q = quantized(4, 3, 4, vec![0; 12]);
        let g = glcm(&q, GlcmOffset { dx: 2, dy: 1 }).unwrap();
        assert_eq!(g.count(0, 0), g.total());
        assert_eq!(g.total(), (4 - 2) * (3 - 1));
        assert_eq!(glcm_mi(&g).unwrap(), 0.0);
    }

    #[test]
    fn checkerboard_hand_enumeration() {
        let codes: Vec<u32> = (0..16).map(|i| ((i % 4 + i / 4) % 2) as u32).collect();
        let q = quantized(4, 4, 2, codes);
        let g = glcm(&q, GlcmOffset { dx: 1, dy: 0 }).unwrap();
        assert_eq!(g.total(), 12);
        assert_eq!(g.count(0, 1), 6);
        assert_eq!(g.count(1, 0), 6);
        assert_eq!(g.count(0, 0), 0);
        assert_eq!(g.count(1, 1), 0);
    }

    #[test]
    fn pair_count_accounting() {
        let q = quantized(7, 5, 3, (0..35).map(|i| (i % 3) as u32).collect());
        for (dx, dy) in [(1, 0), (-2, 1), (3, -2), (0, 4)] {
            let g = glcm(&q, GlcmOffset { dx, dy }).unwrap();
            let expected = (7 - dx.unsigned_abs() as u64) * (5 - dy.unsigned_abs() as u64);
            assert_eq!(g.total(), expected, "offset ({dx},{dy})");
        }
    }

    #[test]
    fn offset_negation_transposes_counts_and_preserves_mi() {
        let codes: Vec<u32> = (0..48).map(|i| ((i * 7 + 3) % 5) as u32).collect();
        let q = quantized(8, 6, 5, codes);
        let fwd = glcm(&q, GlcmOffset { dx: 2, dy: 0 }).unwrap();
        let rev = glcm(&q, GlcmOffset { dx: -2, dy: 0 }).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(fwd.count(i, j), rev.count(j, i));
            }
        }
        assert_eq!(glcm_mi(&fwd).unwrap(), glcm_mi(&rev).unwrap());
    }

    #[test]
    fn product_joint_has_zero_mi() {
        // Uniform P over all cells: marginals uniform, joint = product.
        let g = Glcm {
            levels: 4,
            counts: vec![3u64; 16],
            total: 48,
        };
        assert_eq!(glcm_mi(&g).unwrap(), 0.0);
    }

    #[test]
    fn invalid_offsets() {
        let q = quantized(4, 4, 2, vec![0; 16]);
        assert!(GlcmOffset::new(0, 0).is_err());
        assert!(glcm(&q, GlcmOffset { dx: 4, dy: 0 }).is_err());
        assert!(glcm(&q, GlcmOffset { dx: 0, dy: -4 }).is_err());
    }

    #[test]
    fn empty_glcm_rejected() {
        let g = Glcm {
            levels: 2,
            counts: vec![0; 4],
            total: 0,
        };
        assert!(matches!(glcm_mi(&g), Err(Error::EmptyGlcm)));
    }

    #[test]
    fn code_preserving_transforms_leave_mi_unchanged() {
        // Monotone intensity maps that keep the codes keep the GLCM; an
        // affine map with a power-of-two scale preserves the codes exactly.
        let img = GrayImage::from_fn(16, 16, |x, y| ((x * 5 + y * 3) % 8) as f64).unwrap();
        let mapped = GrayImage::new(
            16,
            16,
            img.data().iter().map(|v| 2.0 * v + 3.0).collect(),
        )
        .unwrap();
        let qa = quantize(&img, 8);
        let qb = quantize(&mapped, 8);
        assert_eq!(qa.codes(), qb.codes());
        let o = GlcmOffset { dx: 1, dy: 1 };
        assert_eq!(
            glcm_mi(&glcm(&qa, o).unwrap()).unwrap(),
            glcm_mi(&glcm(&qb, o).unwrap()).unwrap()
        );
    }

    #[test]
    fn iid_noise_has_negligible_mi() {
        // Disjoint pixels of white noise are independent; the plug-in
        // estimate is bounded by its bias, (p-1)^2 / (2 n ln 2).
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let img = GrayImage::from_fn(256, 256, |_, _| rng.random_range(0.0..1.0)).unwrap();
        let offsets = [
            GlcmOffset { dx: 1, dy: 0 },
            GlcmOffset { dx: 7, dy: 0 },
            GlcmOffset { dx: 2, dy: 2 },
            GlcmOffset { dx: 5, dy: 5 },
            GlcmOffset { dx: 10, dy: 10 },
        ];
        for o in glcm_mi_profile(&img, 32, &offsets).unwrap() {
            assert!(o.mi < 0.02, "offset ({},{}): MI {}", o.dx, o.dy, o.mi);
        }
    }

    #[test]
    fn profile_runs_sweeps() {
        let img = GrayImage::from_fn(32, 32, |x, y| ((x + 2 * y) % 9) as f64).unwrap();
        let prof = glcm_mi_profile(&img, 8, &diagonal_sweep(3)).unwrap();
        assert_eq!(prof.len(), 3);
        assert!(prof.iter().all(|o| o.mi >= 0.0));
        assert_eq!(horizontal_sweep(2), vec![
            GlcmOffset { dx: 1, dy: 0 },
            GlcmOffset { dx: 2, dy: 0 }
        ]);
    }
}
