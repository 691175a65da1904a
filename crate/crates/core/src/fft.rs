//! 2D FFT helpers shared by the spectral-phase operations.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::image::GrayImage;

/// Forward 2D DFT; row-major `height x width` spectrum.
pub(crate) fn fft2(img: &GrayImage) -> Vec<Complex<f64>> {
    let (w, h) = (img.width(), img.height());
    let mut spec: Vec<Complex<f64>> = img.data().iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_forward(w);
    for row in spec.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_forward(h);
    let mut col = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = spec[y * w + x];
        }
        col_fft.process(&mut col);
        for y in 0..h {
            spec[y * w + x] = col[y];
        }
    }
    spec
}

/// Inverse 2D DFT, normalized by `width * height`.
pub(crate) fn ifft2(spec: &mut [Complex<f64>], w: usize, h: usize) {
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft_inverse(w);
    for row in spec.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_inverse(h);
    let mut col = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = spec[y * w + x];
        }
        col_fft.process(&mut col);
        for y in 0..h {
            spec[y * w + x] = col[y];
        }
    }
    let norm = 1.0 / (w * h) as f64;
    for v in spec.iter_mut() {
        *v *= norm;
    }
}

/// Index of the conjugate-symmetric partner of bin `(kx, ky)`.
#[inline]
pub(crate) fn conjugate_bin(kx: usize, ky: usize, w: usize, h: usize) -> (usize, usize) {
    ((w - kx) % w, (h - ky) % h)
}

/// Bins equal to their own conjugate partner; for a real image their
/// spectrum values are real, so their phases are pinned to 0 or pi.
#[inline]
pub(crate) fn is_self_conjugate(kx: usize, ky: usize, w: usize, h: usize) -> bool {
    conjugate_bin(kx, ky, w, h) == (kx, ky)
}

/// One representative per conjugate pair, in row-major scan order, with DC
/// and all self-conjugate bins excluded.
pub(crate) fn half_spectrum_bins(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut bins = Vec::with_capacity(w * h / 2);
    for ky in 0..h {
        for kx in 0..w {
            if is_self_conjugate(kx, ky, w, h) {
                continue;
            }
            let (cx, cy) = conjugate_bin(kx, ky, w, h);
            if (ky, kx) < (cy, cx) {
                bins.push((kx, ky));
            }
        }
    }
    bins
}
