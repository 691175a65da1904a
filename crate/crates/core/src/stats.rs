//! Distributional characterization of texture layers: Haar detail
//! statistics, Kolmogorov-Smirnov tests for Gaussianity and uniform
//! spectral phase, and phase randomization surrogates.

use std::f64::consts::PI;

use rand::Rng;
use rustfft::num_complex::Complex;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::diffusion::{separate, DiffusionSettings, ResolvedDiffusionSettings};
use crate::error::{Error, Result};
use crate::fft::{conjugate_bin, fft2, half_spectrum_bins, ifft2};
use crate::image::GrayImage;
use crate::rng::RngSeed;

/// One-level orthonormal Haar subbands. The image is cropped to even
/// dimensions (odd trailing row/column dropped); each subband is
/// `floor(w/2) x floor(h/2)` row-major.
#[derive(Debug, Clone)]
pub struct HaarSubbands {
    pub width: usize,
    pub height: usize,
    pub ll: Vec<f64>,
    pub lh: Vec<f64>,
    pub hl: Vec<f64>,
    pub hh: Vec<f64>,
}

/// The three detail subbands pooled into one sample, `[LH | HL | HH]`.
#[derive(Debug, Clone)]
pub struct WaveletDetail {
    coefficients: Vec<f64>,
    band_len: usize,
}

impl WaveletDetail {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn lh(&self) -> &[f64] {
        &self.coefficients[..self.band_len]
    }

    pub fn hl(&self) -> &[f64] {
        &self.coefficients[self.band_len..2 * self.band_len]
    }

    pub fn hh(&self) -> &[f64] {
        &self.coefficients[2 * self.band_len..]
    }
}

/// One-level orthonormal Haar transform of `img`.
pub fn haar_level1(img: &GrayImage) -> Result<HaarSubbands> {
    if img.width() < 2 || img.height() < 2 {
        return Err(Error::TooSmall(format!(
            "Haar transform needs at least 2x2, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let (w2, h2) = (img.width() / 2, img.height() / 2);
    let n = w2 * h2;
    let mut ll = Vec::with_capacity(n);
    let mut lh = Vec::with_capacity(n);
    let mut hl = Vec::with_capacity(n);
    let mut hh = Vec::with_capacity(n);
    for by in 0..h2 {
        for bx in 0..w2 {
            let a = img.get(2 * bx, 2 * by);
            let b = img.get(2 * bx + 1, 2 * by);
            let c = img.get(2 * bx, 2 * by + 1);
            let d = img.get(2 * bx + 1, 2 * by + 1);
            ll.push((a + b + c + d) / 2.0);
            lh.push((a + b - c - d) / 2.0);
            hl.push((a - b + c - d) / 2.0);
            hh.push((a - b - c + d) / 2.0);
        }
    }
    Ok(HaarSubbands {
        width: w2,
        height: h2,
        ll,
        lh,
        hl,
        hh,
    })
}

/// Pooled level-1 detail coefficients of `img`.
pub fn haar_detail(img: &GrayImage) -> Result<WaveletDetail> {
    let sub = haar_level1(img)?;
    let band_len = sub.lh.len();
    let mut coefficients = sub.lh;
    coefficients.extend(sub.hl);
    coefficients.extend(sub.hh);
    Ok(WaveletDetail {
        coefficients,
        band_len,
    })
}

/// Fourth-moment shape statistics. `plain` is `m4 / m2^2` (3 for a
/// Gaussian); `excess` subtracts 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kurtosis {
    pub plain: f64,
    pub excess: f64,
}

/// Sample kurtosis from central moments.
pub fn kurtosis(x: &[f64]) -> Result<Kurtosis> {
    if x.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "kurtosis needs at least 4 samples, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let plain = m4 / (m2 * m2);
    Ok(Kurtosis {
        plain,
        excess: plain - 3.0,
    })
}

/// Outcome of a one-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsOutcome {
    /// Sup-distance between the empirical and hypothesized CDFs.
    pub statistic: f64,
    /// Rejection threshold at `alpha`.
    pub critical: f64,
    pub alpha: f64,
    /// `statistic < critical`: the null hypothesis is not rejected.
    pub accepted: bool,
    /// Sample count.
    pub n: usize,
}

impl KsOutcome {
    fn from_statistic(statistic: f64, critical: f64, alpha: f64, n: usize) -> Self {
        Self {
            statistic,
            critical,
            alpha,
            accepted: statistic < critical,
            n,
        }
    }
}

/// Sup-distance between the empirical CDF of `sorted` and `cdf`.
pub fn ks_statistic_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic two-sided KS critical value `c(alpha) / sqrt(n)`,
/// `c(0.05) = 1.358`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Tabulated Lilliefors critical values (normality with estimated mean and
/// variance), in the finite-sample form `c(alpha) / (sqrt(n) - 0.01 + 0.85/sqrt(n))`.
pub fn lilliefors_critical(alpha: f64, n: usize) -> Result<f64> {
    const TABLE: [(f64, f64); 5] = [
        (0.20, 0.741),
        (0.15, 0.775),
        (0.10, 0.819),
        (0.05, 0.895),
        (0.01, 1.035),
    ];
    let c = TABLE
        .iter()
        .find(|(a, _)| (a - alpha).abs() < 1e-9)
        .map(|&(_, c)| c)
        .ok_or_else(|| {
            Error::InvalidParameter(format!("no Lilliefors table entry for alpha = {alpha}"))
        })?;
    let sqrt_n = (n as f64).sqrt();
    Ok(c / (sqrt_n - 0.01 + 0.85 / sqrt_n))
}

fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn gaussian_ks_statistic(x: &[f64]) -> Result<(f64, usize)> {
    assert!(x.len() >= 8, "KS test needs at least 8 samples");
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = x.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((ks_statistic_sorted(&z, standard_normal_cdf), x.len()))
}

/// KS test of Gaussianity after standardizing by the sample mean and
/// standard deviation, judged against the plain asymptotic critical value.
pub fn ks_test_gaussian(x: &[f64], alpha: f64) -> Result<KsOutcome> {
    let (d, n) = gaussian_ks_statistic(x)?;
    Ok(KsOutcome::from_statistic(d, ks_critical(alpha, n), alpha, n))
}

/// Same statistic as [`ks_test_gaussian`], judged against Lilliefors
/// critical values, which account for the estimated parameters.
pub fn ks_test_gaussian_lilliefors(x: &[f64], alpha: f64) -> Result<KsOutcome> {
    let (d, n) = gaussian_ks_statistic(x)?;
    Ok(KsOutcome::from_statistic(
        d,
        lilliefors_critical(alpha, n)?,
        alpha,
        n,
    ))
}

/// KS test of a sample against Uniform[-pi, pi].
pub fn ks_test_uniform_angles(phases: &[f64], alpha: f64) -> KsOutcome {
    let mut sorted = phases.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = ks_statistic_sorted(&sorted, |p| (p + PI) / (2.0 * PI));
    KsOutcome::from_statistic(d, ks_critical(alpha, sorted.len()), alpha, sorted.len())
}

/// Spectral phases and magnitudes of an image, full grid, row-major.
#[derive(Debug, Clone)]
pub struct PhaseSpectrum {
    pub width: usize,
    pub height: usize,
    /// Angles in [-pi, pi] per bin.
    pub phases: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

pub fn phase_spectrum(img: &GrayImage) -> PhaseSpectrum {
    let spec = fft2(img);
    PhaseSpectrum {
        width: img.width(),
        height: img.height(),
        phases: spec.iter().map(|c| c.arg()).collect(),
        magnitudes: spec.iter().map(|c| c.norm()).collect(),
    }
}

/// Phases of the non-redundant half-spectrum, excluding DC and the
/// self-conjugate bins whose phases are pinned to 0 or pi.
pub fn spectral_phases(img: &GrayImage) -> Vec<f64> {
    let spec = fft2(img);
    half_spectrum_bins(img.width(), img.height())
        .into_iter()
        .map(|(kx, ky)| spec[ky * img.width() + kx].arg())
        .collect()
}

/// Tests whether the spatial phase of `img` is uniform on [-pi, pi].
pub fn ks_test_uniform_phase(img: &GrayImage, alpha: f64) -> Result<KsOutcome> {
    if img.width() < 8 || img.height() < 8 {
        return Err(Error::TooSmall(format!(
            "phase test needs at least 8x8, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok(ks_test_uniform_angles(&spectral_phases(img), alpha))
}

/// Replaces the spectral phases of `img` with i.i.d. Uniform[-pi, pi] draws
/// while keeping every magnitude, yielding a surrogate with the same power
/// spectrum. Hermitian symmetry is enforced so the inverse transform is
/// real; DC and self-conjugate bins keep their (real) values.
pub fn randomize_phase(img: &GrayImage, seed: RngSeed) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut spec = fft2(img);
    let mut rng = seed.rng();
    for (kx, ky) in half_spectrum_bins(w, h) {
        let phi = rng.random_range(-PI..PI);
        let mag = spec[ky * w + kx].norm();
        let v = Complex::from_polar(mag, phi);
        spec[ky * w + kx] = v;
        let (cx, cy) = conjugate_bin(kx, ky, w, h);
        spec[cy * w + cx] = v.conj();
    }
    ifft2(&mut spec, w, h);
    let real_norm: f64 = spec.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    let imag_norm: f64 = spec.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    debug_assert!(
        imag_norm <= 1e-9 * real_norm.max(1e-300),
        "imaginary residue {imag_norm} vs output norm {real_norm}"
    );
    GrayImage::new(w, h, spec.iter().map(|c| c.re).collect()).expect("real surrogate")
}

/// One distributional test slot in a report: either an outcome or an
/// explicit marker that the input was degenerate.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum DistTest {
    Tested(KsOutcome),
    Degenerate { reason: String },
}

impl DistTest {
    pub fn accepted(&self) -> Option<bool> {
        match self {
            DistTest::Tested(o) => Some(o.accepted),
            DistTest::Degenerate { .. } => None,
        }
    }
}

/// Gaussianity of the raw image vs its texture layer, plus phase uniformity
/// of the texture layer.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianityReport {
    /// KS Gaussianity of the raw image's Haar detail coefficients.
    pub raw: DistTest,
    /// Same test on the separated texture layer.
    pub texture: DistTest,
    /// Phase-uniformity test on the texture layer.
    pub texture_phase: DistTest,
    pub raw_kurtosis: Option<Kurtosis>,
    pub texture_kurtosis: Option<Kurtosis>,
    pub alpha: f64,
    pub lilliefors: bool,
    pub settings: ResolvedDiffusionSettings,
}

/// Runs the full distributional battery of one image: Gaussianity of the
/// raw detail coefficients, then Gaussianity and phase uniformity of the
/// separated texture layer.
pub fn gaussianity_report(
    img: &GrayImage,
    settings: &DiffusionSettings,
    alpha: f64,
    lilliefors: bool,
) -> Result<GaussianityReport> {
    let gauss = |x: &[f64]| {
        if lilliefors {
            ks_test_gaussian_lilliefors(x, alpha)
        } else {
            ks_test_gaussian(x, alpha)
        }
    };
    let to_dist = |r: Result<KsOutcome>, reason: &str| match r {
        Ok(o) => Ok(DistTest::Tested(o)),
        Err(Error::ZeroVariance) => Ok(DistTest::Degenerate {
            reason: reason.to_string(),
        }),
        Err(e) => Err(e),
    };

    let raw_detail = haar_detail(img)?;
    let raw = to_dist(gauss(raw_detail.coefficients()), "degenerate image")?;
    let raw_kurtosis = kurtosis(raw_detail.coefficients()).ok();

    let sep = separate(img, settings).map_err(|e| e.at_stage("separate"))?;
    let tex_detail = haar_detail(&sep.texture)?;
    let texture = to_dist(gauss(tex_detail.coefficients()), "degenerate texture layer")?;
    let texture_kurtosis = kurtosis(tex_detail.coefficients()).ok();
    let texture_phase = if matches!(texture, DistTest::Degenerate { .. }) {
        DistTest::Degenerate {
            reason: "degenerate texture layer".to_string(),
        }
    } else {
        DistTest::Tested(ks_test_uniform_phase(&sep.texture, alpha)?)
    };

    Ok(GaussianityReport {
        raw,
        texture,
        texture_phase,
        raw_kurtosis,
        texture_kurtosis,
        alpha,
        lilliefors,
        settings: sep.settings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn haar_annihilates_constants() {
        let img = GrayImage::filled(6, 6, 2.5).unwrap();
        let d = haar_detail(&img).unwrap();
        assert_eq!(d.coefficients().len(), 3 * 3 * 3);
        assert!(d.coefficients().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn haar_block_formulas() {
        let (a, b, c, d) = (1.0, 2.0, 4.0, 8.0);
        let img = GrayImage::new(2, 2, vec![a, b, c, d]).unwrap();
        let s = haar_level1(&img).unwrap();
        assert_eq!(s.ll[0], (a + b + c + d) / 2.0);
        assert_eq!(s.lh[0], (a + b - c - d) / 2.0);
        assert_eq!(s.hl[0], (a - b + c - d) / 2.0);
        assert_eq!(s.hh[0], (a - b - c + d) / 2.0);
    }

    #[test]
    fn haar_is_orthonormal() {
        let img = GrayImage::from_fn(16, 12, |x, y| ((x * 31 + y * 7) % 13) as f64 * 0.1).unwrap();
        let s = haar_level1(&img).unwrap();
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let total = sq(&s.ll) + sq(&s.lh) + sq(&s.hl) + sq(&s.hh);
        let input: f64 = img.data().iter().map(|x| x * x).sum();
        assert!((total - input).abs() <= 1e-9 * input);
    }

    #[test]
    fn haar_detail_variance_preserved_on_white_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let img = GrayImage::from_fn(64, 64, |_, _| StandardNormal.sample(&mut rng)).unwrap();
        let d = haar_detail(&img).unwrap();
        let n = d.coefficients().len() as f64;
        let mean = d.coefficients().iter().sum::<f64>() / n;
        let var = d.coefficients().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let in_n = img.data().len() as f64;
        let in_mean = img.data().iter().sum::<f64>() / in_n;
        let in_var = img.data().iter().map(|v| (v - in_mean) * (v - in_mean)).sum::<f64>() / in_n;
        assert!((var - in_var).abs() / in_var < 0.03, "{var} vs {in_var}");
    }

    #[test]
    fn haar_rejects_tiny() {
        let img = GrayImage::filled(1, 5, 0.0).unwrap();
        assert!(haar_detail(&img).is_err());
    }

    #[test]
    fn kurtosis_two_point() {
        let k = kurtosis(&[-1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!(k.plain, 1.0);
        assert_eq!(k.excess, -2.0);
    }

    #[test]
    fn kurtosis_gaussian_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..1_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let k = kurtosis(&x).unwrap();
        assert!((k.plain - 3.0).abs() < 0.05, "plain {}", k.plain);
    }

    #[test]
    fn kurtosis_laplace_monte_carlo() {
        // Inverse-CDF Laplace sampling; plain kurtosis of Laplace is 6.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let u: f64 = rng.random_range(-0.5..0.5);
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            })
            .collect();
        let k = kurtosis(&x).unwrap();
        assert!((k.plain - 6.0).abs() < 0.2, "plain {}", k.plain);
    }

    #[test]
    fn kurtosis_errors() {
        assert!(matches!(
            kurtosis(&[1.0, 1.0, 1.0, 1.0]),
            Err(Error::ZeroVariance)
        ));
        assert!(kurtosis(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn ks_sup_distance_hand_case() {
        let d = ks_statistic_sorted(&[0.25, 0.5, 0.75], |x| x);
        assert_eq!(d, 0.25);
    }

    #[test]
    fn ks_critical_value_at_five_percent() {
        assert!((ks_critical(0.05, 1) - 1.358).abs() < 1e-3);
    }

    #[test]
    fn ks_invariant_under_monotone_reparameterization() {
        // Mapping data and CDF through the same strictly monotone transform
        // leaves the statistic unchanged.
        let x = [0.1, 0.2, 0.4, 0.45, 0.7, 0.9];
        let d1 = ks_statistic_sorted(&x, |v| v);
        let y: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
        let d2 = ks_statistic_sorted(&y, |v| v.cbrt());
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn gaussian_test_accepts_normal_rejects_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let normal: Vec<f64> = (0..4096).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(ks_test_gaussian(&normal, 0.05).unwrap().accepted);
        let uniform: Vec<f64> = (0..4096).map(|_| rng.random_range(0.0..1.0)).collect();
        assert!(!ks_test_gaussian(&uniform, 0.05).unwrap().accepted);
    }

    #[test]
    fn gaussian_test_zero_variance() {
        let x = vec![1.0; 32];
        assert!(matches!(
            ks_test_gaussian(&x, 0.05),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn lilliefors_critical_below_plain_ks() {
        let n = 1000;
        assert!(lilliefors_critical(0.05, n).unwrap() < ks_critical(0.05, n));
        assert!(lilliefors_critical(0.03, n).is_err());
    }

    #[test]
    fn uniform_phase_calibration() {
        // True-null draws accepted at roughly the nominal rate.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 1000;
        let accepted = (0..trials)
            .filter(|_| {
                let phases: Vec<f64> = (0..2000).map(|_| rng.random_range(-PI..PI)).collect();
                ks_test_uniform_angles(&phases, 0.05).accepted
            })
            .count();
        let rate = accepted as f64 / trials as f64;
        assert!((rate - 0.95).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn coherent_square_rejected() {
        let img = GrayImage::from_fn(64, 64, |x, y| {
            if (24..40).contains(&x) && (24..40).contains(&y) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(!ks_test_uniform_phase(&img, 0.05).unwrap().accepted);
    }

    #[test]
    fn phase_test_needs_8x8() {
        let img = GrayImage::filled(4, 9, 0.0).unwrap();
        assert!(ks_test_uniform_phase(&img, 0.05).is_err());
    }

    #[test]
    fn randomize_phase_preserves_magnitudes() {
        let img = GrayImage::from_fn(32, 24, |x, y| ((x * 3 + y * 11) % 17) as f64 / 17.0).unwrap();
        let out = randomize_phase(&img, RngSeed(1));
        let m_in = phase_spectrum(&img).magnitudes;
        let m_out = phase_spectrum(&out).magnitudes;
        let norm: f64 = m_in.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff: f64 = m_in
            .iter()
            .zip(&m_out)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-9 * norm, "relative magnitude change {}", diff / norm);
    }

    #[test]
    fn randomize_phase_twice_same_magnitudes() {
        let img = GrayImage::from_fn(16, 16, |x, y| (x as f64 - y as f64) * 0.05).unwrap();
        let a = randomize_phase(&img, RngSeed(10));
        let b = randomize_phase(&img, RngSeed(20));
        let ma = phase_spectrum(&a).magnitudes;
        let mb = phase_spectrum(&b).magnitudes;
        let norm: f64 = ma.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff: f64 = ma.iter().zip(&mb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        assert!(diff <= 1e-9 * norm);
    }

    #[test]
    fn randomize_phase_constant_image() {
        let img = GrayImage::filled(16, 16, 0.7).unwrap();
        let out = randomize_phase(&img, RngSeed(2));
        for &v in out.data() {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_spectrum_is_hermitian() {
        let img = GrayImage::from_fn(8, 6, |x, y| ((x * 5 + y * 11) % 7) as f64).unwrap();
        let ps = phase_spectrum(&img);
        for ky in 0..6 {
            for kx in 0..8 {
                let (cx, cy) = ((8 - kx) % 8, (6 - ky) % 6);
                let m = ps.magnitudes[ky * 8 + kx];
                let mc = ps.magnitudes[cy * 8 + cx];
                assert!((m - mc).abs() < 1e-9 * m.max(1.0));
                if m > 1e-9 {
                    let p = ps.phases[ky * 8 + kx];
                    let pc = ps.phases[cy * 8 + cx];
                    let wrapped = (p + pc).rem_euclid(2.0 * PI);
                    assert!(
                        wrapped < 1e-9 || (2.0 * PI - wrapped) < 1e-9,
                        "phases not conjugate at ({kx},{ky})"
                    );
                }
            }
        }
    }

    #[test]
    fn randomize_phase_deterministic() {
        let img = GrayImage::from_fn(16, 16, |x, y| ((x ^ y) & 3) as f64).unwrap();
        assert_eq!(
            randomize_phase(&img, RngSeed(5)),
            randomize_phase(&img, RngSeed(5))
        );
    }

    #[test]
    fn gaussianity_report_degenerate_texture() {
        let img = GrayImage::filled(16, 16, 0.5).unwrap();
        let rep = gaussianity_report(&img, &DiffusionSettings::default(), 0.05, false).unwrap();
        match &rep.texture {
            DistTest::Degenerate { reason } => assert_eq!(reason, "degenerate texture layer"),
            _ => panic!("expected degenerate marker"),
        }
        assert!(matches!(rep.texture_phase, DistTest::Degenerate { .. }));
        assert!(rep.texture_kurtosis.is_none());
    }
}
