//! Exact synthesis of fractional Brownian paths and 2D fields.
//!
//! Sample paths and fields are drawn as correlated Gaussian vectors whose
//! covariance is evaluated in closed form and factorized exactly (dense
//! Cholesky), so the synthesizer can serve as ground truth for every
//! similarity measure in this crate. The cost is cubic in the number of grid
//! points: a `side x side` field factorizes a `(side^2-1)^2` matrix, which is
//! why `side` is capped at 128 (about 2 GiB and a couple of minutes at the
//! cap).

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::linalg::{cholesky_lower_in_place, lower_matvec};
use crate::rng::RngSeed;

/// Largest supported field side; exact factorization beyond this is not a
/// desk-scale computation.
pub const MAX_FIELD_SIDE: usize = 128;

/// Hurst exponent and base variance of a fractional Brownian process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FbmParams {
    hurst: f64,
    sigma_w2: f64,
}

impl FbmParams {
    pub fn new(hurst: f64, sigma_w2: f64) -> Result<Self> {
        if !hurst.is_finite() || hurst <= 0.0 || hurst >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "hurst must lie in (0, 1), got {hurst}"
            )));
        }
        if !sigma_w2.is_finite() || sigma_w2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma_w2 must be positive, got {sigma_w2}"
            )));
        }
        Ok(Self { hurst, sigma_w2 })
    }

    #[inline]
    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    #[inline]
    pub fn sigma_w2(&self) -> f64 {
        self.sigma_w2
    }
}

/// Gamma via log-gamma, with the reflection formula for negative arguments.
fn gamma(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma(x).exp()
    } else {
        PI / ((PI * x).sin() * ln_gamma(1.0 - x).exp())
    }
}

/// Variance scale `sigma_H^2 = sigma_w^2/2 * cos(pi H)/(pi H) * Gamma(1-2H)`.
///
/// The expression is indeterminate at `H = 1/2`; the analytic limit there is
/// `sigma_w^2 / 2`, which is returned exactly.
pub fn sigma_h2(params: &FbmParams) -> f64 {
    let h = params.hurst;
    if h == 0.5 {
        return params.sigma_w2 / 2.0;
    }
    params.sigma_w2 / 2.0 * (PI * h).cos() / (PI * h) * gamma(1.0 - 2.0 * h)
}

/// Covariance of the 1D process between times `t` and `s`:
/// `sigma_H^2/2 * (|t|^2H + |s|^2H - |t-s|^2H)`.
pub fn fbm_covariance(t: f64, s: f64, params: &FbmParams) -> f64 {
    let two_h = 2.0 * params.hurst;
    sigma_h2(params) / 2.0
        * (t.abs().powf(two_h) + s.abs().powf(two_h) - (t - s).abs().powf(two_h))
}

/// Covariance of the isotropic 2D field between points `x` and `y`; same
/// form as the 1D case with Euclidean norms.
pub fn field_covariance(x: [f64; 2], y: [f64; 2], params: &FbmParams) -> f64 {
    let h = params.hurst;
    let nx = x[0] * x[0] + x[1] * x[1];
    let ny = y[0] * y[0] + y[1] * y[1];
    let d = [x[0] - y[0], x[1] - y[1]];
    let nd = d[0] * d[0] + d[1] * d[1];
    sigma_h2(params) / 2.0 * (nx.powf(h) + ny.powf(h) - nd.powf(h))
}

/// A sampled 1D path on the integer grid `t = 0..n-1`, pinned to 0 at t = 0.
#[derive(Debug, Clone)]
pub struct FbmPath {
    pub params: FbmParams,
    pub samples: Vec<f64>,
}

/// A sampled 2D field on the pixel lattice, pinned to 0 at the grid origin.
#[derive(Debug, Clone)]
pub struct FbmField {
    pub params: FbmParams,
    pub grid: GrayImage,
}

/// Reusable path synthesizer: the covariance factorization is done once,
/// after which each seed costs a matrix-vector product.
pub struct FbmPathSampler {
    params: FbmParams,
    len: usize,
    m: usize,
    chol: Vec<f64>,
}

impl FbmPathSampler {
    pub fn new(params: FbmParams, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "path length must be >= 2, got {n}"
            )));
        }
        // B(0) = 0 is pinned, so only t = 1..n-1 is random.
        let m = n - 1;
        let two_h = 2.0 * params.hurst;
        let half_s = sigma_h2(&params) / 2.0;
        let pow: Vec<f64> = (0..n).map(|t| (t as f64).powf(two_h)).collect();
        let mut k = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                k[i * m + j] = half_s * (pow[i + 1] + pow[j + 1] - pow[i - j]);
            }
        }
        cholesky_lower_in_place(&mut k, m)
            .map_err(|pivot| Error::NotPositiveDefinite { pivot })?;
        Ok(Self {
            params,
            len: n,
            m,
            chol: k,
        })
    }

    pub fn sample(&self, seed: RngSeed) -> FbmPath {
        let mut rng = seed.rng();
        let z: Vec<f64> = (0..self.m)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let mut samples = vec![0.0; self.len];
        lower_matvec(&self.chol, self.m, &z, &mut samples[1..]);
        FbmPath {
            params: self.params,
            samples,
        }
    }
}

/// Reusable field synthesizer; see [`FbmPathSampler`].
pub struct FbmFieldSampler {
    params: FbmParams,
    side: usize,
    m: usize,
    chol: Vec<f64>,
}

impl FbmFieldSampler {
    pub fn new(params: FbmParams, side: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::InvalidParameter(format!(
                "field side must be >= 2, got {side}"
            )));
        }
        if side > MAX_FIELD_SIDE {
            return Err(Error::DimensionTooLarge(format!(
                "field side {side} exceeds exact-synthesis cap {MAX_FIELD_SIDE}"
            )));
        }
        let m = side * side - 1; // grid minus the pinned origin
        let h = params.hurst;
        let half_s = sigma_h2(&params) / 2.0;

        // ||X||^2 on the lattice is an integer, so all powf evaluations are
        // shared through one table instead of 3 m^2 calls.
        let max_r2 = 2 * (side - 1) * (side - 1);
        let pow: Vec<f64> = (0..=max_r2).map(|r2| (r2 as f64).powf(h)).collect();
        let norm_pow: Vec<f64> = (1..=m)
            .map(|p| {
                let (x, y) = (p % side, p / side);
                pow[x * x + y * y]
            })
            .collect();

        let mut k = vec![0.0; m * m];
        for i in 0..m {
            let (xi, yi) = (((i + 1) % side) as isize, ((i + 1) / side) as isize);
            let row = &mut k[i * m..i * m + i + 1];
            for (j, slot) in row.iter_mut().enumerate() {
                let (xj, yj) = (((j + 1) % side) as isize, ((j + 1) / side) as isize);
                let (dx, dy) = (xi - xj, yi - yj);
                let r2 = (dx * dx + dy * dy) as usize;
                *slot = half_s * (norm_pow[i] + norm_pow[j] - pow[r2]);
            }
        }
        cholesky_lower_in_place(&mut k, m)
            .map_err(|pivot| Error::NotPositiveDefinite { pivot })?;
        Ok(Self {
            params,
            side,
            m,
            chol: k,
        })
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn sample(&self, seed: RngSeed) -> FbmField {
        let mut rng = seed.rng();
        let z: Vec<f64> = (0..self.m)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let mut values = vec![0.0; self.side * self.side];
        lower_matvec(&self.chol, self.m, &z, &mut values[1..]);
        FbmField {
            params: self.params,
            grid: GrayImage::new(self.side, self.side, values).expect("finite synthesis"),
        }
    }
}

/// One-shot path synthesis; prefer [`FbmPathSampler`] for ensembles.
pub fn synth_path(params: FbmParams, n: usize, seed: RngSeed) -> Result<FbmPath> {
    Ok(FbmPathSampler::new(params, n)?.sample(seed))
}

/// One-shot field synthesis; prefer [`FbmFieldSampler`] for ensembles.
pub fn synth_field(params: FbmParams, side: usize, seed: RngSeed) -> Result<FbmField> {
    Ok(FbmFieldSampler::new(params, side)?.sample(seed))
}

/// Second-moment form of the self-similarity law on an ensemble of paths.
///
/// For every integer `t` with `alpha * t` on the grid, the ensemble second
/// moment of `B(alpha t)` is compared against `alpha^2H` times that of
/// `B(t)`. Returns the two averages `(E[B(at)^2], a^2H E[B(t)^2])`, whose
/// ratio tends to 1. Test instrumentation, not an end-user measure.
pub fn rescale_check(paths: &[FbmPath], alpha: f64) -> (f64, f64) {
    assert!(alpha > 0.0, "alpha must be positive");
    assert!(!paths.is_empty(), "need at least one path");
    let n = paths[0].samples.len();
    let two_h = 2.0 * paths[0].params.hurst;
    let scale = alpha.powf(two_h);
    let ensemble = paths.len() as f64;

    let mut scaled_sum = 0.0;
    let mut reference_sum = 0.0;
    let mut count = 0usize;
    for t in 1..n {
        let ft = alpha * t as f64;
        let idx = ft.round();
        if (ft - idx).abs() > 1e-9 || (idx as usize) >= n {
            continue;
        }
        let idx = idx as usize;
        let mut m_scaled = 0.0;
        let mut m_ref = 0.0;
        for p in paths {
            debug_assert_eq!(p.samples.len(), n);
            m_scaled += p.samples[idx] * p.samples[idx];
            m_ref += p.samples[t] * p.samples[t];
        }
        scaled_sum += m_scaled / ensemble;
        reference_sum += scale * (m_ref / ensemble);
        count += 1;
    }
    assert!(count > 0, "no grid point satisfies alpha * t <= n - 1");
    (scaled_sum / count as f64, reference_sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(h: f64) -> FbmParams {
        FbmParams::new(h, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FbmParams::new(0.0, 1.0).is_err());
        assert!(FbmParams::new(1.0, 1.0).is_err());
        assert!(FbmParams::new(0.5, 0.0).is_err());
        assert!(FbmParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn sigma_h2_at_quarter() {
        // Direct evaluation with Gamma(1/2) = sqrt(pi) substituted by hand.
        let expected = 0.5 * (PI * 0.25).cos() / (PI * 0.25) * PI.sqrt();
        assert_relative_eq!(sigma_h2(&params(0.25)), expected, max_relative = 1e-12);
    }

    #[test]
    fn sigma_h2_limit_at_half() {
        assert_eq!(sigma_h2(&params(0.5)), 0.5);
        // Numeric limit from both sides agrees with the closed form.
        for eps in [1e-6, 1e-9] {
            assert!((sigma_h2(&params(0.5 + eps)) - 0.5).abs() < 1e-6);
            assert!((sigma_h2(&params(0.5 - eps)) - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn sigma_h2_positive_across_range() {
        for i in 1..20 {
            let h = i as f64 / 20.0;
            assert!(sigma_h2(&params(h)) > 0.0, "H = {h}");
        }
    }

    #[test]
    fn covariance_collapses_to_variance() {
        for h in [0.2, 0.5, 0.8] {
            let p = params(h);
            assert_relative_eq!(fbm_covariance(1.0, 1.0, &p), sigma_h2(&p), max_relative = 1e-12);
        }
    }

    #[test]
    fn covariance_brownian_case() {
        // H = 1/2 with sigma_H^2 = 1 gives cov(t, s) = min(t, s).
        let p = FbmParams::new(0.5, 2.0).unwrap();
        assert_eq!(sigma_h2(&p), 1.0);
        assert_relative_eq!(fbm_covariance(1.0, 2.0, &p), 1.0, max_relative = 1e-12);
        assert_relative_eq!(fbm_covariance(3.0, 7.0, &p), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn covariance_vanishes_at_origin() {
        let p = params(0.3);
        assert_eq!(fbm_covariance(0.0, 5.0, &p), 0.0);
        assert_eq!(fbm_covariance(5.0, 0.0, &p), 0.0);
        assert_eq!(field_covariance([3.0, 4.0], [0.0, 0.0], &p), 0.0);
    }

    #[test]
    fn covariance_symmetric_exactly() {
        let p = params(0.35);
        for (t, s) in [(1.0, 2.0), (0.5, 9.25), (3.0, 3.0)] {
            assert_eq!(fbm_covariance(t, s, &p), fbm_covariance(s, t, &p));
        }
    }

    #[test]
    fn field_covariance_isotropic() {
        let p = params(0.7);
        for (r, s) in [(1.0, 2.0), (3.0, 5.0)] {
            assert_eq!(
                field_covariance([r, 0.0], [s, 0.0], &p),
                field_covariance([0.0, r], [0.0, s], &p)
            );
        }
        assert_relative_eq!(
            field_covariance([1.0, 0.0], [1.0, 0.0], &p),
            sigma_h2(&p),
            max_relative = 1e-12
        );
    }

    #[test]
    fn path_starts_at_zero_and_is_deterministic() {
        let p = params(0.4);
        let a = synth_path(p, 64, RngSeed(9)).unwrap();
        let b = synth_path(p, 64, RngSeed(9)).unwrap();
        assert_eq!(a.samples[0], 0.0);
        assert_eq!(a.samples, b.samples);
        let c = synth_path(p, 64, RngSeed(10)).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn field_origin_pinned_and_deterministic() {
        let p = params(0.3);
        let a = synth_field(p, 8, RngSeed(4)).unwrap();
        let b = synth_field(p, 8, RngSeed(4)).unwrap();
        assert_eq!(a.grid.data()[0], 0.0);
        assert_eq!(a.grid, b.grid);
    }

    #[test]
    fn field_side_cap() {
        let p = params(0.3);
        assert!(matches!(
            FbmFieldSampler::new(p, MAX_FIELD_SIDE + 1),
            Err(Error::DimensionTooLarge(_))
        ));
    }

    #[test]
    fn factorization_succeeds_across_hurst_range() {
        for h in [0.05, 0.5, 0.95] {
            FbmPathSampler::new(params(h), 256).unwrap();
        }
    }

    #[test]
    fn path_variance_matches_covariance() {
        // n = 2: the one free sample is N(0, sigma_H^2).
        let p = params(0.5);
        let sampler = FbmPathSampler::new(p, 2).unwrap();
        let trials = 10_000;
        let mut sum_sq = 0.0;
        for s in 0..trials {
            let v = sampler.sample(RngSeed(s)).samples[1];
            sum_sq += v * v;
        }
        let var = sum_sq / trials as f64;
        assert!(
            (var - sigma_h2(&p)).abs() / sigma_h2(&p) < 0.05,
            "var {var} vs {}",
            sigma_h2(&p)
        );
    }

    #[test]
    fn increments_are_stationary() {
        // Ensemble variance of G(t) = B(t+1) - B(t) is flat in t.
        let p = params(0.3);
        let n = 16;
        let sampler = FbmPathSampler::new(p, n).unwrap();
        let trials = 4000usize;
        let mut var = vec![0.0; n - 1];
        for s in 0..trials {
            let path = sampler.sample(RngSeed(1000 + s as u64)).samples;
            for t in 0..n - 1 {
                let g = path[t + 1] - path[t];
                var[t] += g * g;
            }
        }
        for v in &mut var {
            *v /= trials as f64;
        }
        // Increment variance is sigma_H^2 exactly; chi-square SE ~ sqrt(2/n).
        let se = sigma_h2(&p) * (2.0 / trials as f64).sqrt();
        for (t, &v) in var.iter().enumerate() {
            assert!(
                (v - sigma_h2(&p)).abs() < 3.0 * se,
                "t = {t}: var {v} vs {} (se {se})",
                sigma_h2(&p)
            );
        }
    }

    #[test]
    fn field_variance_grows_with_hurst_power() {
        // log Var[B(k,k)] against log ||(k,k)|| regresses to slope 2H.
        let h = 0.3;
        let sampler = FbmFieldSampler::new(params(h), 16).unwrap();
        let trials = 500usize;
        let mut sum_sq = [0.0; 16];
        for s in 0..trials {
            let f = sampler.sample(RngSeed(s as u64));
            for (k, slot) in sum_sq.iter_mut().enumerate().skip(1) {
                let v = f.grid.get(k, k);
                *slot += v * v;
            }
        }
        let pts: Vec<(f64, f64)> = (1..16)
            .map(|k| {
                let norm = (2.0 * (k * k) as f64).sqrt();
                (norm.ln(), (sum_sq[k] / trials as f64).ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
        assert!(
            (slope - 2.0 * h).abs() < 0.1,
            "log-log slope {slope} vs 2H = {}",
            2.0 * h
        );
    }

    #[test]
    fn ensemble_mean_is_zero() {
        let sampler = FbmPathSampler::new(params(0.4), 16).unwrap();
        let trials = 2000usize;
        let mut sums = [0.0; 16];
        for s in 0..trials {
            for (acc, v) in sums.iter_mut().zip(&sampler.sample(RngSeed(s as u64)).samples) {
                *acc += v;
            }
        }
        let p = params(0.4);
        for (t, &s) in sums.iter().enumerate().skip(1) {
            let mean = s / trials as f64;
            let sd = fbm_covariance(t as f64, t as f64, &p).sqrt();
            let se = sd / (trials as f64).sqrt();
            assert!(mean.abs() < 3.0 * se, "t = {t}: mean {mean}, 3 SE = {}", 3.0 * se);
        }
    }

    #[test]
    fn rescale_identity_at_alpha_one() {
        let p = params(0.35);
        let sampler = FbmPathSampler::new(p, 17).unwrap();
        let paths: Vec<FbmPath> = (0..50).map(|s| sampler.sample(RngSeed(s))).collect();
        let (a, b) = rescale_check(&paths, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn rescale_ratio_tracks_hurst() {
        let p = params(0.2);
        let sampler = FbmPathSampler::new(p, 33).unwrap();
        let paths: Vec<FbmPath> = (0..10_000).map(|s| sampler.sample(RngSeed(s))).collect();
        let (scaled, reference) = rescale_check(&paths, 2.0);
        assert!(
            (scaled / reference - 1.0).abs() < 0.05,
            "ratio {}",
            scaled / reference
        );
    }
}
