//! Grayscale image carriers and gray-level quantization.

use serde::Serialize;

use crate::error::{Error, Result};

/// A 2D matrix of real-valued intensities, row-major.
///
/// All values are finite; `data.len() == width * height`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: width * height,
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Element-wise difference `self - other`.
    pub fn sub(&self, other: &GrayImage) -> Result<GrayImage> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::LengthMismatch {
                left: self.data.len(),
                right: other.data.len(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        GrayImage::new(self.width, self.height, data)
    }

    /// Affine map of intensities onto [0, 1]. A constant image maps to all zeros.
    pub fn normalized_unit(&self) -> GrayImage {
        let (lo, hi) = self.min_max();
        if hi <= lo {
            return GrayImage::filled(self.width, self.height, 0.0).expect("nonzero dims");
        }
        let span = hi - lo;
        let data = self.data.iter().map(|v| (v - lo) / span).collect();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// An image reduced to `levels` integer gray codes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    data: Vec<u32>,
}

impl QuantizedImage {
    pub fn new(width: usize, height: usize, levels: usize, data: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if levels < 2 {
            return Err(Error::InvalidParameter("levels must be >= 2".into()));
        }
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: width * height,
            });
        }
        if data.iter().any(|&c| c as usize >= levels) {
            return Err(Error::InvalidParameter("code out of range".into()));
        }
        Ok(Self {
            width,
            height,
            levels,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn codes(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }
}

/// Equal-width binning of the image's own [min, max] range.
///
/// `bin = min(floor((v - lo) / w), levels - 1)` with `w = (hi - lo) / levels`;
/// a constant image maps entirely to bin 0.
pub fn quantize(img: &GrayImage, levels: usize) -> QuantizedImage {
    let (lo, hi) = img.min_max();
    quantize_with_range(img, levels, lo, hi)
}

/// Equal-width binning of an explicit [lo, hi] range; values outside clamp
/// to the end bins. Used when several images must share one code book.
pub fn quantize_with_range(img: &GrayImage, levels: usize, lo: f64, hi: f64) -> QuantizedImage {
    assert!(levels >= 2, "levels must be >= 2");
    let max_code = (levels - 1) as u32;
    let codes = if hi > lo {
        let w = (hi - lo) / levels as f64;
        img.data()
            .iter()
            .map(|&v| {
                let b = ((v - lo) / w).floor();
                if b <= 0.0 {
                    0
                } else if b >= max_code as f64 {
                    max_code
                } else {
                    b as u32
                }
            })
            .collect()
    } else {
        vec![0u32; img.data().len()]
    };
    QuantizedImage::new(img.width(), img.height(), levels, codes).expect("codes in range")
}
