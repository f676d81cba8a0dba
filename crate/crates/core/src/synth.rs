//! Synthetic datasets: multi-tone multi-variate signals, artificial texture
//! images and multiplicative speckle noise calibrated to a target SNR.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{Image, MultiSignal};

/// Tone frequencies (Hz) selected by the rows of a [`PickupMask`].
pub const TONE_FREQS: [f64; 4] = [32.0, 16.0, 8.0, 2.0];

pub const VARIATE_NAMES: [&str; 6] = ["U", "V", "W", "X", "Y", "Z"];

/// 4x6 binary matrix: row `i` selects tone `TONE_FREQS[i]`, column `j` is
/// variate `VARIATE_NAMES[j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PickupMask(pub [[u8; 6]; 4]);

impl Default for PickupMask {
    fn default() -> Self {
        Self([
            [1, 1, 0, 1, 0, 0],
            [1, 1, 1, 0, 1, 0],
            [1, 1, 1, 1, 1, 1],
            [1, 0, 1, 1, 0, 1],
        ])
    }
}

impl PickupMask {
    pub fn includes(&self, tone: usize, variate: usize) -> bool {
        self.0[tone][variate] != 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().flatten().any(|&v| v > 1) {
            return Err(Error::InvalidParameter("mask entries must be 0 or 1".into()));
        }
        Ok(())
    }
}

/// Unit-amplitude multi-tone channels: `x_j(t) = sum_i mask[i][j] sin(2 pi f_i t)`
/// sampled at `t = k / fs`.
pub fn multivariate_sinusoids(mask: &PickupMask, n_samples: usize, fs: f64) -> Result<MultiSignal> {
    mask.validate()?;
    let max_freq = TONE_FREQS.iter().copied().fold(0.0, f64::max);
    if fs.is_nan() || fs <= 2.0 * max_freq {
        return Err(Error::Aliasing { fs, max_freq });
    }
    if n_samples < 4 {
        return Err(Error::TooShort { len: n_samples, min: 4 });
    }
    let mut data = Vec::with_capacity(n_samples * 6);
    for j in 0..6 {
        for k in 0..n_samples {
            let t = k as f64 / fs;
            let mut v = 0.0;
            for (i, f) in TONE_FREQS.iter().enumerate() {
                if mask.includes(i, j) {
                    v += (2.0 * PI * f * t).sin();
                }
            }
            data.push(v);
        }
    }
    MultiSignal::from_columns(n_samples, 6, data)
}

/// Artificial texture image parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AtiSpec {
    pub size: usize,
    /// Spatial frequencies in cycles per image width, highest first.
    pub spatial_freqs: Vec<f64>,
}

impl Default for AtiSpec {
    fn default() -> Self {
        Self {
            size: 101,
            spatial_freqs: vec![20.0, 4.0, 1.0],
        }
    }
}

/// Returns the texture image and its components. Component `i` is the sum of
/// a horizontal and a vertical unit sinusoid at `spatial_freqs[i]`; the image
/// is the sum of all components.
pub fn make_ati(spec: &AtiSpec) -> (Image, Vec<Image>) {
    let n = spec.size as f64;
    let atcs: Vec<Image> = spec
        .spatial_freqs
        .iter()
        .map(|&f| {
            Image::from_fn(spec.size, spec.size, |x, y| {
                (2.0 * PI * f * x as f64 / n).sin() + (2.0 * PI * f * y as f64 / n).sin()
            })
        })
        .collect();
    let mut ati = vec![0.0; spec.size * spec.size];
    for atc in &atcs {
        for (a, v) in ati.iter_mut().zip(&atc.data) {
            *a += v;
        }
    }
    let ati = Image {
        width: spec.size,
        height: spec.size,
        data: ati,
    };
    (ati, atcs)
}

/// Target SNR and seed for [`add_speckle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeckleSpec {
    /// `f64::INFINITY` means no noise.
    pub snr_db: f64,
    pub seed: u64,
}

/// Result of [`add_speckle`]: the noisy image, the additive term `I * N` and
/// the noise standard deviation that was solved for.
#[derive(Debug, Clone)]
pub struct Speckled {
    pub image: Image,
    pub noise: Image,
    pub sigma: f64,
}

/// Multiplicative speckle `I + I * N` with `N` uniform on
/// `[-sigma/sqrt(2), sigma/sqrt(2)]`. `sigma` is scaled so that the power of
/// `I` over the power of `I * N` equals the target SNR.
pub fn add_speckle(img: &Image, spec: &SpeckleSpec) -> Result<Speckled> {
    if let Some(i) = img.data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let signal_power: f64 = img.data.iter().map(|v| v * v).sum();
    if signal_power == 0.0 {
        return Err(Error::SnrUndefined("image is all zero"));
    }
    if spec.snr_db.is_nan() {
        return Err(Error::InvalidParameter("snr_db is NaN".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let half_width = 1.0 / SQRT_2;
    let unit: Vec<f64> = img
        .data
        .iter()
        .map(|_| rng.random_range(-half_width..=half_width))
        .collect();
    let unit_term_power: f64 = img
        .data
        .iter()
        .zip(&unit)
        .map(|(i, n)| (i * n) * (i * n))
        .sum();

    let sigma = if spec.snr_db == f64::INFINITY || unit_term_power == 0.0 {
        0.0
    } else {
        (signal_power / (unit_term_power * 10f64.powf(spec.snr_db / 10.0))).sqrt()
    };

    let noise: Vec<f64> = img
        .data
        .iter()
        .zip(&unit)
        .map(|(i, n)| i * (sigma * n))
        .collect();
    let noisy = img.data.iter().zip(&noise).map(|(i, e)| i + e).collect();
    Ok(Speckled {
        image: Image::new(img.width, img.height, noisy)?,
        noise: Image::new(img.width, img.height, noise)?,
        sigma,
    })
}

/// `10 log10(sum signal^2 / sum noise^2)`.
pub fn snr_db(signal: &[f64], noise: &[f64]) -> Result<f64> {
    if signal.len() != noise.len() {
        return Err(Error::Shape(format!(
            "signal has {} samples, noise has {}",
            signal.len(),
            noise.len()
        )));
    }
    let noise_power: f64 = noise.iter().map(|v| v * v).sum();
    if noise_power == 0.0 {
        return Err(Error::SnrUndefined("noise is all zero"));
    }
    let signal_power: f64 = signal.iter().map(|v| v * v).sum();
    Ok(10.0 * (signal_power / noise_power).log10())
}
