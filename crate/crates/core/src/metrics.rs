//! Quantitative comparisons between signals and decompositions.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::types::{ImfTensor, MultiSignal};

/// `max |x - sum_k t_k| / max |x|`, or the absolute error when `x` is all zero.
pub fn reconstruction_error(x: &MultiSignal, t: &ImfTensor) -> Result<f64> {
    if (x.rows(), x.channels()) != (t.rows(), t.channels()) {
        return Err(Error::Shape(format!(
            "signal is {}x{}, tensor is {}x{}",
            x.rows(),
            x.channels(),
            t.rows(),
            t.channels()
        )));
    }
    let sum = t.sum_modes();
    let err = x
        .as_slice()
        .iter()
        .zip(&sum)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = x.max_abs();
    Ok(if scale > 0.0 { err / scale } else { err })
}

/// Frequency of the strongest non-DC DFT bin, resolution `fs / len`.
///
/// Returns 0 Hz for a signal with no energy outside DC.
pub fn dominant_frequency(s: &[f64], fs: f64) -> Result<f64> {
    if s.len() < 8 {
        return Err(Error::TooShort { len: s.len(), min: 8 });
    }
    let n = s.len();
    let mut buf: Vec<Complex<f64>> = s.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let mut best = 0;
    let mut best_mag = 0.0;
    for (k, c) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
        let mag = c.norm_sqr();
        if mag > best_mag {
            best_mag = mag;
            best = k;
        }
    }
    // Bins with only rounding noise do not count as content.
    let energy: f64 = s.iter().map(|v| v * v).sum();
    if best_mag <= 1e-20 * energy.max(f64::MIN_POSITIVE) * n as f64 {
        return Ok(0.0);
    }
    Ok(best as f64 * fs / n as f64)
}

/// Pearson correlation; zero-variance inputs give 0.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let ma = a[..n].iter().sum::<f64>() / nf;
    let mb = b[..n].iter().sum::<f64>() / nf;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a[..n].iter().zip(&b[..n]) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

/// `K x N` matrix of per-(mode, channel) Pearson correlations.
pub fn mode_correlation(a: &ImfTensor, b: &ImfTensor) -> Result<Vec<Vec<f64>>> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "tensors differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok((0..a.modes())
        .map(|k| {
            (0..a.channels())
                .map(|c| pearson(a.channel_mode(c, k), b.channel_mode(c, k)))
                .collect()
        })
        .collect())
}

/// Zero-pads the shorter tensor so both have the same mode count.
pub fn align_modes(a: &ImfTensor, b: &ImfTensor) -> (ImfTensor, ImfTensor) {
    let k = a.modes().max(b.modes());
    (a.with_mode_count(k), b.with_mode_count(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, amp: f64) -> Vec<f64> {
        (0..1000)
            .map(|k| amp * (2.0 * PI * freq * k as f64 / 1000.0).sin())
            .collect()
    }

    #[test]
    fn dominant_frequency_of_tones() {
        assert_eq!(dominant_frequency(&tone(32.0, 1.0), 1000.0).unwrap(), 32.0);
        let mix: Vec<f64> = tone(32.0, 1.0)
            .iter()
            .zip(tone(2.0, 0.1))
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(dominant_frequency(&mix, 1000.0).unwrap(), 32.0);
        assert_eq!(dominant_frequency(&[3.0; 64], 1000.0).unwrap(), 0.0);
        assert!(dominant_frequency(&[1.0; 7], 1000.0).is_err());
    }

    #[test]
    fn reconstruction_error_cases() {
        let x = MultiSignal::from_columns(4, 1, vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        let exact = ImfTensor::new(4, 1, 2, vec![0.5, -1.0, 1.0, 0.5, 0.5, -1.0, 2.0, 0.0]).unwrap();
        assert!(reconstruction_error(&x, &exact).unwrap() <= 1e-12);
        let zeros = ImfTensor::zeros(4, 1, 3);
        assert_eq!(reconstruction_error(&x, &zeros).unwrap(), 1.0);
        let mut perturbed = exact.clone();
        perturbed.mode_mut(0)[2] += 0.3;
        assert!(reconstruction_error(&x, &perturbed).unwrap() >= 0.3 / 3.0 - 1e-12);
        assert!(reconstruction_error(&x, &ImfTensor::zeros(4, 2, 1)).is_err());
    }

    #[test]
    fn correlation_identity_and_negation() {
        let a = ImfTensor::new(4, 2, 1, vec![1.0, 2.0, 0.0, 5.0, 3.0, 3.0, 1.0, 0.0]).unwrap();
        let neg = ImfTensor::new(4, 2, 1, a.as_slice().iter().map(|v| -v).collect()).unwrap();
        for row in mode_correlation(&a, &a).unwrap() {
            for r in row {
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
        for row in mode_correlation(&a, &neg).unwrap() {
            for r in row {
                assert!((r + 1.0).abs() < 1e-12);
            }
        }
        let flat = ImfTensor::zeros(4, 2, 1);
        assert_eq!(mode_correlation(&a, &flat).unwrap(), vec![vec![0.0, 0.0]]);
    }
}
