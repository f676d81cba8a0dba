//! Serialization of multi-channel signals into a single 1D signal and back.
//!
//! Channels are laid end to end with `D` blended samples between each
//! adjacent pair. The blend mixes the flipped tail of the previous channel
//! with the flipped head of the next one using the weights
//! `a_i = i / (D + 1)`, so the joint is continuous and the serialized signal
//! can be decomposed by any 1D algorithm. After decomposition the transition
//! samples are dropped and every mode is reshaped back to `M x N`.

use crate::emd::{Algorithm, EnsembleConfig, SiftConfig};
use crate::error::{Error, Result};
use crate::types::{Image, ImfTensor, MultiSignal};

/// Length of the blended transition inserted between channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionSpec {
    pub d: usize,
}

impl TransitionSpec {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("transition length must be >= 1".into()));
        }
        Ok(Self { d })
    }

    /// Default transition: 20% of the channel length, at least one sample.
    pub fn auto(rows: usize) -> Self {
        let d = (0.2 * rows as f64).round() as usize;
        Self { d: d.max(1) }
    }

    fn check(&self, rows: usize) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("transition length must be >= 1".into()));
        }
        if self.d > rows {
            return Err(Error::TransitionTooLong { d: self.d, m: rows });
        }
        Ok(())
    }
}

/// The concatenated signal and the shape needed to undo it.
#[derive(Debug, Clone, PartialEq)]
pub struct SerializedSignal {
    pub samples: Vec<f64>,
    pub rows: usize,
    pub channels: usize,
    pub d: usize,
}

impl SerializedSignal {
    /// `M*N + D*N - D`.
    pub fn expected_len(rows: usize, channels: usize, d: usize) -> usize {
        (rows + d) * channels - d
    }

    /// Offset of the first sample of `channel` in the serialized signal.
    pub fn channel_offset(&self, channel: usize) -> usize {
        channel * (self.rows + self.d)
    }
}

/// Blend weights `i / (D + 1)` for `i = 1..=D`.
pub fn transition_weights(d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::InvalidParameter("transition length must be >= 1".into()));
    }
    let denom = (d + 1) as f64;
    Ok((1..=d).map(|i| i as f64 / denom).collect())
}

/// Matrix form of the serialization.
///
/// Builds the `(M + D) x N` block matrix with the channels on top and the
/// transition block `E` (plus one zero column) underneath, vectorizes it
/// column-major and drops the trailing `D` zeros. Flips are done by index
/// addressing.
pub fn concatenate(x: &MultiSignal, spec: TransitionSpec) -> Result<SerializedSignal> {
    let (m, n, d) = (x.rows(), x.channels(), spec.d);
    spec.check(m)?;
    let a = transition_weights(d)?;
    let col = m + d;

    let mut t = vec![0.0; col * n];
    for c in 0..n {
        t[c * col..c * col + m].copy_from_slice(x.channel(c));
    }
    for c in 0..n - 1 {
        let head = x.channel(c + 1);
        let tail = x.channel(c);
        let e = &mut t[c * col + m..(c + 1) * col];
        for (j, slot) in e.iter_mut().enumerate() {
            // E = flip(X_A) .* a + flip(X_B) .* flip(a)
            let xa = head[d - 1 - j];
            let xb = tail[m - 1 - j];
            *slot = xa * a[j] + xb * a[d - 1 - j];
        }
    }
    t.truncate(col * n - d);

    Ok(SerializedSignal {
        samples: t,
        rows: m,
        channels: n,
        d,
    })
}

/// Pairwise reference construction: for every adjacent pair, evaluates the
/// transition `h(t) = (1 - w) f(T - t) + w g(D - t)` directly at the interior
/// weight points and appends it. Bit-identical to [`concatenate`].
pub fn concatenate_naive(x: &MultiSignal, spec: TransitionSpec) -> Result<SerializedSignal> {
    let (m, n, d) = (x.rows(), x.channels(), spec.d);
    spec.check(m)?;
    let denom = (d + 1) as f64;
    let mut out = Vec::with_capacity(SerializedSignal::expected_len(m, n, d));
    out.extend_from_slice(x.channel(0));
    for c in 1..n {
        let f = x.channel(c - 1);
        let g = x.channel(c);
        for t in 1..=d {
            let w_next = t as f64 / denom;
            let w_prev = (d + 1 - t) as f64 / denom;
            out.push(w_prev * f[m - t] + w_next * g[d - t]);
        }
        out.extend_from_slice(g);
    }
    Ok(SerializedSignal {
        samples: out,
        rows: m,
        channels: n,
        d,
    })
}

/// Inverse of the serialization applied to `K` decomposed columns.
///
/// Each column is padded with `D` zeros, reshaped to `(M + D) x N` and cut to
/// its first `M` rows.
pub fn deconcatenate(
    columns: &[Vec<f64>],
    rows: usize,
    channels: usize,
    d: usize,
) -> Result<ImfTensor> {
    if columns.is_empty() {
        return Err(Error::Shape("no modes to deconcatenate".into()));
    }
    if channels == 0 {
        return Err(Error::Shape("channel count must be >= 1".into()));
    }
    let expected = SerializedSignal::expected_len(rows, channels, d);
    if let Some((k, col)) = columns.iter().enumerate().find(|(_, c)| c.len() != expected) {
        return Err(Error::Shape(format!(
            "mode {k} has {} samples, expected {expected} for M={rows}, N={channels}, D={d}",
            col.len()
        )));
    }
    let stride = rows + d;
    let mut data = Vec::with_capacity(rows * channels * columns.len());
    for col in columns {
        let mut padded = Vec::with_capacity(stride * channels);
        padded.extend_from_slice(col);
        padded.resize(stride * channels, 0.0);
        for block in padded.chunks_exact(stride) {
            data.extend_from_slice(&block[..rows]);
        }
    }
    ImfTensor::new(rows, channels, columns.len(), data)
}

/// Serializes `x`, decomposes the joined signal once with `algo`, and returns
/// the per-channel modes with the residue as the last mode.
pub fn serial_decompose(
    x: &MultiSignal,
    spec: TransitionSpec,
    algo: Algorithm,
    cfg: &SiftConfig,
    ens: &EnsembleConfig,
) -> Result<ImfTensor> {
    let serialized = concatenate(x, spec)?;
    let dec = algo.decompose(&serialized.samples, cfg, ens)?;
    deconcatenate(&dec.into_columns(), x.rows(), x.channels(), spec.d)
}

/// Image columns become channels: `M = height`, `N = width`.
pub fn image_to_multisignal(img: &Image) -> Result<MultiSignal> {
    let mut data = Vec::with_capacity(img.width * img.height);
    for x in 0..img.width {
        for y in 0..img.height {
            data.push(img.get(x, y));
        }
    }
    MultiSignal::from_columns(img.height, img.width, data)
}

/// One `N x M` image (width `N`, height `M`) per mode.
pub fn imf_tensor_to_images(t: &ImfTensor) -> Vec<Image> {
    (0..t.modes())
        .map(|k| {
            let mode = t.mode(k);
            Image::from_fn(t.channels(), t.rows(), |x, y| mode[x * t.rows() + y])
        })
        .collect()
}

/// Column-major `M x N` buffer as an image of width `N`, height `M`.
pub fn columns_to_image(rows: usize, channels: usize, data: &[f64]) -> Image {
    Image::from_fn(channels, rows, |x, y| data[x * rows + y])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_signal(m: usize, n: usize) -> MultiSignal {
        let data = (0..m * n).map(|i| ((i * 37) % 101) as f64 - 50.0).collect();
        MultiSignal::from_columns(m, n, data).unwrap()
    }

    #[test]
    fn weights_match_formula() {
        assert_eq!(transition_weights(1).unwrap(), vec![0.5]);
        assert_eq!(transition_weights(2).unwrap(), vec![1.0 / 3.0, 2.0 / 3.0]);
        let w4 = transition_weights(4).unwrap();
        for (w, expected) in w4.iter().zip([0.2, 0.4, 0.6, 0.8]) {
            assert!((w - expected).abs() < 1e-15);
        }
        assert!(transition_weights(0).is_err());
    }

    #[test]
    fn single_channel_is_unchanged() {
        let x = ramp_signal(10, 1);
        let s = concatenate(&x, TransitionSpec::new(3).unwrap()).unwrap();
        assert_eq!(s.samples, x.channel(0));
    }

    #[test]
    fn constant_channels_give_constant_transition() {
        let x = MultiSignal::from_columns(8, 3, vec![2.5; 24]).unwrap();
        let s = concatenate(&x, TransitionSpec::new(5).unwrap()).unwrap();
        for v in &s.samples {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_evaluated_transition() {
        // prev tail [0, 3], next head [6, 9], D = 2 -> [5, 4]
        let x = MultiSignal::from_channels(&[vec![1.0, 1.0, 0.0, 3.0], vec![6.0, 9.0, 1.0, 1.0]])
            .unwrap();
        let spec = TransitionSpec::new(2).unwrap();
        let s = concatenate(&x, spec).unwrap();
        assert!((s.samples[4] - 5.0).abs() < 1e-12);
        assert!((s.samples[5] - 4.0).abs() < 1e-12);
        assert_eq!(s.samples, concatenate_naive(&x, spec).unwrap().samples);
    }

    #[test]
    fn single_sample_transition_is_midpoint() {
        let x = ramp_signal(6, 2);
        let s = concatenate_naive(&x, TransitionSpec::new(1).unwrap()).unwrap();
        let expected = 0.5 * x.get(5, 0) + 0.5 * x.get(0, 1);
        assert_eq!(s.samples[6], expected);
    }

    #[test]
    fn length_law_for_sweep_grid() {
        let x = MultiSignal::from_columns(1000, 6, vec![0.0; 6000]).unwrap();
        let s = concatenate(&x, TransitionSpec::new(50).unwrap()).unwrap();
        assert_eq!(s.samples.len(), 6250);
    }

    #[test]
    fn transition_longer_than_channel() {
        let x = ramp_signal(5, 2);
        assert!(matches!(
            concatenate(&x, TransitionSpec { d: 6 }),
            Err(Error::TransitionTooLong { d: 6, m: 5 })
        ));
        assert!(concatenate_naive(&x, TransitionSpec { d: 6 }).is_err());
    }

    #[test]
    fn transition_ends_stay_near_joint() {
        // First blended sample leans on the previous channel's last sample,
        // the last one on the next channel's first sample.
        let x = ramp_signal(20, 2);
        let d = 4;
        let s = concatenate(&x, TransitionSpec::new(d).unwrap()).unwrap();
        let first = s.samples[20];
        let last = s.samples[20 + d - 1];
        let w = 1.0 / (d + 1) as f64;
        let bound_first = w * (x.get(d - 1, 1) - x.get(19, 0)).abs();
        let bound_last = w * (x.get(20 - d, 0) - x.get(0, 1)).abs();
        assert!((first - x.get(19, 0)).abs() <= bound_first + 1e-12);
        assert!((last - x.get(0, 1)).abs() <= bound_last + 1e-12);
    }

    #[test]
    fn deconcatenate_round_trip_and_shape() {
        let x = ramp_signal(12, 4);
        let spec = TransitionSpec::new(3).unwrap();
        let s = concatenate(&x, spec).unwrap();
        let t = deconcatenate(&[s.samples.clone(), s.samples], 12, 4, 3).unwrap();
        assert_eq!(t.shape(), (12, 4, 2));
        assert_eq!(t.mode(0), x.as_slice());
        assert_eq!(t.mode(1), x.as_slice());
    }

    #[test]
    fn deconcatenate_shape_mismatch() {
        assert!(matches!(deconcatenate(&[vec![0.0; 10]], 4, 2, 1), Err(Error::Shape(_))));
        assert!(deconcatenate(&[], 4, 2, 1).is_err());
    }

    #[test]
    fn image_adapter_round_trip() {
        let img = Image::from_fn(7, 5, |x, y| (x * 10 + y) as f64);
        let ms = image_to_multisignal(&img).unwrap();
        assert_eq!((ms.rows(), ms.channels()), (5, 7));
        assert_eq!(ms.channel(2), &[20.0, 21.0, 22.0, 23.0, 24.0]);
        let t = ImfTensor::new(5, 7, 1, ms.as_slice().to_vec()).unwrap();
        let back = imf_tensor_to_images(&t);
        assert_eq!(back, vec![img]);
    }
}
