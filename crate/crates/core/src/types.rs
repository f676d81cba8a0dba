use crate::error::{Error, Result};

/// `M x N` matrix of `N` channels, each `M` samples long, stored column-major
/// so that every channel is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSignal {
    rows: usize,
    channels: usize,
    data: Vec<f64>,
}

impl MultiSignal {
    /// Builds a multi-signal from column-major data (`data[c * rows + r]`).
    pub fn from_columns(rows: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 4 {
            return Err(Error::TooShort { len: rows, min: 4 });
        }
        if channels == 0 {
            return Err(Error::Shape("multi-signal needs at least one channel".into()));
        }
        if data.len() != rows * channels {
            return Err(Error::Shape(format!(
                "expected {} samples for {rows}x{channels}, got {}",
                rows * channels,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            rows,
            channels,
            data,
        })
    }

    pub fn from_channels(channels: &[Vec<f64>]) -> Result<Self> {
        let rows = channels.first().map_or(0, Vec::len);
        if let Some(bad) = channels.iter().find(|c| c.len() != rows) {
            return Err(Error::Shape(format!(
                "channel lengths differ: {rows} vs {}",
                bad.len()
            )));
        }
        Self::from_columns(rows, channels.len(), channels.concat())
    }

    /// Samples per channel (`M`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Channel count (`N`).
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn get(&self, row: usize, channel: usize) -> f64 {
        self.data[channel * self.rows + row]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_channels(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// `M x N x K` stack of per-channel modes. The last mode holds the residue.
///
/// Layout is column-major in all three axes: sample `m` of channel `n` in
/// mode `k` lives at `m + M * (n + N * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImfTensor {
    rows: usize,
    channels: usize,
    modes: usize,
    data: Vec<f64>,
}

impl ImfTensor {
    pub fn new(rows: usize, channels: usize, modes: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * channels * modes {
            return Err(Error::Shape(format!(
                "expected {} values for {rows}x{channels}x{modes}, got {}",
                rows * channels * modes,
                data.len()
            )));
        }
        Ok(Self {
            rows,
            channels,
            modes,
            data,
        })
    }

    pub fn zeros(rows: usize, channels: usize, modes: usize) -> Self {
        Self {
            rows,
            channels,
            modes,
            data: vec![0.0; rows * channels * modes],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Mode count `K`, residue included.
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.rows, self.channels, self.modes)
    }

    /// Mode `k` for all channels, column-major `M x N`.
    pub fn mode(&self, k: usize) -> &[f64] {
        let len = self.rows * self.channels;
        &self.data[k * len..(k + 1) * len]
    }

    pub fn mode_mut(&mut self, k: usize) -> &mut [f64] {
        let len = self.rows * self.channels;
        &mut self.data[k * len..(k + 1) * len]
    }

    pub fn channel_mode(&self, channel: usize, k: usize) -> &[f64] {
        let start = self.rows * (channel + self.channels * k);
        &self.data[start..start + self.rows]
    }

    pub fn channel_mode_mut(&mut self, channel: usize, k: usize) -> &mut [f64] {
        let start = self.rows * (channel + self.channels * k);
        &mut self.data[start..start + self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Sum of modes `first..=last` (zero-based, inclusive), column-major `M x N`.
    pub fn sum_range(&self, first: usize, last: usize) -> Vec<f64> {
        let mut acc = vec![0.0; self.rows * self.channels];
        for k in first..=last.min(self.modes.saturating_sub(1)) {
            for (a, v) in acc.iter_mut().zip(self.mode(k)) {
                *a += v;
            }
        }
        acc
    }

    /// Sum over all modes, column-major `M x N`.
    pub fn sum_modes(&self) -> Vec<f64> {
        if self.modes == 0 {
            return vec![0.0; self.rows * self.channels];
        }
        self.sum_range(0, self.modes - 1)
    }

    /// Pads with zero modes or drops trailing modes so that `K == modes`.
    pub fn with_mode_count(&self, modes: usize) -> Self {
        let len = self.rows * self.channels;
        let mut data = self.data[..len * modes.min(self.modes)].to_vec();
        data.resize(len * modes, 0.0);
        Self {
            rows: self.rows,
            channels: self.channels,
            modes,
            data,
        }
    }
}

/// Grayscale image, row-major, `f64` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}
