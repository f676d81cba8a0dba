//! One-dimensional empirical mode decomposition and its noise-assisted
//! variants.
//!
//! The building blocks are exposed individually: [`find_extrema`] locates
//! strict local extrema, [`envelope`] fits a natural cubic spline through
//! them, [`extract_imf`] runs the sifting loop for one mode and [`emd`]
//! peels modes off the running residue. [`eemd`] and [`ceemdan`] layer the
//! ensemble averaging on top.
//!
//! Every decomposition returns its residue separately and reconstructs the
//! input exactly up to floating-point rounding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rules for the sifting loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiftConfig {
    /// Cauchy-type threshold on `sum((prev - cur)^2) / sum(prev^2)`.
    pub sd_threshold: f64,
    pub max_sift_iters: usize,
    /// `None` extracts modes until the residue runs out of extrema.
    pub max_imfs: Option<usize>,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            sd_threshold: 0.2,
            max_sift_iters: 300,
            max_imfs: None,
        }
    }
}

impl SiftConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sd_threshold > 0.0 && self.sd_threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sd_threshold must be in (0, 1], got {}",
                self.sd_threshold
            )));
        }
        if self.max_sift_iters == 0 {
            return Err(Error::InvalidParameter("max_sift_iters must be >= 1".into()));
        }
        if self.max_imfs == Some(0) {
            return Err(Error::InvalidParameter("max_imfs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Ensemble parameters shared by EEMD and CEEMDAN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Noise standard deviation as a fraction of the signal's standard deviation.
    pub nstd: f64,
    /// Number of noise realizations.
    pub nr: usize,
    pub base_seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            nstd: 0.2,
            nr: 100,
            base_seed: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nstd >= 0.0 && self.nstd.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "nstd must be a finite value >= 0, got {}",
                self.nstd
            )));
        }
        if self.nr == 0 {
            return Err(Error::InvalidParameter("nr must be >= 1".into()));
        }
        Ok(())
    }

    /// Seed of realization `m`, a pure function of `(base_seed, m)`.
    pub fn realization_seed(&self, m: usize) -> u64 {
        splitmix64(self.base_seed ^ splitmix64(m as u64))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Modes of a 1D signal, highest frequency first, plus the residue.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition1D {
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
}

impl Decomposition1D {
    pub fn len(&self) -> usize {
        self.residue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residue.is_empty()
    }

    /// Sum of all modes and the residue.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.residue.len()];
        for imf in &self.imfs {
            add_assign(&mut out, imf);
        }
        add_assign(&mut out, &self.residue);
        out
    }

    /// Modes followed by the residue, as `K = imfs + 1` columns.
    pub fn into_columns(self) -> Vec<Vec<f64>> {
        let mut cols = self.imfs;
        cols.push(self.residue);
        cols
    }
}

/// Which 1D algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Emd,
    Eemd,
    Ceemdan,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Emd, Algorithm::Eemd, Algorithm::Ceemdan];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Emd => "emd",
            Algorithm::Eemd => "eemd",
            Algorithm::Ceemdan => "ceemdan",
        }
    }

    pub fn decompose(
        self,
        signal: &[f64],
        cfg: &SiftConfig,
        ens: &EnsembleConfig,
    ) -> Result<Decomposition1D> {
        match self {
            Algorithm::Emd => emd(signal, cfg),
            Algorithm::Eemd => eemd(signal, cfg, ens),
            Algorithm::Ceemdan => ceemdan(signal, cfg, ens),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "emd" => Ok(Algorithm::Emd),
            "eemd" => Ok(Algorithm::Eemd),
            "ceemdan" | "eemdan" => Ok(Algorithm::Ceemdan),
            other => Err(Error::InvalidParameter(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Local maxima and minima as `(index, value)` pairs, in index order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extrema {
    pub maxima: Vec<(usize, f64)>,
    pub minima: Vec<(usize, f64)>,
}

impl Extrema {
    pub fn count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }
}

/// Strict local extrema by three-point comparison.
///
/// A flat run bounded on both sides by lower (higher) samples counts as one
/// maximum (minimum) reported at its midpoint. The first and last samples are
/// never extrema, and neither is a run touching either end.
pub fn find_extrema(signal: &[f64]) -> Result<Extrema> {
    let n = signal.len();
    if n < 3 {
        return Err(Error::TooShort { len: n, min: 3 });
    }
    let mut out = Extrema::default();

    let mut i = 1;
    while i < n && signal[i] == signal[0] {
        i += 1;
    }
    while i < n - 1 {
        let v = signal[i];
        let mut end = i;
        while end + 1 < n && signal[end + 1] == v {
            end += 1;
        }
        if end == n - 1 {
            break;
        }
        let (left, right) = (signal[i - 1], signal[end + 1]);
        let mid = (i + end) / 2;
        if v > left && v > right {
            out.maxima.push((mid, v));
        } else if v < left && v < right {
            out.minima.push((mid, v));
        }
        i = end + 1;
    }
    Ok(out)
}

/// Natural cubic spline through `extrema`, evaluated at `0..length`.
///
/// Each end without an extremum on it is extended by reflecting the two
/// nearest extrema across that end sample before fitting.
pub fn envelope(extrema: &[(usize, f64)], length: usize) -> Result<Vec<f64>> {
    if extrema.len() < 2 {
        return Err(Error::InsufficientExtrema(extrema.len()));
    }
    let last = (length.max(1) - 1) as f64;
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(extrema.len() + 4);

    let first_idx = extrema[0].0;
    if first_idx > 0 {
        for &(idx, val) in extrema.iter().take(2).rev() {
            knots.push((-(idx as f64), val));
        }
    }
    knots.extend(extrema.iter().map(|&(i, v)| (i as f64, v)));
    let last_idx = extrema[extrema.len() - 1].0;
    if (last_idx as f64) < last {
        for &(idx, val) in extrema.iter().rev().take(2) {
            knots.push((2.0 * last - idx as f64, val));
        }
    }

    let spline = NaturalSpline::fit(&knots);
    Ok(spline.eval_grid(length))
}

/// Natural cubic spline on strictly increasing knots.
struct NaturalSpline<'a> {
    knots: &'a [(f64, f64)],
    second: Vec<f64>,
}

impl<'a> NaturalSpline<'a> {
    fn fit(knots: &'a [(f64, f64)]) -> Self {
        let n = knots.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for the interior second derivatives, solved
            // with the Thomas algorithm.
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for j in 0..m {
                let (x0, y0) = knots[j];
                let (x1, y1) = knots[j + 1];
                let (x2, y2) = knots[j + 2];
                let h0 = x1 - x0;
                let h1 = x2 - x1;
                diag[j] = 2.0 * (h0 + h1);
                upper[j] = h1;
                rhs[j] = 6.0 * ((y2 - y1) / h1 - (y1 - y0) / h0);
            }
            for j in 1..m {
                let lower = knots[j + 1].0 - knots[j].0;
                let w = lower / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for j in (0..m - 1).rev() {
                second[j + 1] = (rhs[j] - upper[j] * second[j + 2]) / diag[j];
            }
        }
        Self { knots, second }
    }

    fn eval_segment(&self, seg: usize, x: f64) -> f64 {
        let (x0, y0) = self.knots[seg];
        let (x1, y1) = self.knots[seg + 1];
        let (m0, m1) = (self.second[seg], self.second[seg + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }

    fn slope_at_end(&self, left: bool) -> f64 {
        let n = self.knots.len();
        let seg = if left { 0 } else { n - 2 };
        let (x0, y0) = self.knots[seg];
        let (x1, y1) = self.knots[seg + 1];
        let h = x1 - x0;
        let (m0, m1) = (self.second[seg], self.second[seg + 1]);
        if left {
            (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0
        } else {
            (y1 - y0) / h + h * (m0 + 2.0 * m1) / 6.0
        }
    }

    fn eval_grid(&self, length: usize) -> Vec<f64> {
        let n = self.knots.len();
        let (x_first, y_first) = self.knots[0];
        let (x_last, y_last) = self.knots[n - 1];
        let mut out = Vec::with_capacity(length);
        let mut seg = 0;
        for i in 0..length {
            let x = i as f64;
            let v = if x < x_first {
                y_first + self.slope_at_end(true) * (x - x_first)
            } else if x > x_last {
                y_last + self.slope_at_end(false) * (x - x_last)
            } else {
                while seg + 2 < n && x > self.knots[seg + 1].0 {
                    seg += 1;
                }
                self.eval_segment(seg, x)
            };
            out.push(v);
        }
        out
    }
}

/// Sifts one intrinsic mode function out of `signal`.
///
/// Returns the final candidate and the number of sifting passes performed.
pub fn extract_imf(signal: &[f64], cfg: &SiftConfig) -> Result<(Vec<f64>, usize)> {
    let n = signal.len();
    let mut current = signal.to_vec();
    let mut count = 0;
    loop {
        let ext = find_extrema(&current)?;
        if ext.maxima.len() < 2 || ext.minima.len() < 2 {
            if count == 0 {
                return Err(Error::InsufficientExtrema(
                    ext.maxima.len().min(ext.minima.len()),
                ));
            }
            break;
        }
        let upper = envelope(&ext.maxima, n)?;
        let lower = envelope(&ext.minima, n)?;

        let mut diff_sq = 0.0;
        let mut prev_sq = 0.0;
        for ((s, u), l) in current.iter_mut().zip(&upper).zip(&lower) {
            let mean = (u + l) / 2.0;
            let prev = *s;
            *s = prev - mean;
            diff_sq += mean * mean;
            prev_sq += prev * prev;
        }
        count += 1;

        let sd = if prev_sq > 0.0 { diff_sq / prev_sq } else { 0.0 };
        if sd < cfg.sd_threshold || count >= cfg.max_sift_iters {
            break;
        }
    }
    Ok((current, count))
}

fn validate_signal(signal: &[f64]) -> Result<()> {
    if signal.len() < 4 {
        return Err(Error::TooShort {
            len: signal.len(),
            min: 4,
        });
    }
    match signal.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Classical EMD: repeatedly sifts modes out of the running residue until it
/// has fewer than three extrema or `max_imfs` modes have been extracted.
pub fn emd(signal: &[f64], cfg: &SiftConfig) -> Result<Decomposition1D> {
    validate_signal(signal)?;
    cfg.validate()?;
    let mut residue = signal.to_vec();
    let mut imfs = Vec::new();
    while cfg.max_imfs.is_none_or(|max| imfs.len() < max) {
        if find_extrema(&residue)?.count() < 3 {
            break;
        }
        let imf = match extract_imf(&residue, cfg) {
            Ok((imf, _)) => imf,
            Err(Error::InsufficientExtrema(_)) => break,
            Err(e) => return Err(e),
        };
        if imf.iter().all(|&v| v == 0.0) {
            break;
        }
        sub_assign(&mut residue, &imf);
        imfs.push(imf);
    }
    Ok(Decomposition1D { imfs, residue })
}

/// Zero-mean Gaussian noise, deterministic per seed.
pub fn white_noise(length: usize, seed: u64, std: f64) -> Vec<f64> {
    if std == 0.0 {
        return vec![0.0; length];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..length)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * std
        })
        .collect()
}

/// The `i`-th EMD mode (1-based) of `noise`, or zeros if it has fewer modes.
pub fn noise_mode(noise: &[f64], i: usize, cfg: &SiftConfig) -> Result<Vec<f64>> {
    if i == 0 {
        return Err(Error::InvalidParameter("mode index is 1-based".into()));
    }
    let dec = emd(noise, cfg)?;
    Ok(dec
        .imfs
        .into_iter()
        .nth(i - 1)
        .unwrap_or_else(|| vec![0.0; noise.len()]))
}

fn first_mode(signal: &[f64], cfg: &SiftConfig) -> Result<Vec<f64>> {
    if find_extrema(signal)?.count() < 3 {
        return Ok(vec![0.0; signal.len()]);
    }
    match extract_imf(signal, cfg) {
        Ok((imf, _)) => Ok(imf),
        Err(Error::InsufficientExtrema(_)) => Ok(vec![0.0; signal.len()]),
        Err(e) => Err(e),
    }
}

/// Ensemble EMD: averages the modes of `nr` independently decomposed noisy
/// copies of the signal. Realizations with fewer modes are zero-padded.
pub fn eemd(signal: &[f64], cfg: &SiftConfig, ens: &EnsembleConfig) -> Result<Decomposition1D> {
    validate_signal(signal)?;
    cfg.validate()?;
    ens.validate()?;
    let n = signal.len();
    let beta = ens.nstd * std_dev(signal);

    let runs: Vec<Vec<Vec<f64>>> = (0..ens.nr)
        .into_par_iter()
        .map(|m| {
            let noisy = noisy_copy(signal, beta, ens.realization_seed(m));
            emd(&noisy, cfg).map(|d| d.imfs)
        })
        .collect::<Result<_>>()?;

    let k = runs.iter().map(Vec::len).max().unwrap_or(0);
    let mut imfs = vec![vec![0.0; n]; k];
    for run in &runs {
        for (acc, mode) in imfs.iter_mut().zip(run) {
            add_assign(acc, mode);
        }
    }
    let scale = ens.nr as f64;
    for mode in &mut imfs {
        mode.iter_mut().for_each(|v| *v /= scale);
    }

    let mut residue = signal.to_vec();
    for mode in &imfs {
        sub_assign(&mut residue, mode);
    }
    Ok(Decomposition1D { imfs, residue })
}

/// CEEMDAN: stage-wise recursion where mode `i + 1` is the ensemble mean of
/// the first EMD mode of `r_i + beta_i * E_i(w_m)`, with `E_i` the `i`-th EMD
/// mode of noise realization `w_m` and `beta_i = nstd * std(r_i)`.
pub fn ceemdan(signal: &[f64], cfg: &SiftConfig, ens: &EnsembleConfig) -> Result<Decomposition1D> {
    validate_signal(signal)?;
    cfg.validate()?;
    ens.validate()?;
    let n = signal.len();

    let noises: Vec<Vec<f64>> = (0..ens.nr)
        .map(|m| white_noise(n, ens.realization_seed(m), 1.0))
        .collect();
    // Noise modes are only needed once the ensemble actually perturbs the residue.
    let noise_modes: Vec<Vec<Vec<f64>>> = if ens.nstd > 0.0 {
        noises
            .par_iter()
            .map(|w| emd(w, cfg).map(|d| d.imfs))
            .collect::<Result<_>>()?
    } else {
        vec![Vec::new(); ens.nr]
    };

    let mut residue = signal.to_vec();
    let mut imfs: Vec<Vec<f64>> = Vec::new();
    while cfg.max_imfs.is_none_or(|max| imfs.len() < max) {
        if find_extrema(&residue)?.count() < 3 {
            break;
        }
        let stage = imfs.len();
        let beta = ens.nstd * std_dev(&residue);
        let firsts: Vec<Vec<f64>> = (0..ens.nr)
            .into_par_iter()
            .map(|m| {
                let perturbation: Option<&[f64]> = if stage == 0 {
                    Some(&noises[m])
                } else {
                    noise_modes[m].get(stage - 1).map(Vec::as_slice)
                };
                let input = match perturbation {
                    Some(w) if beta > 0.0 => residue
                        .iter()
                        .zip(w)
                        .map(|(r, w)| r + beta * w)
                        .collect(),
                    _ => residue.clone(),
                };
                first_mode(&input, cfg)
            })
            .collect::<Result<_>>()?;

        let mut mode = vec![0.0; n];
        for f in &firsts {
            add_assign(&mut mode, f);
        }
        let scale = ens.nr as f64;
        mode.iter_mut().for_each(|v| *v /= scale);
        if mode.iter().all(|&v| v == 0.0) {
            break;
        }
        sub_assign(&mut residue, &mode);
        imfs.push(mode);
    }
    Ok(Decomposition1D { imfs, residue })
}

fn noisy_copy(signal: &[f64], beta: f64, seed: u64) -> Vec<f64> {
    if beta == 0.0 {
        return signal.to_vec();
    }
    let noise = white_noise(signal.len(), seed, 1.0);
    signal.iter().zip(&noise).map(|(x, w)| x + beta * w).collect()
}

pub(crate) fn std_dev(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

fn add_assign(acc: &mut [f64], x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(a, v)| *a += v);
}

fn sub_assign(acc: &mut [f64], x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(a, v)| *a -= v);
}
