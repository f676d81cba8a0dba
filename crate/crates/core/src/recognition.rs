//! Face recognition on decomposed noisy images.
//!
//! Every image is corrupted with speckle noise, decomposed with a serialized
//! algorithm, normalized to ten modes, and reduced to a feature vector by
//! summing a contiguous range of modes. A k-nearest-neighbour classifier is
//! scored with stratified 10-fold cross-validation, either for one range or
//! for all 55 ranges at once.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::emd::{Algorithm, EnsembleConfig, SiftConfig};
use crate::error::{Error, Result};
use crate::io::read_pgm_file;
use crate::serializer::{image_to_multisignal, serial_decompose, TransitionSpec};
use crate::synth::{add_speckle, SpeckleSpec};
use crate::types::{Image, ImfTensor};

/// Mode count every decomposition is normalized to.
pub const IMF_COUNT: usize = 10;

/// Labelled grayscale images in the `sN/M.pgm` directory layout.
#[derive(Debug, Clone)]
pub struct FaceDataset {
    pub images: Vec<Image>,
    pub labels: Vec<u32>,
}

impl FaceDataset {
    /// Loads every `s<label>/<n>.pgm`, subjects and images in numeric order.
    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::DatasetNotFound(dir.to_path_buf()));
        }
        let mut subjects: Vec<(u32, PathBuf)> = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            let label = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_prefix('s'))
                .and_then(|n| n.parse::<u32>().ok());
            if let (Some(label), true) = (label, path.is_dir()) {
                subjects.push((label, path));
            }
        }
        if subjects.is_empty() {
            return Err(Error::DatasetNotFound(dir.to_path_buf()));
        }
        subjects.sort();

        let mut images = Vec::new();
        let mut labels = Vec::new();
        for (label, sub) in subjects {
            let mut files: Vec<(u32, PathBuf)> = std::fs::read_dir(&sub)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
                .filter_map(|p| {
                    let n = p.file_stem()?.to_str()?.parse().ok()?;
                    Some((n, p))
                })
                .collect();
            files.sort();
            for (_, path) in files {
                images.push(read_pgm_file(&path)?.to_image());
                labels.push(label);
            }
        }
        let ds = Self { images, labels };
        ds.check_uniform()?;
        Ok(ds)
    }

    fn check_uniform(&self) -> Result<()> {
        let first = self
            .images
            .first()
            .ok_or_else(|| Error::Unbalanced("dataset has no images".into()))?;
        if let Some(bad) = self
            .images
            .iter()
            .find(|i| (i.width, i.height) != (first.width, first.height))
        {
            return Err(Error::Unbalanced(format!(
                "image sizes differ: {}x{} vs {}x{}",
                first.width, first.height, bad.width, bad.height
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Inclusive 1-based mode range, `hi` the highest-frequency end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImfRange {
    pub hi: usize,
    pub lo: usize,
}

impl ImfRange {
    pub fn new(hi: usize, lo: usize) -> Result<Self> {
        if !(1 <= hi && hi <= lo && lo <= IMF_COUNT) {
            return Err(Error::InvalidParameter(format!(
                "IMF range {hi}:{lo} must satisfy 1 <= hi <= lo <= {IMF_COUNT}"
            )));
        }
        Ok(Self { hi, lo })
    }

    /// All 55 valid ranges, ordered by `hi` then `lo`.
    pub fn all() -> impl Iterator<Item = ImfRange> {
        (1..=IMF_COUNT).flat_map(|hi| (hi..=IMF_COUNT).map(move |lo| ImfRange { hi, lo }))
    }
}

impl std::str::FromStr for ImfRange {
    type Err = Error;

    /// Parses `HI:LO`.
    fn from_str(s: &str) -> Result<Self> {
        let (hi, lo) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("range `{s}` is not HI:LO")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("range `{s}` is not HI:LO")))
        };
        ImfRange::new(parse(hi)?, parse(lo)?)
    }
}

/// Zero-fills or truncates trailing modes so that `K == target`.
pub fn normalize_imf_count(t: &ImfTensor, target: usize) -> ImfTensor {
    t.with_mode_count(target)
}

/// Sum of modes `hi..=lo`, flattened row-major (image rows first).
pub fn sum_imf_range(t: &ImfTensor, r: ImfRange) -> Result<Vec<f64>> {
    if t.modes() != IMF_COUNT {
        return Err(Error::Shape(format!(
            "expected {IMF_COUNT} modes, got {}",
            t.modes()
        )));
    }
    let summed = t.sum_range(r.hi - 1, r.lo - 1);
    let (rows, cols) = (t.rows(), t.channels());
    let mut out = Vec::with_capacity(rows * cols);
    for y in 0..rows {
        for x in 0..cols {
            out.push(summed[x * rows + y]);
        }
    }
    Ok(out)
}

/// Majority vote among the first `k` of `neighbors`, which must be sorted by
/// distance. Ties go to the smaller summed distance, then the lower label.
fn vote(neighbors: &[(f64, u32)], k: usize) -> u32 {
    let mut tally: BTreeMap<u32, (usize, f64)> = BTreeMap::new();
    for &(dist, label) in neighbors.iter().take(k) {
        let e = tally.entry(label).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += dist;
    }
    let mut best: Option<(u32, usize, f64)> = None;
    for (&label, &(votes, dist)) in &tally {
        let better = match best {
            None => true,
            Some((_, bv, bd)) => votes > bv || (votes == bv && dist < bd),
        };
        if better {
            best = Some((label, votes, dist));
        }
    }
    best.map(|(l, _, _)| l).unwrap_or_default()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn sort_neighbors(neighbors: &mut [(f64, u32)]) {
    neighbors.sort_by(|a, b| a.0.total_cmp(&b.0));
}

/// k-nearest-neighbour label of `query` under Euclidean distance.
pub fn knn_classify(train: &[(&[f64], u32)], query: &[f64], k: usize) -> Result<u32> {
    if train.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let mut neighbors: Vec<(f64, u32)> = train
        .iter()
        .map(|(f, label)| (euclidean(f, query), *label))
        .collect();
    sort_neighbors(&mut neighbors);
    Ok(vote(&neighbors, k))
}

/// Something that can label held-out samples given labelled training samples.
/// Samples are referred to by their index in the dataset.
pub trait Pipeline: Sync {
    fn predict(&self, train: &[usize], test: &[usize], labels: &[u32]) -> Vec<u32>;
}

/// k-NN over a precomputed symmetric `n x n` distance matrix.
pub struct DistanceKnn {
    n: usize,
    dist: Vec<f64>,
    k: usize,
}

impl DistanceKnn {
    /// Pairwise Euclidean distances between `features`.
    pub fn from_features(features: &[Vec<f64>], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        let n = features.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| euclidean(&features[i], &features[j])).collect())
            .collect();
        Ok(Self {
            n,
            dist: rows.concat(),
            k,
        })
    }
}

impl Pipeline for DistanceKnn {
    fn predict(&self, train: &[usize], test: &[usize], labels: &[u32]) -> Vec<u32> {
        test.iter()
            .map(|&q| {
                let mut neighbors: Vec<(f64, u32)> = train
                    .iter()
                    .map(|&t| (self.dist[q * self.n + t], labels[t]))
                    .collect();
                sort_neighbors(&mut neighbors);
                vote(&neighbors, self.k)
            })
            .collect()
    }
}

/// Fold index for every sample: within each class the samples are shuffled
/// with `seed` and dealt round-robin, so each fold holds the same number of
/// samples of every class.
pub fn stratified_folds(labels: &[u32], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidParameter("need at least 2 folds".into()));
    }
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    for (label, mut idx) in by_class {
        if idx.len() % folds != 0 {
            return Err(Error::Unbalanced(format!(
                "class {label} has {} samples, not a multiple of {folds} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (p, i) in idx.into_iter().enumerate() {
            assignment[i] = p % folds;
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub mean: f64,
    /// Sample standard deviation of the fold accuracies.
    pub std: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Stratified k-fold cross-validation of `pipeline`.
pub fn kfold_cv(
    labels: &[u32],
    pipeline: &impl Pipeline,
    folds: usize,
    seed: u64,
) -> Result<CvResult> {
    let assignment = stratified_folds(labels, folds, seed)?;
    let fold_accuracies: Vec<f64> = (0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == f);
            let predicted = pipeline.predict(&train, &test, labels);
            let correct = test
                .iter()
                .zip(&predicted)
                .filter(|(&i, &p)| labels[i] == p)
                .count();
            correct as f64 / test.len() as f64
        })
        .collect();
    let n = fold_accuracies.len() as f64;
    let mean = fold_accuracies.iter().sum::<f64>() / n;
    let var = fold_accuracies
        .iter()
        .map(|a| (a - mean) * (a - mean))
        .sum::<f64>()
        / (n - 1.0);
    Ok(CvResult {
        mean,
        std: var.sqrt(),
        fold_accuracies,
    })
}

/// Settings for the noisy-face decomposition pipeline.
#[derive(Debug, Clone)]
pub struct RecognitionConfig {
    pub algorithm: Algorithm,
    pub d: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub sift: SiftConfig,
    pub ensemble: EnsembleConfig,
    pub k: usize,
    pub folds: usize,
}

impl Default for RecognitionConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Emd,
            d: 20,
            snr_db: -6.0,
            seed: 0,
            sift: SiftConfig::default(),
            ensemble: EnsembleConfig::default(),
            k: 1,
            folds: 10,
        }
    }
}

/// Decomposed noisy images, normalized to [`IMF_COUNT`] modes, plus the raw
/// mode counts before normalization.
pub struct DecomposedDataset {
    pub tensors: Vec<ImfTensor>,
    pub raw_mode_counts: Vec<usize>,
    pub labels: Vec<u32>,
}

/// Speckles and decomposes every image. Image `i` uses speckle seed `seed + i`.
pub fn decompose_dataset(ds: &FaceDataset, cfg: &RecognitionConfig) -> Result<DecomposedDataset> {
    let spec = TransitionSpec::new(cfg.d)?;
    let out: Vec<(ImfTensor, usize)> = ds
        .images
        .par_iter()
        .enumerate()
        .map(|(i, img)| {
            let noisy = add_speckle(
                img,
                &SpeckleSpec {
                    snr_db: cfg.snr_db,
                    seed: cfg.seed.wrapping_add(i as u64),
                },
            )?;
            let x = image_to_multisignal(&noisy.image)?;
            let t = serial_decompose(&x, spec, cfg.algorithm, &cfg.sift, &cfg.ensemble)?;
            Ok((normalize_imf_count(&t, IMF_COUNT), t.modes()))
        })
        .collect::<Result<_>>()?;
    let (tensors, raw_mode_counts) = out.into_iter().unzip();
    Ok(DecomposedDataset {
        tensors,
        raw_mode_counts,
        labels: ds.labels.clone(),
    })
}

/// Cross-validated accuracy for a single mode range.
pub fn evaluate_range(
    data: &DecomposedDataset,
    range: ImfRange,
    k: usize,
    folds: usize,
    seed: u64,
) -> Result<CvResult> {
    let features = data
        .tensors
        .iter()
        .map(|t| sum_imf_range(t, range))
        .collect::<Result<Vec<_>>>()?;
    let knn = DistanceKnn::from_features(&features, k)?;
    kfold_cv(&data.labels, &knn, folds, seed)
}

/// Accuracy for every `(hi, lo)` with `hi <= lo`; cells with `hi > lo` are `None`.
#[derive(Debug, Clone, Serialize)]
pub struct Heatmap {
    /// `cells[hi - 1][lo - 1]`.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl Heatmap {
    pub fn get(&self, r: ImfRange) -> Option<f64> {
        self.cells[r.hi - 1][r.lo - 1]
    }

    pub fn defined_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }

    /// Best range; ties go to the first in `(hi, lo)` order.
    pub fn argmax(&self) -> Option<(ImfRange, f64)> {
        let mut best: Option<(ImfRange, f64)> = None;
        for r in ImfRange::all() {
            if let Some(acc) = self.get(r) {
                if best.is_none_or(|(_, b)| acc > b) {
                    best = Some((r, acc));
                }
            }
        }
        best
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..IMF_COUNT).filter_map(|i| self.cells[i][i]).collect()
    }

    /// Rows are `hi`, columns are `lo`; undefined cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hi\\lo");
        for lo in 1..=IMF_COUNT {
            out.push_str(&format!(",{lo}"));
        }
        out.push('\n');
        for (hi, row) in self.cells.iter().enumerate() {
            out.push_str(&(hi + 1).to_string());
            for cell in row {
                out.push(',');
                if let Some(v) = cell {
                    out.push_str(&format!("{v:.6}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn heatmap_sweep(
    data: &DecomposedDataset,
    k: usize,
    folds: usize,
    seed: u64,
) -> Result<Heatmap> {
    let mut cells = vec![vec![None; IMF_COUNT]; IMF_COUNT];
    for r in ImfRange::all() {
        let cv = evaluate_range(data, r, k, folds, seed)?;
        cells[r.hi - 1][r.lo - 1] = Some(cv.mean);
    }
    Ok(Heatmap { cells })
}
