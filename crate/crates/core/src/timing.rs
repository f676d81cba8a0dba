//! Wall-clock timing harness and box-plot statistics.
//!
//! Each scenario times the serialized and per-channel decompositions on one
//! of the synthetic datasets, repeats every measurement a fixed number of
//! times after a single warm-up run, and summarizes the durations with
//! quartiles (linear interpolation between order statistics) and the
//! `1.5 * IQR` outlier rule.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::slicewise_decompose;
use crate::emd::{Algorithm, EnsembleConfig, SiftConfig};
use crate::error::{Error, Result};
use crate::recognition::FaceDataset;
use crate::serializer::{image_to_multisignal, serial_decompose, TransitionSpec};
use crate::synth::{add_speckle, make_ati, multivariate_sinusoids, AtiSpec, PickupMask, SpeckleSpec};
use crate::types::{ImfTensor, MultiSignal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSample {
    pub scenario: String,
    pub algorithm: String,
    pub d: usize,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub outliers: Vec<f64>,
}

/// Runs `task` once to warm up, then `reps` more times, timing each run.
pub fn time_repeated<T>(
    scenario: &str,
    algorithm: &str,
    d: usize,
    reps: usize,
    mut task: impl FnMut() -> Result<T>,
) -> Result<Vec<TimingSample>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be >= 1".into()));
    }
    let context = |run: usize| format!("{scenario}/{algorithm}/D={d} run {run}");
    task().map_err(|e| Error::Task {
        context: context(0),
        source: Box::new(e),
    })?;
    let mut samples = Vec::with_capacity(reps);
    for run in 1..=reps {
        let start = Instant::now();
        let out = task().map_err(|e| Error::Task {
            context: context(run),
            source: Box::new(e),
        })?;
        let elapsed = start.elapsed();
        drop(out);
        samples.push(TimingSample {
            scenario: scenario.to_owned(),
            algorithm: algorithm.to_owned(),
            d,
            duration_ms: (elapsed.as_secs_f64() * 1e3).max(1e-6),
        });
    }
    Ok(samples)
}

/// Quantile `p` of sorted data by linear interpolation at position `p (n - 1)`.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn quartile_stats(samples: &[f64]) -> Result<QuartileSummary> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples to summarize".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let outliers = sorted.iter().copied().filter(|&v| v < lo || v > hi).collect();
    Ok(QuartileSummary {
        n: sorted.len(),
        q1,
        median,
        q3,
        iqr,
        outliers,
    })
}

/// One row of the benchmark report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub algorithm: String,
    #[serde(rename = "D")]
    pub d: usize,
    pub n: usize,
    pub q1_ms: f64,
    pub median_ms: f64,
    pub q3_ms: f64,
    pub iqr_ms: f64,
    pub outliers_ms: Vec<f64>,
}

impl SummaryRow {
    fn new(scenario: &str, algorithm: &str, d: usize, s: QuartileSummary) -> Self {
        Self {
            scenario: scenario.to_owned(),
            algorithm: algorithm.to_owned(),
            d,
            n: s.n,
            q1_ms: s.q1,
            median_ms: s.median,
            q3_ms: s.q3,
            iqr_ms: s.iqr,
            outliers_ms: s.outliers,
        }
    }
}

/// Median of the per-channel run over the median of the serialized run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Speedup {
    pub scenario: String,
    pub algorithm: String,
    pub slicewise_over_serial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub reps: usize,
    pub sift: SiftConfig,
    pub ensemble: EnsembleConfig,
    pub notes: Vec<String>,
    pub summaries: Vec<SummaryRow>,
    pub speedups: Vec<Speedup>,
}

impl BenchReport {
    pub fn row(&self, scenario: &str, algorithm: &str, d: usize) -> Option<&SummaryRow> {
        self.summaries
            .iter()
            .find(|r| r.scenario == scenario && r.algorithm == algorithm && r.d == d)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    /// Same columns as the JSON rows; outliers are `;`-separated.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record([
            "scenario",
            "algorithm",
            "D",
            "n",
            "q1_ms",
            "median_ms",
            "q3_ms",
            "iqr_ms",
            "outliers_ms",
        ])
        .map_err(io_err)?;
        for r in &self.summaries {
            let outliers = r
                .outliers_ms
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                r.scenario.clone(),
                r.algorithm.clone(),
                r.d.to_string(),
                r.n.to_string(),
                r.q1_ms.to_string(),
                r.median_ms.to_string(),
                r.q3_ms.to_string(),
                r.iqr_ms.to_string(),
                outliers,
            ])
            .map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Benchmark scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Serialized algorithms on the six-variate signals over a grid of `D`.
    MultivariateDSweep,
    /// Serialized vs per-channel algorithms on the six-variate signals, `D = 50`.
    MultivariateAlgos,
    /// Serialized vs per-channel algorithms on the 101x101 texture image, `D = 20`.
    AtiAlgos,
    /// Serialized algorithms on one noisy face image, `D = 20`.
    FacePerImage,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::MultivariateDSweep,
        Scenario::MultivariateAlgos,
        Scenario::AtiAlgos,
        Scenario::FacePerImage,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scenario::MultivariateDSweep => "multivariate-d-sweep",
            Scenario::MultivariateAlgos => "multivariate-algos",
            Scenario::AtiAlgos => "ati-algos",
            Scenario::FacePerImage => "face-per-image",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multivariate-d-sweep" | "d-sweep" => Ok(Scenario::MultivariateDSweep),
            "multivariate-algos" => Ok(Scenario::MultivariateAlgos),
            "ati-algos" => Ok(Scenario::AtiAlgos),
            "face-per-image" => Ok(Scenario::FacePerImage),
            other => Err(Error::UnknownScenario(other.to_owned())),
        }
    }
}

pub const D_SWEEP: [usize; 8] = [1, 5, 10, 20, 50, 100, 200, 500];

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub reps: usize,
    pub sift: SiftConfig,
    pub ensemble: EnsembleConfig,
    pub algorithms: Vec<Algorithm>,
    pub d_grid: Vec<usize>,
    /// Required for [`Scenario::FacePerImage`].
    pub dataset: Option<PathBuf>,
    pub notes: Vec<String>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            reps: 10,
            sift: SiftConfig::default(),
            ensemble: EnsembleConfig::default(),
            algorithms: Algorithm::ALL.to_vec(),
            d_grid: D_SWEEP.to_vec(),
            dataset: None,
            notes: Vec::new(),
        }
    }
}

fn serial_label(algo: Algorithm) -> String {
    format!("serial-{}", algo.name())
}

fn slicewise_label(algo: Algorithm) -> String {
    format!("slicewise-{}", algo.name())
}

/// Runs the requested scenarios single-threaded and collects one summary per
/// `(scenario, algorithm, D)`.
pub fn bench_suite(scenarios: &[Scenario], opts: &BenchOptions) -> Result<BenchReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_scenarios(scenarios, opts))
}

fn run_scenarios(scenarios: &[Scenario], opts: &BenchOptions) -> Result<BenchReport> {
    let mut report = BenchReport {
        reps: opts.reps,
        sift: opts.sift,
        ensemble: opts.ensemble,
        notes: opts.notes.clone(),
        summaries: Vec::new(),
        speedups: Vec::new(),
    };
    for &scenario in scenarios {
        let id = scenario.id();
        match scenario {
            Scenario::MultivariateDSweep => {
                let x = multivariate_sinusoids(&PickupMask::default(), 1000, 1000.0)?;
                for &d in &opts.d_grid {
                    let spec = TransitionSpec::new(d)?;
                    for &algo in &opts.algorithms {
                        let label = serial_label(algo);
                        let samples = time_repeated(id, &label, d, opts.reps, || {
                            serial_decompose(&x, spec, algo, &opts.sift, &opts.ensemble)
                        })?;
                        push_summary(&mut report, id, &label, d, &samples)?;
                    }
                }
            }
            Scenario::MultivariateAlgos => {
                let x = multivariate_sinusoids(&PickupMask::default(), 1000, 1000.0)?;
                compare_algorithms(&mut report, id, &x, 50, opts)?;
            }
            Scenario::AtiAlgos => {
                let (ati, _) = make_ati(&AtiSpec::default());
                let x = image_to_multisignal(&ati)?;
                compare_algorithms(&mut report, id, &x, 20, opts)?;
            }
            Scenario::FacePerImage => {
                let dir = opts
                    .dataset
                    .clone()
                    .ok_or_else(|| Error::DatasetNotFound(PathBuf::from("<unset>")))?;
                let ds = FaceDataset::load(&dir)?;
                let speckled = add_speckle(
                    &ds.images[0],
                    &SpeckleSpec {
                        snr_db: -6.0,
                        seed: opts.ensemble.base_seed,
                    },
                )?;
                let x = image_to_multisignal(&speckled.image)?;
                let spec = TransitionSpec::new(20)?;
                for &algo in &opts.algorithms {
                    let label = serial_label(algo);
                    let samples = time_repeated(id, &label, 20, opts.reps, || {
                        serial_decompose(&x, spec, algo, &opts.sift, &opts.ensemble)
                    })?;
                    push_summary(&mut report, id, &label, 20, &samples)?;
                }
            }
        }
    }
    Ok(report)
}

fn compare_algorithms(
    report: &mut BenchReport,
    id: &str,
    x: &MultiSignal,
    d: usize,
    opts: &BenchOptions,
) -> Result<()> {
    let spec = TransitionSpec::new(d)?;
    for &algo in &opts.algorithms {
        let serial = time_repeated(id, &serial_label(algo), d, opts.reps, || {
            serial_decompose(x, spec, algo, &opts.sift, &opts.ensemble)
        })?;
        let slices = time_repeated(id, &slicewise_label(algo), d, opts.reps, || -> Result<ImfTensor> {
            slicewise_decompose(x, algo, &opts.sift, &opts.ensemble)
        })?;
        let serial_median = push_summary(report, id, &serial_label(algo), d, &serial)?;
        let slice_median = push_summary(report, id, &slicewise_label(algo), d, &slices)?;
        report.speedups.push(Speedup {
            scenario: id.to_owned(),
            algorithm: algo.name().to_owned(),
            slicewise_over_serial: slice_median / serial_median,
        });
    }
    Ok(())
}

fn push_summary(
    report: &mut BenchReport,
    id: &str,
    label: &str,
    d: usize,
    samples: &[TimingSample],
) -> Result<f64> {
    let durations: Vec<f64> = samples.iter().map(|s| s.duration_ms).collect();
    let summary = quartile_stats(&durations)?;
    let median = summary.median;
    report.summaries.push(SummaryRow::new(id, label, d, summary));
    Ok(median)
}

pub fn write_report(report: &BenchReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("bench.json");
    let csv = dir.join("bench.csv");
    report.write_json(&json)?;
    report.write_csv(std::io::BufWriter::new(std::fs::File::create(&csv)?))?;
    Ok((json, csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_of_one_to_nine() {
        let s: Vec<f64> = (1..=9).map(f64::from).collect();
        let q = quartile_stats(&s).unwrap();
        assert_eq!((q.q1, q.median, q.q3, q.iqr), (3.0, 5.0, 7.0, 4.0));
        assert!(q.outliers.is_empty());
        assert_eq!(q.n, 9);
    }

    #[test]
    fn quartiles_single_sample() {
        let q = quartile_stats(&[4.2]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (4.2, 4.2, 4.2));
    }

    #[test]
    fn quartiles_flag_outlier() {
        let q = quartile_stats(&[1.0, 1.0, 1.0, 1.0, 100.0]).unwrap();
        assert_eq!(q.outliers, vec![100.0]);
    }

    #[test]
    fn quartiles_reject_empty() {
        assert!(quartile_stats(&[]).is_err());
    }

    #[test]
    fn time_repeated_counts_and_context() {
        let mut calls = 0;
        let samples = time_repeated("s", "a", 3, 10, || {
            calls += 1;
            Ok::<_, Error>(calls)
        })
        .unwrap();
        assert_eq!(samples.len(), 10);
        assert_eq!(calls, 11);
        assert!(samples.iter().all(|s| s.duration_ms > 0.0 && s.d == 3));

        let mut n = 0;
        let err = time_repeated("s", "a", 3, 5, || {
            n += 1;
            if n == 3 {
                Err(Error::InvalidParameter("boom".into()))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(err.to_string().contains("s/a/D=3 run 2"), "{err}");
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!(
            "nope".parse::<Scenario>(),
            Err(Error::UnknownScenario(_))
        ));
        for s in Scenario::ALL {
            assert_eq!(s.id().parse::<Scenario>().unwrap(), s);
        }
    }
}
