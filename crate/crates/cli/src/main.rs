use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use serial_emd::io::{
    decode_pgm, default_header, read_csv, read_pgm_file, write_csv_file, write_pgm_file, GrayImage,
};
use serial_emd::recognition::{
    decompose_dataset, evaluate_range, heatmap_sweep, FaceDataset, ImfRange, RecognitionConfig,
};
use serial_emd::synth::{
    add_speckle, make_ati, multivariate_sinusoids, snr_db, AtiSpec, PickupMask, SpeckleSpec,
    VARIATE_NAMES,
};
use serial_emd::timing::{bench_suite, write_report, BenchOptions, Scenario};
use serial_emd::{
    image_to_multisignal, imf_tensor_to_images, serial_decompose, slicewise_decompose, Algorithm,
    EnsembleConfig, Error, ImfTensor, MultiSignal, SiftConfig, TransitionSpec,
};

const EXIT_BAD_INPUT: u8 = 2;
const EXIT_DATASET_MISSING: u8 = 3;

#[derive(Parser)]
#[command(
    name = "serial-emd",
    version,
    about = "Serialized EMD/EEMD/CEEMDAN for multi-channel signals and images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a CSV multi-signal or a PGM image into modes.
    Decompose(DecomposeArgs),
    /// Generate synthetic inputs.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
    },
    /// Time serialized and per-channel decompositions.
    Bench(BenchArgs),
    /// Face recognition on summed mode ranges with k-NN and k-fold CV.
    Recognize(RecognizeArgs),
}

#[derive(Clone, Copy, Debug)]
enum DArg {
    Auto,
    Fixed(usize),
}

impl FromStr for DArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(DArg::Auto);
        }
        match s.parse::<usize>() {
            Ok(d) if d >= 1 => Ok(DArg::Fixed(d)),
            _ => Err(format!("`{s}` is not a positive integer or `auto`")),
        }
    }
}

impl DArg {
    fn resolve(self, rows: usize) -> Result<TransitionSpec> {
        Ok(match self {
            DArg::Auto => TransitionSpec::auto(rows),
            DArg::Fixed(d) => TransitionSpec::new(d)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Serial,
    Slicewise,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Serial => "serial",
            Method::Slicewise => "slicewise",
        }
    }
}

#[derive(Args, Clone)]
struct DecompParams {
    /// emd, eemd or ceemdan (`eemdan` is accepted as ceemdan).
    #[arg(long, default_value = "emd")]
    algo: Algorithm,
    /// Noise amplitude relative to the signal standard deviation.
    #[arg(long, default_value_t = 0.2)]
    nstd: f64,
    /// Ensemble size.
    #[arg(long, default_value_t = 100)]
    nr: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cauchy-type stopping threshold for sifting.
    #[arg(long, default_value_t = 0.2)]
    sd: f64,
    #[arg(long, default_value_t = 300)]
    max_sift_iters: usize,
    /// Stop after this many IMFs.
    #[arg(long)]
    max_imfs: Option<usize>,
}

impl DecompParams {
    fn sift(&self) -> SiftConfig {
        SiftConfig {
            sd_threshold: self.sd,
            max_sift_iters: self.max_sift_iters,
            max_imfs: self.max_imfs,
        }
    }

    fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig {
            nstd: self.nstd,
            nr: self.nr,
            base_seed: self.seed,
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input `.csv` (header row, columns are channels) or binary `.pgm`.
    input: PathBuf,
    #[command(flatten)]
    params: DecompParams,
    /// Transition length, or `auto` for 20% of the channel length.
    #[arg(long, default_value = "auto")]
    d: DArg,
    #[arg(long, value_enum, default_value_t = Method::Serial)]
    method: Method,
    #[arg(long, default_value = "modes")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SynthKind {
    /// Six-variate multi-tone signals as `signals.csv`.
    Signals {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1000.0)]
        fs: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Artificial texture image and its three components.
    Ati {
        #[arg(long, default_value_t = 101)]
        size: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Multiplicative speckle noise on a PGM image.
    Speckle {
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true, default_value_t = -6.0)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output PGM file; the unclamped values go to the same path with a `.csv` extension.
        #[arg(long, default_value = "speckled.pgm")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// multivariate-d-sweep (alias d-sweep), multivariate-algos, ati-algos or
    /// face-per-image. Repeatable; defaults to the scenarios that need no dataset.
    #[arg(long)]
    scenario: Vec<String>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Restrict to these algorithms. Repeatable.
    #[arg(long)]
    algo: Vec<Algorithm>,
    #[arg(long, default_value_t = 0.2)]
    nstd: f64,
    #[arg(long, default_value_t = 100)]
    nr: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Transition lengths for the D sweep. Repeatable.
    #[arg(long)]
    d: Vec<usize>,
    /// Face dataset directory (`sN/M.pgm`).
    #[arg(long, env = "SERIAL_EMD_DATASET")]
    dataset: Option<PathBuf>,
    #[arg(long, default_value = "bench")]
    out: PathBuf,
}

#[derive(Args)]
struct RecognizeArgs {
    #[command(flatten)]
    params: DecompParams,
    /// Face dataset directory (`sN/M.pgm`).
    #[arg(long, env = "SERIAL_EMD_DATASET")]
    dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    d: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = -6.0)]
    snr_db: f64,
    /// Mode range `HI:LO`, 1-based and inclusive.
    #[arg(long, default_value = "2:7", conflicts_with = "sweep")]
    range: ImfRange,
    /// Evaluate all 55 mode ranges.
    #[arg(long)]
    sweep: bool,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose(args) => cmd_decompose(&args),
        Command::Synth { kind } => cmd_synth(&kind),
        Command::Bench(args) => cmd_bench(&args),
        Command::Recognize(args) => cmd_recognize(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match root(e) {
                Error::DatasetNotFound(_) => EXIT_DATASET_MISSING,
                Error::Io(io) if io.kind() != std::io::ErrorKind::NotFound => 1,
                Error::Json(_) => 1,
                _ => EXIT_BAD_INPUT,
            };
        }
        if let Some(e) = cause.downcast_ref::<std::io::Error>() {
            if e.kind() == std::io::ErrorKind::NotFound {
                return EXIT_BAD_INPUT;
            }
        }
    }
    1
}

fn root(e: &Error) -> &Error {
    match e {
        Error::Task { source, .. } => root(source),
        other => other,
    }
}

enum Input {
    Table(Vec<String>, MultiSignal),
    Image(MultiSignal),
}

fn read_input(path: &Path) -> Result<Input> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path.display().to_string();
    let is_pgm = bytes.starts_with(b"P5")
        || path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        let img = decode_pgm(&bytes, &name)?.to_image();
        Ok(Input::Image(image_to_multisignal(&img)?))
    } else {
        let table = read_csv(bytes.as_slice(), &name)?;
        Ok(Input::Table(table.header, table.signal))
    }
}

fn mode_name(k: usize, ext: &str) -> String {
    format!("mode_{:02}.{ext}", k + 1)
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<()> {
    let input = read_input(&args.input)?;
    let (x, header, format) = match &input {
        Input::Table(h, x) => (x, h.clone(), "csv"),
        Input::Image(x) => (x, default_header(x.channels()), "pgm"),
    };
    let sift = args.params.sift();
    let ens = args.params.ensemble();
    let spec = args.d.resolve(x.rows())?;
    let t = match args.method {
        Method::Serial => serial_decompose(x, spec, args.params.algo, &sift, &ens)?,
        Method::Slicewise => slicewise_decompose(x, args.params.algo, &sift, &ens)?,
    };

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_modes(&args.out, &t, &header, format == "pgm")?;
    let sidecar = json!({
        "input": args.input.display().to_string(),
        "format": format,
        "method": args.method.name(),
        "M": t.rows(),
        "N": t.channels(),
        "D": spec.d,
        "K": t.modes(),
        "residue_mode": t.modes(),
        "algorithm": args.params.algo,
        "seed": args.params.seed,
        "nstd": args.params.nstd,
        "nr": args.params.nr,
        "sd_threshold": sift.sd_threshold,
        "max_sift_iters": sift.max_sift_iters,
        "max_imfs": sift.max_imfs,
    });
    let path = args.out.join("decomposition.json");
    fs::write(&path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    println!(
        "{} modes of {}x{} written to {}",
        t.modes(),
        t.rows(),
        t.channels(),
        args.out.display()
    );
    Ok(())
}

fn write_modes(dir: &Path, t: &ImfTensor, header: &[String], images: bool) -> Result<()> {
    for k in 0..t.modes() {
        write_csv_file(&dir.join(mode_name(k, "csv")), header, t.rows(), t.mode(k))?;
    }
    if images {
        for (k, img) in imf_tensor_to_images(t).iter().enumerate() {
            write_pgm_file(&dir.join(mode_name(k, "pgm")), &GrayImage::from_image_rescaled(img))?;
        }
    }
    Ok(())
}

fn cmd_synth(kind: &SynthKind) -> Result<()> {
    match kind {
        SynthKind::Signals { samples, fs, out } => {
            let x = multivariate_sinusoids(&PickupMask::default(), *samples, *fs)?;
            fs::create_dir_all(out)?;
            let header: Vec<String> = VARIATE_NAMES.iter().map(|s| (*s).to_owned()).collect();
            let path = out.join("signals.csv");
            write_csv_file(&path, &header, x.rows(), x.as_slice())?;
            println!("wrote {} ({}x{})", path.display(), x.rows(), x.channels());
        }
        SynthKind::Ati { size, out } => {
            if *size < 4 {
                return Err(Error::TooShort { len: *size, min: 4 }.into());
            }
            let (ati, atcs) = make_ati(&AtiSpec {
                size: *size,
                ..AtiSpec::default()
            });
            fs::create_dir_all(out)?;
            write_pgm_file(&out.join("ati.pgm"), &GrayImage::from_image_rescaled(&ati))?;
            for (i, atc) in atcs.iter().enumerate() {
                write_pgm_file(
                    &out.join(format!("atc{}.pgm", i + 1)),
                    &GrayImage::from_image_rescaled(atc),
                )?;
            }
            let x = image_to_multisignal(&ati)?;
            write_csv_file(
                &out.join("ati.csv"),
                &default_header(x.channels()),
                x.rows(),
                x.as_slice(),
            )?;
            println!(
                "wrote ati.pgm, ati.csv and {} components to {}",
                atcs.len(),
                out.display()
            );
        }
        SynthKind::Speckle {
            input,
            snr_db: target,
            seed,
            out,
        } => {
            let clean = read_pgm_file(input)?.to_image();
            let noisy = add_speckle(
                &clean,
                &SpeckleSpec {
                    snr_db: *target,
                    seed: *seed,
                },
            )?;
            let gray = GrayImage::from_image_clamped(&noisy.image);
            write_pgm_file(out, &gray)?;
            let raw = image_to_multisignal(&noisy.image)?;
            write_csv_file(
                &out.with_extension("csv"),
                &default_header(raw.channels()),
                raw.rows(),
                raw.as_slice(),
            )?;
            let diff: Vec<f64> = gray
                .to_image()
                .data
                .iter()
                .zip(&clean.data)
                .map(|(a, b)| a - b)
                .collect();
            println!(
                "wrote {} and {}: target {target} dB, realized {} dB (csv), {} dB after 8-bit clamping (pgm)",
                out.display(),
                out.with_extension("csv").display(),
                fmt_db(snr_db(&clean.data, &noisy.noise.data)),
                fmt_db(snr_db(&clean.data, &diff))
            );
        }
    }
    Ok(())
}

fn fmt_db(v: serial_emd::Result<f64>) -> String {
    match v {
        Ok(db) => format!("{db:.3}"),
        Err(Error::SnrUndefined(_)) => "inf".to_owned(),
        Err(e) => format!("undefined ({e})"),
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let scenarios = if args.scenario.is_empty() {
        vec![
            Scenario::MultivariateDSweep,
            Scenario::MultivariateAlgos,
            Scenario::AtiAlgos,
        ]
    } else {
        args.scenario
            .iter()
            .map(|s| s.parse::<Scenario>())
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut opts = BenchOptions {
        reps: args.reps,
        ensemble: EnsembleConfig {
            nstd: args.nstd,
            nr: args.nr,
            base_seed: args.seed,
        },
        dataset: args.dataset.clone(),
        ..BenchOptions::default()
    };
    if !args.algo.is_empty() {
        opts.algorithms = args.algo.clone();
    }
    if !args.d.is_empty() {
        opts.d_grid = args.d.clone();
    }
    if args.nr != EnsembleConfig::default().nr {
        opts.notes.push(format!("ensemble size nr = {}", args.nr));
    }
    let report = bench_suite(&scenarios, &opts)?;
    let (json_path, csv_path) = write_report(&report, &args.out)?;
    println!(
        "{:<22} {:<18} {:>5} {:>11} {:>11} {:>11}",
        "scenario", "algorithm", "D", "q1 ms", "median ms", "q3 ms"
    );
    for row in &report.summaries {
        println!(
            "{:<22} {:<18} {:>5} {:>11.3} {:>11.3} {:>11.3}",
            row.scenario, row.algorithm, row.d, row.q1_ms, row.median_ms, row.q3_ms
        );
    }
    for s in &report.speedups {
        println!(
            "{} {}: slicewise/serial = {:.3}",
            s.scenario, s.algorithm, s.slicewise_over_serial
        );
    }
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}

fn cmd_recognize(args: &RecognizeArgs) -> Result<()> {
    let dir = args.dataset.clone().ok_or_else(|| {
        Error::DatasetNotFound(PathBuf::from("<pass --dataset or set SERIAL_EMD_DATASET>"))
    })?;
    let ds = FaceDataset::load(&dir)?;
    let cfg = RecognitionConfig {
        algorithm: args.params.algo,
        d: args.d,
        snr_db: args.snr_db,
        seed: args.params.seed,
        sift: args.params.sift(),
        ensemble: args.params.ensemble(),
        k: args.k,
        folds: args.folds,
    };
    let data = decompose_dataset(&ds, &cfg)?;
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
    }
    if args.sweep {
        let heat = heatmap_sweep(&data, cfg.k, cfg.folds, cfg.seed)?;
        let csv = heat.to_csv();
        print!("{csv}");
        if let Some((best, acc)) = heat.argmax() {
            println!("best range {}:{} accuracy {:.2}%", best.hi, best.lo, acc * 100.0);
        }
        if let Some(out) = &args.out {
            fs::write(out.join("heatmap.csv"), csv)?;
        }
        return Ok(());
    }
    let cv = evaluate_range(&data, args.range, cfg.k, cfg.folds, cfg.seed)?;
    println!(
        "{} range {}:{} accuracy {:.2}% (std {:.2})",
        cfg.algorithm,
        args.range.hi,
        args.range.lo,
        cv.mean * 100.0,
        cv.std * 100.0
    );
    if let Some(out) = &args.out {
        let report = json!({
            "algorithm": cfg.algorithm,
            "range": args.range,
            "k": cfg.k,
            "folds": cfg.folds,
            "D": cfg.d,
            "snr_db": cfg.snr_db,
            "seed": cfg.seed,
            "mean": cv.mean,
            "std": cv.std,
            "fold_accuracies": cv.fold_accuracies,
        });
        fs::write(
            out.join("recognition.json"),
            serde_json::to_string_pretty(&report)? + "\n",
        )?;
    }
    Ok(())
}
