use std::path::Path;

use serial_emd::io::{write_pgm_file, GrayImage};
use serial_emd::recognition::{
    decompose_dataset, evaluate_range, heatmap_sweep, FaceDataset, ImfRange, RecognitionConfig,
};
use serial_emd::{EnsembleConfig, Error, Image, SiftConfig};

const SUBJECTS: usize = 4;
const PER_SUBJECT: usize = 4;

/// Subject `s` is a stripe pattern with its own spatial frequency; the images
/// of one subject differ by a small shift.
fn write_dataset(root: &Path) {
    for s in 0..SUBJECTS {
        let dir = root.join(format!("s{}", s + 1));
        std::fs::create_dir_all(&dir).unwrap();
        for n in 0..PER_SUBJECT {
            let f = 2.0 + 3.0 * s as f64;
            let img = Image::from_fn(24, 28, |x, y| {
                let phase = 0.15 * n as f64;
                128.0 + 60.0 * (f * x as f64 / 24.0 * std::f64::consts::TAU + phase).sin()
                    + 30.0 * (y as f64 / 28.0 * std::f64::consts::TAU).cos()
            });
            write_pgm_file(&dir.join(format!("{}.pgm", n + 1)), &GrayImage::from_image_clamped(&img)).unwrap();
        }
    }
    // Files the loader must ignore.
    std::fs::write(root.join("README"), "not a subject").unwrap();
    std::fs::write(root.join("s1").join("notes.txt"), "skip").unwrap();
}

fn config() -> RecognitionConfig {
    RecognitionConfig {
        d: 5,
        snr_db: 10.0,
        folds: PER_SUBJECT,
        sift: SiftConfig::default(),
        ensemble: EnsembleConfig::default(),
        ..RecognitionConfig::default()
    }
}

#[test]
fn loads_layout_in_numeric_order() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let ds = FaceDataset::load(dir.path()).unwrap();
    assert_eq!(ds.len(), SUBJECTS * PER_SUBJECT);
    let expected: Vec<u32> = (0..SUBJECTS * PER_SUBJECT)
        .map(|i| (i / PER_SUBJECT + 1) as u32)
        .collect();
    assert_eq!(ds.labels, expected);
    assert_eq!((ds.images[0].width, ds.images[0].height), (24, 28));
}

#[test]
fn missing_or_empty_dataset_is_not_found() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(FaceDataset::load(dir.path()), Err(Error::DatasetNotFound(_))));
    assert!(matches!(
        FaceDataset::load(&dir.path().join("absent")),
        Err(Error::DatasetNotFound(_))
    ));
}

#[test]
fn end_to_end_sweep_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path());
    let ds = FaceDataset::load(dir.path()).unwrap();
    let cfg = config();
    let data = decompose_dataset(&ds, &cfg).unwrap();
    assert_eq!(data.tensors.len(), ds.len());
    assert!(data.tensors.iter().all(|t| t.modes() == 10));

    let heat = heatmap_sweep(&data, cfg.k, cfg.folds, cfg.seed).unwrap();
    assert_eq!(heat.defined_cells(), 55);
    for r in ImfRange::all() {
        let acc = heat.get(r).unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }
    let diagonal = heat.diagonal();
    for (i, acc) in diagonal.iter().enumerate() {
        let single = evaluate_range(&data, ImfRange::new(i + 1, i + 1).unwrap(), cfg.k, cfg.folds, cfg.seed)
            .unwrap();
        assert_eq!(*acc, single.mean);
    }
    // The full range sums every mode, i.e. the noisy image itself.
    let full = heat.get(ImfRange::new(1, 10).unwrap()).unwrap();
    assert_eq!(full, 1.0);
    assert_eq!(heat.to_csv().lines().count(), 11);

    let again = decompose_dataset(&ds, &cfg).unwrap();
    let rerun = heatmap_sweep(&again, cfg.k, cfg.folds, cfg.seed).unwrap();
    assert_eq!(heat.cells, rerun.cells);
}
