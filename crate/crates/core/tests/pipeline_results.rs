//! Pipeline-level results on the six-variate and texture-image datasets.

use std::f64::consts::PI;

use serial_emd::metrics::{dominant_frequency, pearson, reconstruction_error};
use serial_emd::synth::{make_ati, multivariate_sinusoids, AtiSpec, PickupMask, TONE_FREQS};
use serial_emd::timing::{bench_suite, BenchOptions, Scenario, D_SWEEP};
use serial_emd::{
    concatenate, eemd, emd, image_to_multisignal, imf_tensor_to_images, serial_decompose, Algorithm,
    EnsembleConfig, Image, SiftConfig, TransitionSpec,
};

fn pickup() -> serial_emd::MultiSignal {
    multivariate_sinusoids(&PickupMask::default(), 1000, 1000.0).unwrap()
}

/// Direct O(n^2) DFT magnitude at integer bin `k`.
fn dft_magnitude(s: &[f64], k: usize) -> f64 {
    let n = s.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (t, v) in s.iter().enumerate() {
        let phase = 2.0 * PI * k as f64 * t as f64 / n;
        re += v * phase.cos();
        im -= v * phase.sin();
    }
    re.hypot(im)
}

#[test]
fn all_ones_variate_has_four_spectral_peaks() {
    let x = pickup();
    // U is the variate whose mask column is all ones.
    let u = x.channel(0);
    let mags: Vec<f64> = (0..=500).map(|k| dft_magnitude(u, k)).collect();
    let mut order: Vec<usize> = (1..=500).collect();
    order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    let mut top: Vec<usize> = order[..4].to_vec();
    top.sort_unstable();
    assert_eq!(top, vec![2, 8, 16, 32]);
    // Unit tones over 1000 samples put n/2 into their bin.
    for k in [2, 8, 16, 32] {
        assert!((mags[k] - 500.0).abs() < 1e-6, "{k}: {}", mags[k]);
    }
}

#[test]
fn serialized_pickup_length() {
    let s = concatenate(&pickup(), TransitionSpec::new(50).unwrap()).unwrap();
    assert_eq!(s.samples.len(), 6250);
}

#[test]
fn first_variate_emd_frequencies_descend() {
    let x = pickup();
    let dec = emd(x.channel(0), &SiftConfig::default()).unwrap();
    assert!(dec.imfs.len() >= 3, "{}", dec.imfs.len());
    let freqs: Vec<f64> = dec
        .imfs
        .iter()
        .map(|m| dominant_frequency(m, 1000.0).unwrap())
        .collect();
    assert!(freqs.windows(2).all(|w| w[0] >= w[1]), "{freqs:?}");
    assert_eq!(freqs[0], 32.0);
}

#[test]
fn first_variate_eemd_recovers_all_tones() {
    let x = pickup();
    let dec = eemd(x.channel(0), &SiftConfig::default(), &EnsembleConfig::default()).unwrap();
    let freqs: Vec<f64> = dec
        .imfs
        .iter()
        .map(|m| dominant_frequency(m, 1000.0).unwrap())
        .collect();
    // The added noise occupies the first mode, so 2 Hz lands in the sixth.
    assert!(freqs[0] > TONE_FREQS[0], "{freqs:?}");
    let first = |f: f64| freqs.iter().position(|&g| (g - f).abs() <= 1.0);
    let at: Vec<usize> = TONE_FREQS.iter().map(|&f| first(f).expect("tone present")).collect();
    assert!(at.windows(2).all(|w| w[0] < w[1]), "{freqs:?}");
    assert!(at[..3].iter().all(|&k| k < 5), "{freqs:?}");
}

#[test]
fn serial_modes_follow_mask_rows() {
    let x = pickup();
    let mask = PickupMask::default();
    let t = serial_decompose(
        &x,
        TransitionSpec::new(50).unwrap(),
        Algorithm::Emd,
        &SiftConfig::default(),
        &EnsembleConfig::default(),
    )
    .unwrap();
    assert!(reconstruction_error(&x, &t).unwrap() <= 1e-8);
    for v in 0..6 {
        let freqs: Vec<f64> = (0..t.modes() - 1)
            .map(|k| dominant_frequency(t.channel_mode(v, k), 1000.0).unwrap())
            .collect();
        let highest = (0..4).find(|&i| mask.includes(i, v)).unwrap();
        assert_eq!(freqs[0], TONE_FREQS[highest], "variate {v}: {freqs:?}");
    }
}

/// Image with `sin(2 pi f y / n)` in every column.
fn vertical_half(f: f64, n: usize) -> Image {
    Image::from_fn(n, n, |_, y| (2.0 * PI * f * y as f64 / n as f64).sin())
}

#[test]
fn texture_component_halves_have_correlation_ceiling() {
    // Each component is an equal-power sum of a vertical and a horizontal
    // sinusoid, so either half alone correlates with it at 1/sqrt(2).
    let (_, atcs) = make_ati(&AtiSpec::default());
    for (atc, f) in atcs.iter().zip([20.0, 4.0, 1.0]) {
        let r = pearson(&vertical_half(f, 101).data, &atc.data);
        assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9, "{r}");
    }
}

#[test]
fn texture_image_modes_match_components() {
    let (ati, atcs) = make_ati(&AtiSpec::default());
    let x = image_to_multisignal(&ati).unwrap();
    assert_eq!((x.rows(), x.channels()), (101, 101));
    let ens = EnsembleConfig {
        nr: 20,
        ..EnsembleConfig::default()
    };
    let t = serial_decompose(&x, TransitionSpec::new(20).unwrap(), Algorithm::Eemd, &SiftConfig::default(), &ens)
        .unwrap();
    let modes = imf_tensor_to_images(&t);
    let mut previous = None;
    for (i, f) in [20.0, 4.0, 1.0].into_iter().enumerate() {
        let half = vertical_half(f, 101);
        let (k, r) = modes
            .iter()
            .enumerate()
            .map(|(k, m)| (k, pearson(&m.data, &half.data)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(r >= 0.85, "component {i}: best mode {k} r={r}");
        assert!(previous.is_none_or(|p| k > p), "component {i} in mode {k}");
        assert!(pearson(&modes[k].data, &atcs[i].data) >= 0.6);
        previous = Some(k);
    }
    assert!(pearson(&modes[0].data, &atcs[0].data) > 0.68);
}

#[test]
fn d_sweep_report_has_one_row_per_d_and_algorithm() {
    let opts = BenchOptions {
        reps: 1,
        ensemble: EnsembleConfig {
            nr: 2,
            ..EnsembleConfig::default()
        },
        ..BenchOptions::default()
    };
    let report = bench_suite(&[Scenario::MultivariateDSweep], &opts).unwrap();
    assert_eq!(report.summaries.len(), D_SWEEP.len() * 3);
    for d in D_SWEEP {
        for algo in Algorithm::ALL {
            let row = report
                .row("multivariate-d-sweep", &format!("serial-{}", algo.name()), d)
                .unwrap();
            assert_eq!(row.n, 1);
            assert!(row.median_ms > 0.0);
        }
    }
}

#[test]
fn ati_report_includes_eemd_speedup() {
    let opts = BenchOptions {
        reps: 2,
        ensemble: EnsembleConfig {
            nr: 2,
            ..EnsembleConfig::default()
        },
        algorithms: vec![Algorithm::Eemd],
        ..BenchOptions::default()
    };
    let report = bench_suite(&[Scenario::AtiAlgos], &opts).unwrap();
    let s = report
        .speedups
        .iter()
        .find(|s| s.scenario == "ati-algos" && s.algorithm == "eemd")
        .unwrap();
    let serial = report.row("ati-algos", "serial-eemd", 20).unwrap().median_ms;
    let slices = report.row("ati-algos", "slicewise-eemd", 20).unwrap().median_ms;
    assert_eq!(s.slicewise_over_serial, slices / serial);
}
