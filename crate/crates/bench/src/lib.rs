//! Shared inputs for the criterion benches.

use serial_emd::synth::{make_ati, multivariate_sinusoids, AtiSpec, PickupMask};
use serial_emd::{image_to_multisignal, EnsembleConfig, MultiSignal};

/// Six-variate multi-tone dataset, 1000 samples at 1 kHz.
pub fn pickup_signals() -> MultiSignal {
    multivariate_sinusoids(&PickupMask::default(), 1000, 1000.0).expect("valid synth parameters")
}

/// 101x101 texture image with image columns as channels.
pub fn ati_signals() -> MultiSignal {
    let (ati, _) = make_ati(&AtiSpec::default());
    image_to_multisignal(&ati).expect("non-empty image")
}

/// Small ensemble so that EEMD and CEEMDAN benches finish in seconds.
pub fn bench_ensemble() -> EnsembleConfig {
    EnsembleConfig {
        nr: 10,
        ..EnsembleConfig::default()
    }
}
