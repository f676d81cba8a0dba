//! Empirical mode decomposition for one-dimensional, multi-variate and
//! two-dimensional data.
//!
//! The crate provides the classical one-dimensional algorithms (EMD, EEMD and
//! CEEMDAN) and a serialization layer that joins the channels of a
//! multi-signal into a single 1D signal through short blended transitions,
//! decomposes that signal once, and slices the resulting modes back into
//! per-channel form.
//!
//! ```
//! use serial_emd::{serial_decompose, Algorithm, EnsembleConfig, MultiSignal, SiftConfig, TransitionSpec};
//!
//! let m = 256;
//! let data: Vec<f64> = (0..2 * m)
//!     .map(|i| (i as f64 * 0.3).sin() + 0.5 * (i as f64 * 0.05).cos())
//!     .collect();
//! let x = MultiSignal::from_columns(m, 2, data).unwrap();
//! let spec = TransitionSpec::auto(m);
//! let modes = serial_decompose(&x, spec, Algorithm::Emd, &SiftConfig::default(), &EnsembleConfig::default()).unwrap();
//! assert_eq!((modes.rows(), modes.channels()), (m, 2));
//! ```

pub mod baseline;
pub mod emd;
mod error;
pub mod io;
pub mod metrics;
pub mod recognition;
pub mod serializer;
pub mod synth;
pub mod timing;
mod types;

pub use baseline::slicewise_decompose;
pub use emd::{
    ceemdan, eemd, emd, envelope, extract_imf, find_extrema, noise_mode, white_noise, Algorithm,
    Decomposition1D, EnsembleConfig, Extrema, SiftConfig,
};
pub use error::{Error, Result};
pub use serializer::{
    concatenate, concatenate_naive, deconcatenate, image_to_multisignal, imf_tensor_to_images,
    serial_decompose, transition_weights, SerializedSignal, TransitionSpec,
};
pub use types::{Image, ImfTensor, MultiSignal};
