//! Per-channel ("standard version") decomposition used as the comparator for
//! the serialized approach.

use rayon::prelude::*;

use crate::emd::{Algorithm, EnsembleConfig, SiftConfig};
use crate::error::Result;
use crate::types::{ImfTensor, MultiSignal};

/// Decomposes every channel on its own and aligns the results to a common
/// mode count `K` (the largest per-channel IMF count plus one).
///
/// Channels with fewer IMFs are zero-filled; every channel's residue lands in
/// the last mode. All channels share the same ensemble seeds, so permuting the
/// input channels permutes the output channels identically.
pub fn slicewise_decompose(
    x: &MultiSignal,
    algo: Algorithm,
    cfg: &SiftConfig,
    ens: &EnsembleConfig,
) -> Result<ImfTensor> {
    let decs = (0..x.channels())
        .into_par_iter()
        .map(|c| algo.decompose(x.channel(c), cfg, ens))
        .collect::<Result<Vec<_>>>()?;

    let k = decs.iter().map(|d| d.imfs.len()).max().unwrap_or(0) + 1;
    let mut t = ImfTensor::zeros(x.rows(), x.channels(), k);
    for (c, dec) in decs.iter().enumerate() {
        for (i, imf) in dec.imfs.iter().enumerate() {
            t.channel_mode_mut(c, i).copy_from_slice(imf);
        }
        t.channel_mode_mut(c, k - 1).copy_from_slice(&dec.residue);
    }
    Ok(t)
}
