use super::MaskedMatrix;
use crate::error::{invalid, Result};
use crate::linalg;
use crate::netcore::ScoreMatrix;

/// Conventional universal threshold constant (2 + η with η = 0.02).
pub const DEFAULT_USVT_THRESHOLD_MULT: f64 = 2.02;

/// Universal singular value thresholding.
///
/// Unobserved entries are zero-filled, singular values below
/// `threshold_mult · √(N p̂)` are discarded, the reconstruction is divided by
/// the observed fraction `p̂` and clipped to `[0, 1]`. The input is
/// symmetric, so singular values are the absolute eigenvalues.
pub fn usvt_estimate(m: &MaskedMatrix, threshold_mult: f64) -> Result<ScoreMatrix> {
    if m.n_observed() == 0 {
        return Err(invalid("USVT needs at least one observed entry"));
    }
    if !(threshold_mult > 0.0) {
        return Err(invalid("USVT threshold multiplier must be positive"));
    }
    let n = m.n_nodes() as f64;
    let p_hat = m.observed_fraction();
    let threshold = threshold_mult * (n * p_hat).sqrt();
    let kept = linalg::symmetric_spectral_map(m.entries(), |l| {
        if l.abs() >= threshold {
            l / p_hat
        } else {
            0.0
        }
    })?;
    ScoreMatrix::new(kept.map(|x| x.clamp(0.0, 1.0)))
}
