use crate::error::{Error, Result};
use crate::linalg::{self, DEFAULT_PINV_REL_TOL};
use crate::netcore::{EgoSample, ScoreMatrix};

/// CUR plug-in `A_inᵀ A_11⁺ A_in`, symmetrized.
pub fn cur_estimate(s: &EgoSample) -> Result<ScoreMatrix> {
    let a11 = s.in_sample_block();
    if a11.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateSample("in-sample block A_11 is zero".into()));
    }
    let pinv = linalg::pseudo_inverse(&a11, DEFAULT_PINV_REL_TOL)?;
    let rows = s.row_block();
    ScoreMatrix::new(rows.transpose() * pinv * rows)
}
