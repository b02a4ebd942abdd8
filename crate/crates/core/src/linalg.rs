//! Dense linear-algebra kernels shared by the estimators: truncated SVD,
//! best rank-r approximation, Moore-Penrose pseudo-inverse and a spectral
//! map for symmetric matrices.

use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::Matrix;

/// Default relative cutoff for [`pseudo_inverse`].
pub const DEFAULT_PINV_REL_TOL: f64 = 1e-10;

/// Thin singular value decomposition `m ≈ u · diag(d) · vᵀ`.
///
/// Singular values are sorted nonincreasing and each pair of singular
/// vectors is sign-normalized so that the largest-magnitude entry of the
/// left vector is positive.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub u: Matrix,
    pub d: DVector<f64>,
    pub v: Matrix,
}

impl SvdTriple {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    /// Keeps the leading `r` components.
    pub fn truncate(&self, r: usize) -> SvdTriple {
        let r = r.min(self.d.len());
        SvdTriple {
            u: self.u.columns(0, r).into_owned(),
            d: self.d.rows(0, r).into_owned(),
            v: self.v.columns(0, r).into_owned(),
        }
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut ud = self.u.clone();
        for (k, mut col) in ud.column_iter_mut().enumerate() {
            col *= self.d[k];
        }
        ud * self.v.transpose()
    }
}

fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{what}: matrix has non-finite entries")))
    }
}

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full thin SVD with all `min(rows, cols)` components.
pub fn full_svd(m: &Matrix) -> Result<SvdTriple> {
    ensure_finite(m, "svd")?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(SvdTriple {
            u: Matrix::zeros(rows, 0),
            d: DVector::zeros(0),
            v: Matrix::zeros(cols, 0),
        });
    }
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|_| Error::UndefinedValue("svd did not converge".into()))?;
    let (u, v) = (from_faer(svd.U()), from_faer(svd.V()));
    let s = svd.S().column_vector();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));

    let mut out_u = Matrix::zeros(rows, k);
    let mut out_v = Matrix::zeros(cols, k);
    let mut out_d = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut uc = u.column(src).into_owned();
        let mut vc = v.column(src).into_owned();
        let pivot = uc.iamax();
        if uc[pivot] < 0.0 {
            uc.neg_mut();
            vc.neg_mut();
        }
        out_u.set_column(dst, &uc);
        out_v.set_column(dst, &vc);
        out_d[dst] = s[src].max(0.0);
    }
    Ok(SvdTriple {
        u: out_u,
        d: out_d,
        v: out_v,
    })
}

/// Eigenpairs of a symmetric matrix; eigenvalues ascending, eigenvectors
/// in the matching columns.
pub(crate) fn symmetric_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    ensure_finite(m, "eigendecomposition")?;
    if m.nrows() == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }
    let eig = to_faer(&symmetrize(m))
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::UndefinedValue("eigendecomposition did not converge".into()))?;
    let s = eig.S().column_vector();
    let values = (0..s.nrows()).map(|i| s[i]).collect();
    Ok((values, from_faer(eig.U())))
}

/// Leading `r` singular triples of `m`.
pub fn truncated_svd(m: &Matrix, r: usize) -> Result<SvdTriple> {
    let k = m.nrows().min(m.ncols());
    if r == 0 || r > k {
        return Err(invalid(format!("rank {r} outside 1..={k}")));
    }
    Ok(full_svd(m)?.truncate(r))
}

/// Frobenius-optimal rank-`r` approximation of `m`.
pub fn best_rank_r(m: &Matrix, r: usize) -> Result<Matrix> {
    Ok(truncated_svd(m, r)?.reconstruct())
}

/// Moore-Penrose pseudo-inverse. Singular values below `rel_tol · σ_max`
/// are treated as zero.
pub fn pseudo_inverse(m: &Matrix, rel_tol: f64) -> Result<Matrix> {
    if !(rel_tol > 0.0) {
        return Err(invalid("pseudo-inverse tolerance must be positive"));
    }
    let svd = full_svd(m)?;
    Ok(pinv_from_svd(&svd, rel_tol, m.nrows(), m.ncols()))
}

pub(crate) fn pinv_from_svd(svd: &SvdTriple, rel_tol: f64, rows: usize, cols: usize) -> Matrix {
    let smax = svd.d.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_tol * smax;
    let kept: Vec<usize> = (0..svd.d.len())
        .filter(|&k| smax > 0.0 && svd.d[k] > cutoff)
        .collect();
    if kept.is_empty() {
        return Matrix::zeros(cols, rows);
    }
    let mut vs = Matrix::zeros(cols, kept.len());
    let mut u = Matrix::zeros(rows, kept.len());
    for (j, &k) in kept.iter().enumerate() {
        vs.set_column(j, &(svd.v.column(k) / svd.d[k]));
        u.set_column(j, &svd.u.column(k));
    }
    vs * u.transpose()
}

/// Applies `f` to the eigenvalues of a symmetric matrix and reassembles
/// `Q · diag(f(λ)) · Qᵀ`. The input is symmetrized first.
pub fn symmetric_spectral_map(m: &Matrix, f: impl Fn(f64) -> f64) -> Result<Matrix> {
    let (values, vectors) = symmetric_eigen(m)?;
    let n = m.nrows();
    let kept: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .map(|(k, &l)| (k, f(l)))
        .filter(|&(_, fl)| fl != 0.0)
        .collect();
    let mut scaled = Matrix::zeros(n, kept.len());
    let mut q = Matrix::zeros(n, kept.len());
    for (j, &(k, fl)) in kept.iter().enumerate() {
        scaled.set_column(j, &(vectors.column(k) * fl));
        q.set_column(j, &vectors.column(k));
    }
    Ok(symmetrize(&(scaled * q.transpose())))
}

/// Eigenvalues of a symmetric matrix, sorted by decreasing magnitude.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let (mut out, _) = symmetric_eigen(m)?;
    out.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    Ok(out)
}

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numeric_rank(m: &Matrix, rel_tol: f64) -> Result<usize> {
    let svd = full_svd(m)?;
    let smax = svd.d.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(svd.d.iter().filter(|&&s| s > rel_tol * smax).count())
}

/// Largest singular value, by power iteration on `mᵀm`.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    // Small matrices: exact.
    if rows.min(cols) <= 400 {
        return match full_svd(m) {
            Ok(s) if s.rank() > 0 => s.d[0],
            _ => 0.0,
        };
    }
    let mut x = DVector::from_element(cols, 1.0 / (cols as f64).sqrt());
    let mut prev = 0.0;
    for _ in 0..10_000 {
        let y = m * &x;
        let z = m.transpose() * &y;
        let norm = z.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let est = y.norm_squared();
        x = z / norm;
        if (est - prev).abs() <= 1e-13 * est {
            return est.sqrt();
        }
        prev = est;
    }
    prev.sqrt()
}
