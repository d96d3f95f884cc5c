use num_complex::Complex64;

use super::{cx, CMatrix};
use crate::error::{PairError, Result};
use crate::tolerance::ToleranceConfig;

/// `a = u · diag(s) · v*` with `v` square unitary and `s` descending.
///
/// Columns of `u` belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. Real input stays real throughout, which
/// the real-filtration code relies on.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    let m = a.nrows();
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = CMatrix::identity(n, n);
    let eps = f64::EPSILON;
    // Rotating below this ratio can cycle without progress.
    let thresh = eps * m.max(n) as f64;
    let floor = (eps * a.norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let g = gamma.norm();
                if g <= floor || g <= thresh * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ec = e.conj();
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)] * ec;
                    w[(i, p)] = wp * c - wq * s;
                    w[(i, q)] = wp * s + wq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * ec;
                    v[(i, p)] = vp * c - vq * s;
                    v[(i, q)] = vp * s + vq * c;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(PairError::NoConvergence("Jacobi SVD sweep budget exhausted".into()));
    }
    let mut sig: Vec<(f64, usize)> = (0..n).map(|j| (w.column(j).norm(), j)).collect();
    sig.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)));
    let mut u = CMatrix::zeros(m, n);
    let mut vs = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(sk, j)) in sig.iter().enumerate() {
        s.push(sk);
        vs.set_column(k, &v.column(j));
        if sk > 0.0 {
            u.set_column(k, &(w.column(j) / cx(sk, 0.0)));
        }
    }
    Ok(Svd { u, s, v: vs })
}

/// Numerical rank and an orthonormal kernel basis (as columns).
///
/// A singular value counts iff it exceeds `rank_tol · σ_max`.
pub fn rank_and_kernel(m: &CMatrix, tol: &ToleranceConfig) -> Result<(usize, CMatrix)> {
    let n = m.ncols();
    if n == 0 {
        return Ok((0, CMatrix::zeros(0, 0)));
    }
    let d = svd(m)?;
    let smax = d.s[0];
    let rank = d.s.iter().filter(|&&x| x > tol.rank_tol * smax).count();
    let kernel = d.v.columns(rank, n - rank).into_owned();
    Ok((rank, kernel))
}

/// The `dim` right singular vectors with smallest singular values, plus the
/// largest singular value among them (the kernel residual).
pub fn kernel_with_dim(m: &CMatrix, dim: usize) -> Result<(CMatrix, f64)> {
    let n = m.ncols();
    if dim > n {
        return Err(PairError::DimensionMismatch { expected: n, got: dim });
    }
    if dim == 0 {
        return Ok((CMatrix::zeros(n, 0), 0.0));
    }
    let d = svd(m)?;
    let resid = d.s[n - dim];
    Ok((d.v.columns(n - dim, dim).into_owned(), resid))
}

/// Orthonormal basis of the column span, with singular values above
/// `rel · σ_max` treated as significant.
pub fn range_basis(m: &CMatrix, rel: f64) -> Result<CMatrix> {
    if m.ncols() == 0 {
        return Ok(CMatrix::zeros(m.nrows(), 0));
    }
    let d = svd(m)?;
    let smax = d.s[0];
    let r = d.s.iter().filter(|&&x| x > rel * smax && x > 0.0).count();
    Ok(d.u.columns(0, r).into_owned())
}

/// Orthonormal basis of the orthogonal complement of the column span of `q`
/// (`q` assumed to have orthonormal columns).
pub fn orthonormal_complement(q: &CMatrix) -> Result<CMatrix> {
    let n = q.nrows();
    let k = q.ncols();
    if k == 0 {
        return Ok(CMatrix::identity(n, n));
    }
    let (basis, _) = kernel_with_dim(&q.adjoint(), n - k)?;
    Ok(basis)
}
