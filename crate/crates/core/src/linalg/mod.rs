//! Dense complex kernels. Storage and products come from `nalgebra`; the
//! factorizations that need control over real-structure preservation (Jacobi
//! SVD, Hermitian Jacobi, Takagi, complex Schur) are implemented here.

mod eigen;
mod hermitian;
mod svd;
mod takagi;

pub use eigen::{eigenvalues, reorder_schur, schur, Schur};
pub use hermitian::{hermitian_diagonalize, signature};
pub use svd::{kernel_with_dim, orthonormal_complement, rank_and_kernel, range_basis, svd, Svd};
pub use takagi::takagi;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{PairError, Result};
use crate::tolerance::ToleranceConfig;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Build a matrix from rows of `(re, im)` pairs.
pub fn from_rows(rows: &[Vec<Complex64>]) -> CMatrix {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    CMatrix::from_fn(r, c, |i, j| rows[i][j])
}

/// Build a real matrix given row by row.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    CMatrix::from_fn(r, c, |i, j| cx(rows[i][j], 0.0))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

/// Frobenius norm.
pub fn norm(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &CVector) -> CVector {
    v.map(|z| z.conj())
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_real(m: &CMatrix, tol: f64) -> bool {
    m.iter().all(|z| z.im.abs() <= tol)
}

pub fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(PairError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

pub fn require_finite(m: &CMatrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(PairError::NonFinite)
    }
}

/// `‖a − b‖ / max(‖scale‖, tiny)`, with 0/0 read as 0.
pub fn rel_diff(a: &CMatrix, b: &CMatrix, scale: f64) -> f64 {
    let num = norm(&(a - b));
    if num == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        num / scale
    }
}

/// Direct sum of square or rectangular blocks.
pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(r, c);
    let (mut i0, mut j0) = (0, 0);
    for b in blocks {
        out.view_mut((i0, j0), (b.nrows(), b.ncols())).copy_from(b);
        i0 += b.nrows();
        j0 += b.ncols();
    }
    out
}

/// Horizontal concatenation of column blocks with equal row counts.
pub fn hstack(blocks: &[CMatrix]) -> CMatrix {
    let r = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(r, c);
    let mut j0 = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), r);
        out.view_mut((0, j0), (r, b.ncols())).copy_from(b);
        j0 += b.ncols();
    }
    out
}

pub fn col_matrix(v: &CVector) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

pub fn columns(vs: &[CVector], rows: usize) -> CMatrix {
    let mut out = zeros(rows, vs.len());
    for (j, v) in vs.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// The sesquilinear form `ℓ(v, w) = w* H v`.
#[inline]
pub fn ell(h: &CMatrix, v: &CVector, w: &CVector) -> Complex64 {
    w.dotc(&(h * v))
}

/// Apply the antilinear map `v ↦ C conj(v)`.
#[inline]
pub fn apply_anti(c: &CMatrix, v: &CVector) -> CVector {
    c * conj_vec(v)
}

/// Inverse with a Frobenius condition guard `‖m‖‖m⁻¹‖ ≤ 1/rank_tol`.
pub fn inverse(m: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    let n = require_square(m)?;
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let inv = m.clone().lu().try_inverse().ok_or(PairError::Singular { condition: f64::INFINITY })?;
    if !is_finite(&inv) {
        return Err(PairError::Singular { condition: f64::INFINITY });
    }
    let cond = norm(m) * norm(&inv);
    if cond * tol.rank_tol > 1.0 {
        return Err(PairError::Singular { condition: cond });
    }
    Ok(inv)
}

/// Frobenius condition estimate `‖m‖_F ‖m⁻¹‖_F`, infinite when singular.
pub fn condition_estimate(m: &CMatrix) -> f64 {
    match m.clone().lu().try_inverse() {
        Some(inv) if is_finite(&inv) => norm(m) * norm(&inv),
        _ => f64::INFINITY,
    }
}

/// Solve `m x = b` for square `m`.
pub fn solve(m: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    require_square(m)?;
    let x = m.clone().lu().solve(b).ok_or(PairError::Singular { condition: f64::INFINITY })?;
    if !is_finite(&x) {
        return Err(PairError::Singular { condition: f64::INFINITY });
    }
    Ok(x)
}

/// Integer matrix power by repeated multiplication; `p = 0` gives the identity.
pub fn matrix_power(m: &CMatrix, p: usize) -> CMatrix {
    let mut out = identity(m.nrows());
    for _ in 0..p {
        out = &out * m;
    }
    out
}

/// Realification of the antilinear map `v ↦ C conj(v)` on `(Re v, Im v)`.
pub fn realify_antilinear(c: &CMatrix) -> CMatrix {
    let n = c.nrows();
    let mut out = zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = c[(i, j)];
            out[(i, j)] = cx(z.re, 0.0);
            out[(i, j + n)] = cx(z.im, 0.0);
            out[(i + n, j)] = cx(z.im, 0.0);
            out[(i + n, j + n)] = cx(-z.re, 0.0);
        }
    }
    out
}

/// Realification of a complex-linear map.
pub fn realify_linear(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let k = m.ncols();
    let mut out = zeros(2 * n, 2 * k);
    for i in 0..n {
        for j in 0..k {
            let z = m[(i, j)];
            out[(i, j)] = cx(z.re, 0.0);
            out[(i, j + k)] = cx(-z.im, 0.0);
            out[(i + n, j)] = cx(z.im, 0.0);
            out[(i + n, j + k)] = cx(z.re, 0.0);
        }
    }
    out
}

/// Inverse of realification for stacked `(Re; Im)` columns.
pub fn complexify_columns(r: &CMatrix) -> CMatrix {
    let n = r.nrows() / 2;
    CMatrix::from_fn(n, r.ncols(), |i, j| cx(r[(i, j)].re, r[(i + n, j)].re))
}

/// Real least-norm solution of `a x = b` through the SVD pseudo-inverse.
pub fn real_lstsq(a: &[Vec<f64>], b: &[f64], rcond: f64) -> Result<Vec<f64>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let am = CMatrix::from_fn(rows, cols, |i, j| cx(a[i][j], 0.0));
    let d = svd(&am)?;
    let smax = d.s.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; cols];
    for (k, &sk) in d.s.iter().enumerate() {
        if sk <= rcond * smax || sk == 0.0 {
            continue;
        }
        let uk = d.u.column(k);
        let coef: f64 = (0..rows).map(|i| uk[i].re * b[i]).sum::<f64>() / sk;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += coef * d.v[(j, k)].re;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realify_antilinear_matches_action() {
        let c = from_rows(&[vec![cx(1.0, 2.0), cx(0.5, -1.0)], vec![cx(-0.3, 0.0), cx(2.0, 1.0)]]);
        let v = CVector::from_vec(vec![cx(0.7, -0.2), cx(-1.1, 0.4)]);
        let w = apply_anti(&c, &v);
        let r = realify_antilinear(&c);
        let vr = CMatrix::from_column_slice(4, 1, &[cx(0.7, 0.0), cx(-1.1, 0.0), cx(-0.2, 0.0), cx(0.4, 0.0)]);
        let wr = complexify_columns(&(&r * vr));
        assert!((wr.column(0) - &w).norm() < 1e-14);
    }

    #[test]
    fn block_diag_and_hstack_shapes() {
        let a = identity(2);
        let b = identity(3) * cx(2.0, 0.0);
        let d = block_diag(&[a.clone(), b.clone()]);
        assert_eq!(d.shape(), (5, 5));
        assert_eq!(d[(3, 3)], cx(2.0, 0.0));
        assert_eq!(d[(0, 3)], ZERO);
        let h = hstack(&[a, zeros(2, 1)]);
        assert_eq!(h.shape(), (2, 3));
    }

    #[test]
    fn inverse_rejects_singular() {
        let t = ToleranceConfig::default();
        let m = from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(inverse(&m, &t).is_err());
        let m = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let inv = inverse(&m, &t).unwrap();
        assert!((&m * inv - identity(2)).norm() < 1e-14);
    }

    #[test]
    fn lstsq_min_norm() {
        // One equation, two unknowns: x + y = 2 -> (1, 1).
        let x = real_lstsq(&[vec![1.0, 1.0]], &[2.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
