use super::{cx, hermitian_diagonalize, norm, orthonormal_complement, require_square, CMatrix};
use crate::error::{PairError, Result};
use crate::tolerance::ToleranceConfig;

/// Takagi factorization `s = u diag(σ) uᵀ` of a complex symmetric matrix,
/// `σ` descending and nonnegative, `u` unitary. Singular input is fine.
///
/// Works on the real symmetric embedding `[[Re s, Im s], [Im s, −Re s]]`,
/// whose eigenpairs `σ, (x; y)` give `s conj(x + iy) = σ (x + iy)`.
pub fn takagi(s: &CMatrix, tol: &ToleranceConfig) -> Result<(CMatrix, Vec<f64>)> {
    let n = require_square(s)?;
    let scale = norm(s);
    let asym = norm(&(s - s.transpose()));
    if asym > tol.verify_tol * scale {
        return Err(PairError::NotSymmetric { residual: asym / scale });
    }
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), vec![]));
    }
    let sym = (s + s.transpose()) * cx(0.5, 0.0);
    let mut emb = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = sym[(i, j)];
            emb[(i, j)] = cx(z.re, 0.0);
            emb[(i, j + n)] = cx(z.im, 0.0);
            emb[(i + n, j)] = cx(z.im, 0.0);
            emb[(i + n, j + n)] = cx(-z.re, 0.0);
        }
    }
    let (q, d) = hermitian_diagonalize(&emb, tol)?;
    let dmax = d[0].max(0.0);
    let floor = tol.rank_tol * dmax;
    let p = d.iter().take(n).filter(|&&x| x > floor && x > 0.0).count();
    let mut u = CMatrix::zeros(n, n);
    let mut sigma = vec![0.0; n];
    for k in 0..p {
        for i in 0..n {
            u[(i, k)] = cx(q[(i, k)].re, q[(i + n, k)].re);
        }
        sigma[k] = d[k];
    }
    if p < n {
        let top = u.columns(0, p).into_owned();
        let rest = orthonormal_complement(&top)?;
        u.columns_mut(p, n - p).copy_from(&rest);
    }
    Ok((u, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, from_rows};

    fn recon(u: &CMatrix, s: &[f64]) -> CMatrix {
        let n = s.len();
        let d = CMatrix::from_fn(n, n, |i, j| if i == j { cx(s[i], 0.0) } else { cx(0.0, 0.0) });
        u * d * u.transpose()
    }

    #[test]
    fn zero_matrix() {
        let t = ToleranceConfig::default();
        let (u, s) = takagi(&CMatrix::zeros(3, 3), &t).unwrap();
        assert!(s.iter().all(|&x| x == 0.0));
        assert!((u.adjoint() * &u - CMatrix::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn diagonal() {
        let t = ToleranceConfig::default();
        let m = from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let (u, s) = takagi(&m, &t).unwrap();
        assert_eq!(s, vec![2.0, 1.0]);
        assert!((recon(&u, &s) - m).norm() < 1e-14);
    }

    #[test]
    fn flip_has_unit_sigma() {
        let t = ToleranceConfig::default();
        let s2 = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let (u, s) = takagi(&s2, &t).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
        assert!((u.adjoint() * &u - CMatrix::identity(2, 2)).norm() < 1e-13);
        assert!((&u * u.transpose() - s2).norm() < 1e-13);
    }

    #[test]
    fn singular_complex_symmetric() {
        let t = ToleranceConfig::default();
        let v = from_rows(&[vec![cx(1.0, 1.0)], vec![cx(0.5, -2.0)], vec![cx(0.0, 0.3)]]);
        let m = &v * v.transpose();
        let (u, s) = takagi(&m, &t).unwrap();
        assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
        assert!((recon(&u, &s) - &m).norm() < 1e-12 * m.norm());
        assert!((u.adjoint() * &u - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let t = ToleranceConfig::default();
        let m = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(takagi(&m, &t), Err(PairError::NotSymmetric { .. })));
    }
}
