use super::{cx, norm, require_square, CMatrix};
use crate::error::{PairError, Result};
use crate::tolerance::ToleranceConfig;

const MAX_SWEEPS: usize = 80;

/// Cyclic complex Jacobi. Returns `(u, d)` with `h = u diag(d) u*` and `d`
/// descending. Real symmetric input gives a real `u`.
pub fn hermitian_diagonalize(h: &CMatrix, tol: &ToleranceConfig) -> Result<(CMatrix, Vec<f64>)> {
    let n = require_square(h)?;
    let scale = norm(h);
    let herm = norm(&(h - h.adjoint()));
    if herm > tol.verify_tol * scale {
        return Err(PairError::NotHermitian { residual: herm / scale });
    }
    let mut a = (h + h.adjoint()) * cx(0.5, 0.0);
    let mut u = CMatrix::identity(n, n);
    let mut done = n < 2;
    for _ in 0..MAX_SWEEPS {
        if done {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale || off == 0.0 {
            done = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if g <= 1e-3 * f64::EPSILON * scale {
                    a[(p, q)] = cx(0.0, 0.0);
                    a[(q, p)] = cx(0.0, 0.0);
                    continue;
                }
                let e = apq / g;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let ec = e.conj();
                // columns: W = [[c, s], [-s ē, c ē]]
                for i in 0..n {
                    let xp = a[(i, p)];
                    let xq = a[(i, q)];
                    a[(i, p)] = xp * c - xq * ec * s;
                    a[(i, q)] = xp * s + xq * ec * c;
                }
                for j in 0..n {
                    let xp = a[(p, j)];
                    let xq = a[(q, j)];
                    a[(p, j)] = xp * c - xq * e * s;
                    a[(q, j)] = xp * s + xq * e * c;
                }
                a[(p, q)] = cx(0.0, 0.0);
                a[(q, p)] = cx(0.0, 0.0);
                a[(p, p)] = cx(a[(p, p)].re, 0.0);
                a[(q, q)] = cx(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let xp = u[(i, p)];
                    let xq = u[(i, q)];
                    u[(i, p)] = xp * c - xq * ec * s;
                    u[(i, q)] = xp * s + xq * ec * c;
                }
            }
        }
    }
    if !done {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off > 1e3 * f64::EPSILON * scale {
            return Err(PairError::NoConvergence("Hermitian Jacobi sweep budget exhausted".into()));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let d: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut us = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        us.set_column(k, &u.column(i));
    }
    Ok((us, d))
}

/// Counts of positive and negative eigenvalues of a nondegenerate Hermitian matrix.
pub fn signature(h: &CMatrix, tol: &ToleranceConfig) -> Result<(usize, usize)> {
    let (_, d) = hermitian_diagonalize(h, tol)?;
    let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dmin = d.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    if d.is_empty() {
        return Ok((0, 0));
    }
    if dmax == 0.0 || dmin <= tol.rank_tol * dmax {
        let r = if dmax == 0.0 { 0.0 } else { dmin / dmax };
        return Err(PairError::Degenerate { residual: r });
    }
    let pos = d.iter().filter(|&&x| x > 0.0).count();
    Ok((pos, d.len() - pos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, from_rows};

    fn recon(u: &CMatrix, d: &[f64]) -> CMatrix {
        let n = d.len();
        let dm = CMatrix::from_fn(n, n, |i, j| if i == j { cx(d[i], 0.0) } else { cx(0.0, 0.0) });
        u * dm * u.adjoint()
    }

    #[test]
    fn diag_is_fixed() {
        let t = ToleranceConfig::default();
        let h = from_real_rows(&[&[3.0, 0.0], &[0.0, -1.0]]);
        let (u, d) = hermitian_diagonalize(&h, &t).unwrap();
        assert_eq!(d, vec![3.0, -1.0]);
        assert!((u - CMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn flip_eigenvalues() {
        let t = ToleranceConfig::default();
        let s2 = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let (u, d) = hermitian_diagonalize(&s2, &t).unwrap();
        // closed form for [[a,b],[b,a]]: a ± b
        assert!((d[0] - 1.0).abs() < 1e-15 && (d[1] + 1.0).abs() < 1e-15);
        assert!((recon(&u, &d) - s2).norm() < 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let t = ToleranceConfig::default();
        let h = from_rows(&[
            vec![cx(2.0, 0.0), cx(1.0, -1.0), cx(0.0, 0.5)],
            vec![cx(1.0, 1.0), cx(-1.0, 0.0), cx(0.3, 0.0)],
            vec![cx(0.0, -0.5), cx(0.3, 0.0), cx(0.5, 0.0)],
        ]);
        let (u, d) = hermitian_diagonalize(&h, &t).unwrap();
        assert!((recon(&u, &d) - &h).norm() < 1e-13);
        assert!((u.adjoint() * &u - CMatrix::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn zero_and_rejects() {
        let t = ToleranceConfig::default();
        let (_, d) = hermitian_diagonalize(&CMatrix::zeros(3, 3), &t).unwrap();
        assert!(d.iter().all(|&x| x == 0.0));
        let bad = from_rows(&[vec![cx(0.0, 0.0), cx(1.0, 0.0)], vec![cx(0.0, 0.0), cx(0.0, 0.0)]]);
        assert!(matches!(hermitian_diagonalize(&bad, &t), Err(PairError::NotHermitian { .. })));
    }

    #[test]
    fn signature_examples() {
        let t = ToleranceConfig::default();
        let s2 = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(signature(&s2, &t).unwrap(), (1, 1));
        let s3 = from_real_rows(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(signature(&s3, &t).unwrap(), (2, 1));
        let m = CMatrix::identity(4, 4) * cx(-1.0, 0.0);
        assert_eq!(signature(&m, &t).unwrap(), (0, 4));
        let deg = from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(signature(&deg, &t), Err(PairError::Degenerate { .. })));
    }
}
