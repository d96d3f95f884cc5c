use num_complex::Complex64;

use super::{anti, apply_pow, check_chain, complement_of, ell, single_cluster, solve_affine, ChainBasis};
use crate::atlas::{CanonicalBlock, Family};
use crate::error::{PairError, Result};
use crate::linalg::{conj, cx, hermitian_diagonalize, matrix_power, norm, CMatrix, CVector};
use crate::pair::SelfAdjointPair;
use crate::spectral::SubspaceBasis;
use crate::tolerance::ToleranceConfig;

/// `N = A² − λ²` on the local space.
pub(crate) fn shifted_square(c: &CMatrix, lambda_sq: Complex64) -> CMatrix {
    let r = c.nrows();
    c * conj(c) - CMatrix::identity(r, r) * lambda_sq
}

/// Columns `f_j = N^{k−j} x` followed by `g_j = A f_j`.
pub(crate) fn paired_basis(c: &CMatrix, n: &CMatrix, x: &CVector, k: usize) -> CMatrix {
    let r = c.nrows();
    let mut e = CMatrix::zeros(r, 2 * k);
    let mut cur = x.clone();
    for j in (0..k).rev() {
        e.set_column(j, &cur);
        e.set_column(k + j, &anti(c, &cur));
        cur = n * cur;
    }
    e
}

/// Chain for one negative block of size `k` (width `2k`).
pub(crate) fn negative_chain(
    h: &CMatrix,
    c: &CMatrix,
    lambda_sq: Complex64,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<ChainBasis> {
    let r = h.nrows();
    let n = shifted_square(c, lambda_sq);
    let kmat = matrix_power(&n, k - 1);
    let hk = h * &kmat;
    let loose = ToleranceConfig { verify_tol: f64::INFINITY, ..*tol };
    let (u, d) = hermitian_diagonalize(&((&hk + hk.adjoint()) * cx(0.5, 0.0)), &loose)?;
    // q(x) = ℓ(A K x, x); the target isotropic vector has |q| as large as possible
    let q = |x: &CVector| ell(h, &anti(c, &(&kmat * x)), x);
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| d[b].abs().total_cmp(&d[a].abs()));
    let mut best: Option<(f64, CVector)> = None;
    for &idx in order.iter().take(2) {
        let u0: CVector = u.column(idx).into_owned();
        let v = crate::linalg::columns(&[u0.clone(), anti(c, &u0)], r);
        let g2 = v.adjoint() * &hk * &v;
        let g2 = (&g2 + g2.adjoint()) * cx(0.5, 0.0);
        let Ok((qm, dd)) = hermitian_diagonalize(&g2, &loose) else { continue };
        if !(dd[0] > 0.0 && dd[1] < 0.0) {
            continue;
        }
        let a = v.clone() * qm.column(0) * cx(dd[0].powf(-0.5), 0.0);
        let b = v * qm.column(1) * cx((-dd[1]).powf(-0.5), 0.0);
        for s in 0..64 {
            let phi = std::f64::consts::TAU * s as f64 / 64.0;
            let x = &a + &b * Complex64::from_polar(1.0, phi);
            let val = q(&x).norm();
            if best.as_ref().map_or(true, |(bv, _)| val > *bv) {
                best = Some((val, x));
            }
        }
    }
    let (qabs, x) = best.ok_or_else(|| PairError::Numerical("no isotropic seed for the negative block".into()))?;
    if qabs <= tol.rank_tol * norm(&hk) * norm(c).max(1.0) {
        return Err(PairError::Numerical("negative seed pairs trivially with its image".into()));
    }
    // ℓ(A K αx, αx) = ᾱ² q
    let x0 = &x * q(&x).sqrt().inv().conj();
    let ax0 = anti(c, &x0);

    let mut x = x0.clone();
    for m in 1..k {
        let p = k - 1 - m;
        let d1 = apply_pow(&n, &x0, m);
        let d2 = apply_pow(&n, &ax0, m);
        let base = x.clone();
        let f = |v: &[f64]| -> Vec<f64> {
            let y = &base + &d1 * Complex64::new(v[0], v[1]) + &d2 * Complex64::new(v[2], v[3]);
            let npy = apply_pow(&n, &y, p);
            let s = ell(h, &npy, &y);
            let t = ell(h, &anti(c, &npy), &y);
            vec![s.re, s.im, t.re, t.im]
        };
        let a = solve_affine(f, 4)?;
        x = &base + &d1 * Complex64::new(a[0], a[1]) + &d2 * Complex64::new(a[2], a[3]);
    }
    let e = paired_basis(c, &n, &x, k);
    let block = CanonicalBlock::new(cx(lambda_sq.re, 0.0), k, 1)?;
    check_chain(h, c, &e, &block, tol, "negative")?;
    Ok(ChainBasis { vectors: e, block })
}

/// Peel the largest negative block off a pair whose `A²` has the single eigenvalue `λ² < 0`.
pub fn normalize_negative(p: &SelfAdjointPair, tol: &ToleranceConfig) -> Result<(ChainBasis, SubspaceBasis)> {
    let cl = single_cluster(p, Family::Negative, tol)?;
    let k = cl.block_sizes[0].0;
    let chain = negative_chain(p.h(), p.c(), cl.lambda_sq, k, tol)?;
    let comp = complement_of(p, &chain)?;
    Ok((chain, comp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::build_pair_block;
    use crate::linalg::from_rows;
    use crate::pair::{apply_basis_change, validate_pair};

    #[test]
    fn sip_with_rotation() {
        let t = ToleranceConfig::default();
        // C = [[0, −1], [1, 0]] squares to −I
        let h = crate::atlas::sip(2);
        let c = from_rows(&[vec![cx(0.0, 0.0), cx(-1.0, 0.0)], vec![cx(1.0, 0.0), cx(0.0, 0.0)]]);
        let p = validate_pair(&h, &c, &t).unwrap();
        let (chain, comp) = normalize_negative(&p, &t).unwrap();
        assert_eq!(chain.block.k, 1);
        assert!((chain.block.lambda_sq - cx(-1.0, 0.0)).norm() < 1e-10);
        assert_eq!(comp.dim(), 0);
    }

    #[test]
    fn conjugated_blocks() {
        let t = ToleranceConfig::default();
        for k in 1..=3 {
            let b = CanonicalBlock::new(cx(-2.0, 0.0), k, 1).unwrap();
            let (h0, c0) = build_pair_block(&b).unwrap();
            let n = 2 * k;
            let m = CMatrix::from_fn(n, n, |i, j| {
                let base = if i == j { 1.5 } else { 0.0 };
                cx(base + 0.1 * ((i * 7 + j * 3) % 5) as f64 - 0.2, 0.05 * ((i + 2 * j) % 3) as f64)
            });
            let p0 = validate_pair(&h0, &c0, &t).unwrap();
            let p = apply_basis_change(&p0, &m, &t).unwrap();
            let (chain, _) = normalize_negative(&p, &t).unwrap();
            assert_eq!(chain.block.k, k);
        }
    }

    #[test]
    fn random_conjugate_k2() {
        let t = ToleranceConfig::default();
        let b = CanonicalBlock::new(cx(-4.0, 0.0), 2, 1).unwrap();
        let (h0, c0) = build_pair_block(&b).unwrap();
        let m = CMatrix::from_fn(4, 4, |i, j| {
            let base = if i == j { 2.0 } else { 0.0 };
            cx(base + 0.3 * ((3 * i + j) % 4) as f64 - 0.4, 0.2 * ((i + 3 * j) % 5) as f64 - 0.3)
        });
        let p = apply_basis_change(&validate_pair(&h0, &c0, &t).unwrap(), &m, &t).unwrap();
        let (chain, comp) = normalize_negative(&p, &t).unwrap();
        assert_eq!(chain.block.k, 2);
        assert_eq!(comp.dim(), 0);
        assert_eq!(chain.block.family, Family::Negative);
        assert!((chain.block.lambda - cx(0.0, 2.0)).norm() < 1e-9);
        assert_eq!(chain.block.epsilon, 1);
    }
}
