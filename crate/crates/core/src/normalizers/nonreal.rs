use num_complex::Complex64;

use super::negative::{paired_basis, shifted_square};
use super::{anti, apply_pow, check_chain, complement_of, ell, single_cluster, solve_affine, ChainBasis};
use crate::atlas::{CanonicalBlock, Family};
use crate::error::{PairError, Result};
use crate::linalg::{conj, cx, kernel_with_dim, matrix_power, norm, takagi, CMatrix, CVector};
use crate::pair::SelfAdjointPair;
use crate::spectral::SubspaceBasis;
use crate::tolerance::ToleranceConfig;

/// Chain for one nonreal block; `lambda_sq` is the member with `Im > 0`.
pub(crate) fn nonreal_chain(
    h: &CMatrix,
    c: &CMatrix,
    lambda_sq: Complex64,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<ChainBasis> {
    let r = h.nrows();
    if r % 2 != 0 {
        return Err(PairError::Numerical("nonreal cluster space has odd dimension".into()));
    }
    let ls = if lambda_sq.im < 0.0 { lambda_sq.conj() } else { lambda_sq };
    let n = shifted_square(c, ls);
    let kmat = matrix_power(&n, k - 1);
    let (z, _) = kernel_with_dim(&matrix_power(&n, k), r / 2)?;
    // q(x) = ℓ(A K x, x) = x* H C conj(K x), a symmetric form in conj(x)
    let q = |x: &CVector| ell(h, &anti(c, &(&kmat * x)), x);
    let s = z.adjoint() * h * c * conj(&kmat) * conj(&z);
    let s = (&s + s.transpose()) * cx(0.5, 0.0);
    let loose = ToleranceConfig { verify_tol: f64::INFINITY, ..*tol };
    let (u, _) = takagi(&s, &loose)?;
    let u1: CVector = u.column(0).into_owned();
    let x = [&z * &u1, &z * u1.map(|w| w.conj())]
        .into_iter()
        .max_by(|a, b| q(a).norm().total_cmp(&q(b).norm()))
        .expect("nonempty");
    let q0 = q(&x);
    if q0.norm() <= tol.rank_tol * norm(h) * norm(&kmat).max(1.0) * norm(c).max(1.0) {
        return Err(PairError::Numerical("nonreal seed pairs trivially with its image".into()));
    }
    let x0 = &x * q0.sqrt().inv().conj();

    let mut x = x0.clone();
    for m in 1..k {
        let p = k - 1 - m;
        let d1 = apply_pow(&n, &x0, m);
        let base = x.clone();
        let f = |v: &[f64]| -> Vec<f64> {
            let y = &base + &d1 * Complex64::new(v[0], v[1]);
            let t = ell(h, &anti(c, &apply_pow(&n, &y, p)), &y);
            vec![t.re, t.im]
        };
        let a = solve_affine(f, 2)?;
        x = &base + &d1 * Complex64::new(a[0], a[1]);
    }
    let e = paired_basis(c, &n, &x, k);
    let block = CanonicalBlock::new(ls, k, 1)?;
    check_chain(h, c, &e, &block, tol, "nonreal")?;
    Ok(ChainBasis { vectors: e, block })
}

/// Peel the largest nonreal block off a pair whose `A²` has spectrum `{λ², conj λ²}`.
pub fn normalize_nonreal(p: &SelfAdjointPair, tol: &ToleranceConfig) -> Result<(ChainBasis, SubspaceBasis)> {
    let cl = single_cluster(p, Family::Nonreal, tol)?;
    let k = cl.block_sizes[0].0;
    let chain = nonreal_chain(p.h(), p.c(), cl.lambda_sq, k, tol)?;
    let comp = complement_of(p, &chain)?;
    Ok((chain, comp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::build_pair_block;
    use crate::pair::{apply_basis_change, validate_pair};

    #[test]
    fn atlas_block_is_fixed() {
        let t = ToleranceConfig::default();
        let b = CanonicalBlock::new(cx(0.0, 1.0), 1, 1).unwrap();
        let (h, c) = build_pair_block(&b).unwrap();
        let p = validate_pair(&h, &c, &t).unwrap();
        let (chain, comp) = normalize_nonreal(&p, &t).unwrap();
        assert_eq!(chain.block.k, 1);
        assert!((chain.block.lambda_sq - cx(0.0, 1.0)).norm() < 1e-10);
        assert_eq!(comp.dim(), 0);
    }

    #[test]
    fn conjugated_blocks() {
        let t = ToleranceConfig::default();
        for k in 1..=3 {
            let b = CanonicalBlock::new(cx(1.0, -2.0), k, 1).unwrap();
            let (h0, c0) = build_pair_block(&b).unwrap();
            let n = 2 * k;
            let m = CMatrix::from_fn(n, n, |i, j| {
                let base = if i == j { 1.2 } else { 0.0 };
                cx(base + 0.1 * ((i * 5 + j * 3) % 7) as f64 - 0.3, 0.07 * ((2 * i + j) % 4) as f64)
            });
            let p0 = validate_pair(&h0, &c0, &t).unwrap();
            let p = apply_basis_change(&p0, &m, &t).unwrap();
            let (chain, _) = normalize_nonreal(&p, &t).unwrap();
            assert_eq!(chain.block.k, k);
            assert!(chain.block.lambda_sq.im > 0.0);
        }
    }

    #[test]
    fn random_conjugate_k2() {
        let t = ToleranceConfig::default();
        let b = CanonicalBlock::new(cx(1.0, 1.0), 2, 1).unwrap();
        let (h0, c0) = build_pair_block(&b).unwrap();
        let m = CMatrix::from_fn(4, 4, |i, j| {
            let base = if i == j { 2.0 } else { 0.0 };
            cx(base + 0.3 * ((3 * i + j) % 4) as f64 - 0.4, 0.2 * ((i + 3 * j) % 5) as f64 - 0.3)
        });
        let p = apply_basis_change(&validate_pair(&h0, &c0, &t).unwrap(), &m, &t).unwrap();
        let (chain, comp) = normalize_nonreal(&p, &t).unwrap();
        assert_eq!(chain.block.k, 2);
        assert_eq!(comp.dim(), 0);
        assert_eq!(chain.block.family, Family::Nonreal);
        assert!((chain.block.lambda_sq - cx(1.0, 1.0)).norm() < 1e-9);
    }
}
