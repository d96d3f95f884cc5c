use num_complex::Complex64;

use super::{anti, check_chain, complement_of, ell, single_cluster, solve_affine, ChainBasis};
use crate::atlas::{CanonicalBlock, Family};
use crate::error::{PairError, Result};
use crate::linalg::{cx, hermitian_diagonalize, takagi, CMatrix, CVector};
use crate::pair::{anti_power, SelfAdjointPair};
use crate::spectral::SubspaceBasis;
use crate::tolerance::ToleranceConfig;

/// `A^m v`.
fn anti_pow(c: &CMatrix, v: &CVector, m: usize) -> CVector {
    let mut out = v.clone();
    for _ in 0..m {
        out = anti(c, &out);
    }
    out
}

/// Chain for one zero block of size `k`; `A` must be nilpotent of index `≤ k`
/// on the local space.
pub(crate) fn zero_chain(h: &CMatrix, c: &CMatrix, k: usize, tol: &ToleranceConfig) -> Result<ChainBasis> {
    let r = h.nrows();
    let p = anti_power(c, k - 1);
    // q(x) = ℓ(x, A^{k−1}x) = x* P*H x for odd k, xᵀ P*H x for even k
    let m = p.adjoint() * h;
    let loose = ToleranceConfig { verify_tol: f64::INFINITY, ..*tol };
    let q = |x: &CVector| ell(h, x, &anti_pow(c, x, k - 1));
    let candidates: Vec<CVector> = if k % 2 == 1 {
        let herm = (&m + m.adjoint()) * cx(0.5, 0.0);
        let (u, d) = hermitian_diagonalize(&herm, &loose)?;
        let idx = if d[0].abs() >= d[r - 1].abs() { 0 } else { r - 1 };
        vec![u.column(idx).into_owned()]
    } else {
        let sym = (&m + m.transpose()) * cx(0.5, 0.0);
        let (u, _) = takagi(&sym, &loose)?;
        let u1: CVector = u.column(0).into_owned();
        vec![u1.map(|z| z.conj()), u1]
    };
    let seed = candidates
        .into_iter()
        .max_by(|a, b| q(a).norm().total_cmp(&q(b).norm()))
        .expect("nonempty");
    let q0 = q(&seed);
    let scale = crate::linalg::norm(h) * crate::linalg::norm(&p).max(1.0);
    if q0.norm() <= tol.rank_tol * scale {
        return Err(PairError::Numerical("no vector pairs with its top chain image".into()));
    }
    let (e, eps) = if k % 2 == 1 {
        if q0.im.abs() > tol.verify_tol * q0.norm() {
            log::warn!("odd zero-block seed value is not real: {q0}");
        }
        (&seed * cx(q0.norm().powf(-0.5), 0.0), if q0.re > 0.0 { 1i8 } else { -1 })
    } else {
        // ℓ(αx, A^{k−1}αx) = α² q for odd powers
        (&seed * q0.sqrt().inv(), 1i8)
    };

    let tail: Vec<CVector> = (0..k).map(|j| anti_pow(c, &e, j)).collect();
    let mut x = e.clone();
    for mm in 2..=k {
        let pw = k - mm;
        let dir = tail[mm - 1].clone();
        let base = x.clone();
        let f = |v: &[f64]| -> Vec<f64> {
            let y = &base + &dir * Complex64::new(v[0], v[1]);
            let val = ell(h, &y, &anti_pow(c, &y, pw));
            vec![val.re, val.im]
        };
        let a = solve_affine(f, 2)?;
        x = &base + &dir * Complex64::new(a[0], a[1]);
    }

    let mut f = CMatrix::zeros(r, k);
    let mut cur = x;
    for j in (0..k).rev() {
        f.set_column(j, &cur);
        cur = anti(c, &cur);
    }
    let block = CanonicalBlock::zero(k, eps)?;
    check_chain(h, c, &f, &block, tol, "zero")?;
    Ok(ChainBasis { vectors: f, block })
}

/// Peel the largest zero block off a pair whose `A²` is nilpotent.
pub fn normalize_zero(p: &SelfAdjointPair, tol: &ToleranceConfig) -> Result<(ChainBasis, SubspaceBasis)> {
    let cl = single_cluster(p, Family::Zero, tol)?;
    let k = cl.block_sizes[0].0;
    let chain = zero_chain(p.h(), p.c(), k, tol)?;
    let comp = complement_of(p, &chain)?;
    Ok((chain, comp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::{jordan, sip};
    use crate::linalg::{from_real_rows, from_rows};
    use crate::pair::{apply_basis_change, validate_pair};

    #[test]
    fn split_signature() {
        let t = ToleranceConfig::default();
        let p = validate_pair(&from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]), &CMatrix::zeros(2, 2), &t).unwrap();
        let (chain, comp) = normalize_zero(&p, &t).unwrap();
        assert_eq!(chain.block.k, 1);
        assert_eq!(comp.dim(), 1);
        let rest = crate::spectral::restrict_pair(&p, &comp, &t).unwrap();
        let (c2, _) = normalize_zero(&rest, &t).unwrap();
        assert_eq!(chain.block.epsilon + c2.block.epsilon, 0);
    }

    #[test]
    fn shift_blocks_conjugated() {
        let t = ToleranceConfig::default();
        let m = from_rows(&[
            vec![cx(1.0, 0.3), cx(0.2, 0.0), cx(0.0, -0.5)],
            vec![cx(-0.1, 0.4), cx(0.8, -0.2), cx(0.3, 0.1)],
            vec![cx(0.2, 0.2), cx(-0.3, 0.0), cx(1.1, 0.0)],
        ]);
        for k in [2usize, 3] {
            for eps in [1.0, -1.0] {
                let h0 = sip(3) * cx(eps, 0.0);
                let c0 = if k == 3 {
                    jordan(cx(0.0, 0.0), 3)
                } else {
                    crate::linalg::block_diag(&[jordan(cx(0.0, 0.0), 2), CMatrix::zeros(1, 1)])
                };
                let h0 = if k == 3 { h0 } else { crate::linalg::block_diag(&[sip(2) * cx(eps, 0.0), sip(1)]) };
                let p0 = validate_pair(&h0, &c0, &t).unwrap();
                let p = apply_basis_change(&p0, &m, &t).unwrap();
                let (chain, comp) = normalize_zero(&p, &t).unwrap();
                assert_eq!(chain.block.k, k);
                assert_eq!(comp.dim(), 3 - k);
                if k == 3 {
                    assert_eq!(chain.block.epsilon as f64, eps);
                } else {
                    assert_eq!(chain.block.epsilon, 1);
                }
            }
        }
    }
}
