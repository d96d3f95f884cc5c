//! Alternative canonical form with blocks `(±N_{λ,k}, M_{λ,k})`, converters
//! from the standard atlas, Toeplitz square roots of Jordan blocks, and the
//! symmetry group of a Jordan block under an indefinite form.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use num_rational::BigRational;

use crate::atlas::catalan::{catalan_exact, exact_toeplitz};
use crate::atlas::{build_alt_block, build_pair_block, jordan, sip, sqrt_toeplitz, CanonicalBlock};
use crate::canonical::{canonicalize_pair, verify_canonical, CanonicalForm, Flavor};
use crate::error::{PairError, Result};
use crate::harness::same_blocks;
use crate::linalg::{block_diag, inverse, norm, require_square, CMatrix};
use crate::pair::validate_pair;
use crate::tolerance::ToleranceConfig;

/// `X = Σ c_i(λ) T^i` with `X² = J_{λ²,k}`.
pub fn jordan_square_root(lambda: Complex64, k: usize) -> Result<CMatrix> {
    if k == 0 {
        return Err(PairError::InvalidArgument("k must be at least 1".into()));
    }
    if lambda.norm() == 0.0 {
        return Err(PairError::InvalidArgument("a full nilpotent Jordan block has no Toeplitz square root".into()));
    }
    sqrt_toeplitz(lambda, k)
}

/// Exact rational version of [`jordan_square_root`], as rows.
pub fn jordan_square_root_exact(lambda: &BigRational, k: usize) -> Result<Vec<Vec<BigRational>>> {
    if k == 0 {
        return Err(PairError::InvalidArgument("k must be at least 1".into()));
    }
    let c = catalan_exact(lambda, k)?;
    Ok(exact_toeplitz(&c, k))
}

/// Residuals of the two conditions defining the symmetry group of
/// `(S_n, J_{λ²,n})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    /// `‖M* S M − S‖ / ‖S‖`.
    pub isometry: f64,
    /// `‖M J − J M‖ / (‖M‖ ‖J‖)`.
    pub commutation: f64,
    pub holds: bool,
}

pub fn is_glr_symmetry(m: &CMatrix, lambda_sq: Complex64, tol: &ToleranceConfig) -> Result<SymmetryCheck> {
    let n = require_square(m)?;
    let s = sip(n);
    let j = jordan(lambda_sq, n);
    let isometry = norm(&(m.adjoint() * &s * m - &s)) / norm(&s).max(1.0);
    let den = (norm(m) * norm(&j)).max(f64::MIN_POSITIVE);
    let commutation = norm(&(m * &j - &j * m)) / den;
    Ok(SymmetryCheck { isometry, commutation, holds: isometry <= tol.verify_tol && commutation <= tol.verify_tol })
}

type Key = (u8, usize, i8, u64, u64);

fn key(b: &CanonicalBlock) -> Key {
    let fam = b.family as u8;
    (fam, b.k, b.epsilon, b.lambda_sq.re.to_bits(), b.lambda_sq.im.to_bits())
}

fn cache() -> &'static RwLock<HashMap<Key, CMatrix>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, CMatrix>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Transition `T_b` taking `(εH_{λ,k}, C_{λ,k})` to `(εN_{λ,k}, M_{λ,k})`.
/// Both atlas pairs are canonicalized; they land on the same block and the
/// two transitions are composed. Results are cached per block.
pub fn block_converter(b: &CanonicalBlock, tol: &ToleranceConfig) -> Result<CMatrix> {
    b.validate()?;
    let k = key(b);
    if let Some(t) = cache().read().ok().and_then(|c| c.get(&k).cloned()) {
        return Ok(t);
    }
    let (hs, cs) = build_pair_block(b)?;
    let (ha, ca) = build_alt_block(b)?;
    let fs = canonicalize_pair(&validate_pair(&hs, &cs, tol)?, tol)?;
    let fa = canonicalize_pair(&validate_pair(&ha, &ca, tol)?, tol)?;
    if !same_blocks(&fs.blocks, &fa.blocks, tol) {
        return Err(PairError::Numerical(format!(
            "standard and alternative atlas pairs for {b} are not equivalent ({:?} vs {:?})",
            fs.blocks, fa.blocks
        )));
    }
    let t = inverse(&fa.transition, tol)? * &fs.transition;
    if let Ok(mut c) = cache().write() {
        c.entry(k).or_insert_with(|| t.clone());
    }
    Ok(t)
}

fn converters(blocks: &[CanonicalBlock], tol: &ToleranceConfig) -> Result<CMatrix> {
    let ts = blocks.iter().map(|b| block_converter(b, tol)).collect::<Result<Vec<_>>>()?;
    Ok(block_diag(&ts))
}

/// Re-express a standard form in the alternative flavor, or back.
pub fn convert(p: &crate::pair::SelfAdjointPair, form: &CanonicalForm, target: Flavor, tol: &ToleranceConfig) -> Result<CanonicalForm> {
    let t = converters(&form.blocks, tol)?;
    let transition = match (form.flavor, target) {
        (a, b) if a == b => form.transition.clone(),
        (Flavor::Standard, Flavor::Alternative) => &t * &form.transition,
        (Flavor::Alternative, Flavor::Standard) => inverse(&t, tol)? * &form.transition,
        (a, b) => {
            return Err(PairError::InvalidArgument(format!("cannot convert {} to {}", a.name(), b.name())));
        }
    };
    let mut out = CanonicalForm { blocks: form.blocks.clone(), transition, flavor: target, residuals: form.residuals };
    out.residuals = verify_canonical(p, &out, tol)?;
    Ok(out)
}

/// The alternative canonical form: same blocks as [`canonicalize_pair`].
pub fn alt_canonicalize(p: &crate::pair::SelfAdjointPair, tol: &ToleranceConfig) -> Result<CanonicalForm> {
    let std = canonicalize_pair(p, tol)?;
    convert(p, &std, Flavor::Alternative, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::{m_block, Family};
    use crate::linalg::{conj, cx};
    use num_bigint::BigInt;

    fn t() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn square_root_examples() {
        let x = jordan_square_root(cx(1.0, 0.0), 3).unwrap();
        let want = crate::atlas::toeplitz(&[cx(1.0, 0.0), cx(0.5, 0.0), cx(-0.125, 0.0)], 3);
        assert_eq!(x, want);
        assert_eq!(&x * &x, jordan(cx(1.0, 0.0), 3));
        assert_eq!(jordan_square_root(cx(1.0, 0.0), 1).unwrap(), CMatrix::from_element(1, 1, cx(1.0, 0.0)));
        assert!(jordan_square_root(cx(0.0, 0.0), 2).is_err());
        let ex = jordan_square_root_exact(&BigRational::from_integer(BigInt::from(1)), 3).unwrap();
        assert_eq!(ex[0][2], BigRational::new(BigInt::from(-1), BigInt::from(8)));
    }

    #[test]
    fn symmetry_examples() {
        let l = cx(4.0, 0.0);
        assert!(is_glr_symmetry(&CMatrix::identity(3, 3), l, &t()).unwrap().holds);
        assert!(!is_glr_symmetry(&(CMatrix::identity(3, 3) * cx(2.0, 0.0)), l, &t()).unwrap().holds);
        // exp(i s T) commutes with J and preserves S
        let tt = crate::atlas::shift(3) * cx(0.0, 0.7);
        let e = CMatrix::identity(3, 3) + &tt + &tt * &tt * cx(0.5, 0.0);
        assert!(is_glr_symmetry(&e, l, &t()).unwrap().holds);
    }

    #[test]
    fn converters_realize_alt_atlas() {
        for k in 1..=5 {
            for b in [
                CanonicalBlock::positive(1.3, k, -1).unwrap(),
                CanonicalBlock::zero(k, 1).unwrap(),
                CanonicalBlock::new(cx(-2.0, 0.0), k, 1).unwrap(),
                CanonicalBlock::new(cx(1.0, 1.0), k, 1).unwrap(),
            ] {
                let tb = block_converter(&b, &t()).unwrap();
                let (hs, cs) = build_pair_block(&b).unwrap();
                let (ha, ca) = build_alt_block(&b).unwrap();
                let ti = inverse(&tb, &t()).unwrap();
                let h2 = ti.adjoint() * hs * &ti;
                let c2 = &tb * cs * conj(&ti);
                assert!(norm(&(h2 - ha)) < 1e-8, "{b}");
                assert!(norm(&(c2 - ca)) < 1e-8, "{b}");
            }
        }
    }

    #[test]
    fn positive_k1_converter_is_trivial() {
        let b = CanonicalBlock::positive(2.0, 1, 1).unwrap();
        let tb = block_converter(&b, &t()).unwrap();
        assert!((tb[(0, 0)] - cx(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn alt_form_of_conjugate() {
        let blocks = vec![CanonicalBlock::positive(1.5, 2, -1).unwrap(), CanonicalBlock::zero(3, 1).unwrap()];
        let (h, c) = crate::atlas::assemble(&blocks).unwrap();
        let m = CMatrix::from_fn(5, 5, |i, j| cx(if i == j { 1.0 } else { 0.1 * ((i + 2 * j) % 3) as f64 }, 0.05 * i as f64));
        let p = crate::pair::apply_basis_change(&validate_pair(&h, &c, &t()).unwrap(), &m, &t()).unwrap();
        let f = alt_canonicalize(&p, &t()).unwrap();
        assert_eq!(f.flavor, Flavor::Alternative);
        assert!(f.residuals.pass, "{:?}", f.residuals);
        let back = convert(&p, &f, Flavor::Standard, &t()).unwrap();
        assert!(back.residuals.pass);
        assert_eq!(back.blocks, f.blocks);
    }

    #[test]
    fn nonreal_alt_square_is_jordan_pair() {
        let b = CanonicalBlock::new(cx(1.0, 2.0), 3, 1).unwrap();
        let m = m_block(&b).unwrap();
        let sq = &m * conj(&m);
        let want = block_diag(&[jordan(b.lambda_sq, 3), jordan(b.lambda_sq.conj(), 3)]);
        assert!(norm(&(sq - want)) < 1e-12);
        assert_eq!(b.family, Family::Nonreal);
    }
}
