//! Named matrices and the canonical block records built from them.

pub mod catalan;

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;

use crate::error::{PairError, Result};
use crate::linalg::{block_diag, cx, zeros, CMatrix};

pub use catalan::{catalan_closed_form, catalan_coefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    PositiveReal,
    Zero,
    Negative,
    Nonreal,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::PositiveReal => "positive-real",
            Family::Zero => "zero",
            Family::Negative => "negative",
            Family::Nonreal => "nonreal",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "positive-real" | "positive" => Some(Family::PositiveReal),
            "zero" => Some(Family::Zero),
            "negative" => Some(Family::Negative),
            "nonreal" => Some(Family::Nonreal),
            _ => None,
        }
    }

    /// Family of an eigenvalue of `A²` taken exactly as given.
    pub fn of(lambda_sq: Complex64) -> Family {
        if lambda_sq.im != 0.0 {
            Family::Nonreal
        } else if lambda_sq.re > 0.0 {
            Family::PositiveReal
        } else if lambda_sq.re < 0.0 {
            Family::Negative
        } else {
            Family::Zero
        }
    }

    /// Whether the sign of a block in this family is an orbit invariant
    /// (for zero blocks only when `k` is odd).
    pub fn sign_is_invariant(&self, k: usize) -> bool {
        match self {
            Family::PositiveReal => true,
            Family::Zero => k % 2 == 1,
            Family::Negative | Family::Nonreal => false,
        }
    }
}

/// Principal square root: `Re λ > 0`, or `Re λ = 0` and `Im λ ≥ 0`.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            return cx(z.re.sqrt(), 0.0);
        }
        return cx(0.0, (-z.re).sqrt());
    }
    let r = z.sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        -r
    } else {
        r
    }
}

/// One diagonal block `(ε H_{λ,k}, C_{λ,k})` of the canonical form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalBlock {
    pub family: Family,
    pub lambda: Complex64,
    pub lambda_sq: Complex64,
    pub k: usize,
    pub epsilon: i8,
}

impl CanonicalBlock {
    /// Block for eigenvalue `lambda_sq` of `A²`; family and root are derived.
    /// Nonreal values are stored with positive imaginary part.
    pub fn new(lambda_sq: Complex64, k: usize, epsilon: i8) -> Result<Self> {
        let ls = if lambda_sq.im < 0.0 { lambda_sq.conj() } else { lambda_sq };
        let b = CanonicalBlock {
            family: Family::of(ls),
            lambda: principal_sqrt(ls),
            lambda_sq: ls,
            k,
            epsilon,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn positive(lambda: f64, k: usize, epsilon: i8) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(PairError::InvalidBlock(format!("positive-real block needs λ > 0, got {lambda}")));
        }
        CanonicalBlock::new(cx(lambda * lambda, 0.0), k, epsilon).map(|mut b| {
            b.lambda = cx(lambda, 0.0);
            b
        })
    }

    pub fn zero(k: usize, epsilon: i8) -> Result<Self> {
        CanonicalBlock::new(cx(0.0, 0.0), k, epsilon)
    }

    pub fn dim(&self) -> usize {
        match self.family {
            Family::PositiveReal | Family::Zero => self.k,
            Family::Negative | Family::Nonreal => 2 * self.k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(PairError::InvalidBlock("k must be at least 1".into()));
        }
        if self.epsilon != 1 && self.epsilon != -1 {
            return Err(PairError::InvalidBlock(format!("ε must be ±1, got {}", self.epsilon)));
        }
        let ls = self.lambda_sq;
        if !(ls.re.is_finite() && ls.im.is_finite() && self.lambda.re.is_finite() && self.lambda.im.is_finite()) {
            return Err(PairError::InvalidBlock("non-finite eigenvalue".into()));
        }
        let ok = match self.family {
            Family::PositiveReal => ls.im == 0.0 && ls.re > 0.0,
            Family::Zero => ls.re == 0.0 && ls.im == 0.0,
            Family::Negative => ls.im == 0.0 && ls.re < 0.0,
            Family::Nonreal => ls.im > 0.0,
        };
        if !ok {
            return Err(PairError::InvalidBlock(format!(
                "family {} inconsistent with λ² = {}",
                self.family.name(),
                ls
            )));
        }
        let sq = self.lambda * self.lambda;
        if (sq - ls).norm() > 1e-12 * ls.norm().max(1.0) {
            return Err(PairError::InvalidBlock(format!("λ = {} is not a root of λ² = {}", self.lambda, ls)));
        }
        let p = principal_sqrt(ls);
        if (p - self.lambda).norm() > 1e-12 * p.norm().max(1.0) {
            return Err(PairError::InvalidBlock(format!("λ = {} is not the principal root", self.lambda)));
        }
        Ok(())
    }

    /// True when `λ` is real, so `C_{λ,k}` is a single Jordan block.
    pub fn is_real_lambda(&self) -> bool {
        matches!(self.family, Family::PositiveReal | Family::Zero)
    }

    fn sort_key(&self) -> (f64, f64, i64, i64) {
        (self.lambda_sq.re, self.lambda_sq.im, -(self.k as i64), -(self.epsilon as i64))
    }
}

impl fmt::Display for CanonicalBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, λ²={:.6}{:+.6}i, k={}, ε={:+})",
            self.family.name(),
            self.lambda_sq.re,
            self.lambda_sq.im,
            self.k,
            self.epsilon
        )
    }
}

fn cmp_keys(a: (f64, f64, i64, i64), b: (f64, f64, i64, i64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3))
}

/// Stable sort by `(Re λ², Im λ², k descending, ε descending)`.
pub fn sort_blocks(mut blocks: Vec<CanonicalBlock>) -> Vec<CanonicalBlock> {
    blocks.sort_by(compare_blocks);
    blocks
}

/// The order used by [`sort_blocks`].
pub fn compare_blocks(a: &CanonicalBlock, b: &CanonicalBlock) -> Ordering {
    cmp_keys(a.sort_key(), b.sort_key())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicKind {
    /// Anti-identity (sip matrix).
    S,
    /// Nilpotent shift with ones on the superdiagonal.
    T,
    /// Jordan block `λI + T`.
    J,
}

pub fn build_basic(kind: BasicKind, k: usize, lambda: Option<Complex64>) -> Result<CMatrix> {
    if k == 0 {
        return Err(PairError::InvalidArgument("k must be at least 1".into()));
    }
    Ok(match kind {
        BasicKind::S => sip(k),
        BasicKind::T => shift(k),
        BasicKind::J => {
            let l = lambda.ok_or_else(|| PairError::InvalidArgument("J needs λ".into()))?;
            jordan(l, k)
        }
    })
}

/// `S_k`. `k = 0` gives the empty matrix.
pub fn sip(k: usize) -> CMatrix {
    CMatrix::from_fn(k, k, |i, j| if i + j + 1 == k { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
}

/// `T_k`.
pub fn shift(k: usize) -> CMatrix {
    CMatrix::from_fn(k, k, |i, j| if j == i + 1 { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
}

/// `J_{λ,k} = λ I + T_k`.
pub fn jordan(lambda: Complex64, k: usize) -> CMatrix {
    CMatrix::from_fn(k, k, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            cx(1.0, 0.0)
        } else {
            cx(0.0, 0.0)
        }
    })
}

/// Upper Toeplitz `Σ a_i T^i`.
pub fn toeplitz(coeffs: &[Complex64], k: usize) -> CMatrix {
    CMatrix::from_fn(k, k, |i, j| {
        if j >= i && j - i < coeffs.len() {
            coeffs[j - i]
        } else {
            cx(0.0, 0.0)
        }
    })
}

fn anti_diag_pair(top_right: &CMatrix, bottom_left: &CMatrix) -> CMatrix {
    let k = top_right.nrows();
    let mut m = zeros(2 * k, 2 * k);
    m.view_mut((0, k), (k, k)).copy_from(top_right);
    m.view_mut((k, 0), (k, k)).copy_from(bottom_left);
    m
}

/// `C_{λ,k}`: `J_{λ,k}` for real λ, otherwise `[[0, J_{λ²,k}], [I_k, 0]]`.
pub fn c_block(b: &CanonicalBlock) -> CMatrix {
    if b.is_real_lambda() {
        jordan(b.lambda, b.k)
    } else {
        anti_diag_pair(&jordan(b.lambda_sq, b.k), &CMatrix::identity(b.k, b.k))
    }
}

/// Unsigned `H_{λ,k}`: `S_k` for real λ, otherwise `S_{2k}`.
pub fn h_block(b: &CanonicalBlock) -> CMatrix {
    sip(b.dim())
}

/// `(ε H_{λ,k}, C_{λ,k})`.
pub fn build_pair_block(b: &CanonicalBlock) -> Result<(CMatrix, CMatrix)> {
    b.validate()?;
    Ok((h_block(b) * cx(b.epsilon as f64, 0.0), c_block(b)))
}

/// Toeplitz square root `X(λ) = Σ_{i<k} c_i(λ) T^i` of `J_{λ²,k}`.
pub fn sqrt_toeplitz(lambda: Complex64, k: usize) -> Result<CMatrix> {
    let c = catalan_coefficients(lambda, k)?;
    Ok(toeplitz(&c, k))
}

/// Unsigned `N_{λ,k}`.
pub fn n_block(b: &CanonicalBlock) -> CMatrix {
    let k = b.k;
    match b.family {
        Family::PositiveReal => sip(k),
        Family::Zero => {
            if k % 2 == 0 {
                block_diag(&[sip(k / 2), -sip(k / 2)])
            } else {
                block_diag(&[sip(k / 2), sip(k - k / 2)])
            }
        }
        Family::Negative => block_diag(&[sip(k), -sip(k)]),
        Family::Nonreal => sip(2 * k),
    }
}

/// `M_{λ,k}`.
pub fn m_block(b: &CanonicalBlock) -> Result<CMatrix> {
    let k = b.k;
    Ok(match b.family {
        Family::PositiveReal => sqrt_toeplitz(b.lambda, k)?,
        Family::Zero => {
            if k % 2 == 0 {
                let p = k / 2;
                let j1 = jordan(cx(1.0, 0.0), p);
                let jm = jordan(cx(-1.0, 0.0), p);
                let mut m = zeros(k, k);
                m.view_mut((0, 0), (p, p)).copy_from(&j1);
                m.view_mut((0, p), (p, p)).copy_from(&(-&jm));
                m.view_mut((p, 0), (p, p)).copy_from(&jm);
                m.view_mut((p, p), (p, p)).copy_from(&(-&j1));
                m * cx(0.5, 0.0)
            } else {
                // block rows p, p, 1 and block columns p, 1, p:
                // [[0, 0, I], [I, 0, 0], [0, 0, 0]]
                let p = k / 2;
                let mut m = zeros(k, k);
                for i in 0..p {
                    m[(i, p + 1 + i)] = cx(1.0, 0.0);
                    m[(p + i, i)] = cx(1.0, 0.0);
                }
                m
            }
        }
        Family::Negative | Family::Nonreal => {
            anti_diag_pair(&sqrt_toeplitz(b.lambda, k)?, &sqrt_toeplitz(b.lambda.conj(), k)?)
        }
    })
}

/// `(ε N_{λ,k}, M_{λ,k})`.
pub fn build_alt_block(b: &CanonicalBlock) -> Result<(CMatrix, CMatrix)> {
    b.validate()?;
    Ok((n_block(b) * cx(b.epsilon as f64, 0.0), m_block(b)?))
}

/// Block-diagonal `(H, C)` of the standard form for the listed blocks.
pub fn assemble(blocks: &[CanonicalBlock]) -> Result<(CMatrix, CMatrix)> {
    let mut hs = Vec::with_capacity(blocks.len());
    let mut cs = Vec::with_capacity(blocks.len());
    for b in blocks {
        let (h, c) = build_pair_block(b)?;
        hs.push(h);
        cs.push(c);
    }
    Ok((block_diag(&hs), block_diag(&cs)))
}

/// Block-diagonal `(N, M)` of the alternative form.
pub fn assemble_alt(blocks: &[CanonicalBlock]) -> Result<(CMatrix, CMatrix)> {
    let mut hs = Vec::with_capacity(blocks.len());
    let mut cs = Vec::with_capacity(blocks.len());
    for b in blocks {
        let (h, c) = build_alt_block(b)?;
        hs.push(h);
        cs.push(c);
    }
    Ok((block_diag(&hs), block_diag(&cs)))
}

/// The Jordan structure of `A²` on one block: `J_{λ²,k}` for real λ,
/// `J_{λ²,k} ⊕ J_{conj(λ²),k}` otherwise.
pub fn square_jordan(b: &CanonicalBlock) -> CMatrix {
    if b.is_real_lambda() {
        jordan(b.lambda_sq, b.k)
    } else {
        block_diag(&[jordan(b.lambda_sq, b.k), jordan(b.lambda_sq.conj(), b.k)])
    }
}
