//! Forward-constructed random pairs, orbit comparison and tiny-dimension
//! oracles. `suite` holds the numbered acceptance runs.

pub mod suite;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atlas::{assemble, sort_blocks, CanonicalBlock, Family};
use crate::canonical::canonicalize_pair;
use crate::error::{PairError, Result};
use crate::linalg::{condition_estimate, cx, CMatrix};
use crate::pair::{apply_basis_change, validate_pair, SelfAdjointPair};
use crate::tolerance::ToleranceConfig;

/// Largest accepted `‖M‖_F ‖M⁻¹‖_F` for random transitions.
pub const MAX_CONDITION: f64 = 100.0;

/// The block list a generated pair is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub blocks: Vec<CanonicalBlock>,
}

impl SpectrumSpec {
    pub fn new(blocks: Vec<CanonicalBlock>) -> Self {
        SpectrumSpec { blocks }
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    pub fn families(&self) -> Vec<Family> {
        let mut f: Vec<Family> = self.blocks.iter().map(|b| b.family).collect();
        f.dedup();
        f
    }
}

fn fmt_block(b: &CanonicalBlock) -> String {
    let sign = if b.epsilon > 0 { "+" } else { "-" };
    match b.family {
        Family::PositiveReal => format!("positive:{}:{}:{sign}", b.lambda.re, b.k),
        Family::Zero => format!("zero:{}:{sign}", b.k),
        Family::Negative => format!("negative:{}:{}:{sign}", b.lambda_sq.re, b.k),
        Family::Nonreal => format!("nonreal:{}:{}:{}:{sign}", b.lambda_sq.re, b.lambda_sq.im, b.k),
    }
}

impl fmt::Display for SpectrumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(fmt_block).collect();
        f.write_str(&parts.join(","))
    }
}

fn parse_sign(s: Option<&str>) -> Result<i8> {
    match s {
        None | Some("+") | Some("+1") | Some("1") => Ok(1),
        Some("-") | Some("-1") => Ok(-1),
        Some(other) => Err(PairError::InvalidArgument(format!("bad sign `{other}`"))),
    }
}

fn parse_num<T: FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|x| x.trim().parse().ok())
        .ok_or_else(|| PairError::InvalidArgument(format!("missing or malformed {what}")))
}

/// Comma-separated blocks:
/// `positive:λ:k[:±]`, `zero:k[:±]`, `negative:λ²:k[:±]`, `nonreal:re:im:k[:±]`.
impl FromStr for SpectrumSpec {
    type Err = PairError;

    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let mut it = item.split(':');
            let fam = it.next().unwrap_or("");
            let fam = Family::parse(fam).ok_or_else(|| PairError::InvalidArgument(format!("unknown family `{fam}`")))?;
            let b = match fam {
                Family::PositiveReal => {
                    let l: f64 = parse_num(it.next(), "λ")?;
                    let k = parse_num(it.next(), "k")?;
                    CanonicalBlock::positive(l, k, parse_sign(it.next())?)?
                }
                Family::Zero => {
                    let k = parse_num(it.next(), "k")?;
                    CanonicalBlock::zero(k, parse_sign(it.next())?)?
                }
                Family::Negative => {
                    let l: f64 = parse_num(it.next(), "λ²")?;
                    let k = parse_num(it.next(), "k")?;
                    let b = CanonicalBlock::new(cx(l, 0.0), k, parse_sign(it.next())?)?;
                    if b.family != Family::Negative {
                        return Err(PairError::InvalidArgument(format!("negative block needs λ² < 0, got {l}")));
                    }
                    b
                }
                Family::Nonreal => {
                    let re: f64 = parse_num(it.next(), "Re λ²")?;
                    let im: f64 = parse_num(it.next(), "Im λ²")?;
                    let k = parse_num(it.next(), "k")?;
                    let b = CanonicalBlock::new(cx(re, im), k, parse_sign(it.next())?)?;
                    if b.family != Family::Nonreal {
                        return Err(PairError::InvalidArgument(format!("nonreal block needs Im λ² ≠ 0, got {im}")));
                    }
                    b
                }
            };
            if it.next().is_some() {
                return Err(PairError::InvalidArgument(format!("trailing fields in `{item}`")));
            }
            blocks.push(b);
        }
        if blocks.is_empty() {
            return Err(PairError::InvalidArgument("empty spectrum spec".into()));
        }
        Ok(SpectrumSpec { blocks })
    }
}

/// A generated pair with its construction data.
#[derive(Debug, Clone)]
pub struct GeneratedPair {
    pub pair: SelfAdjointPair,
    /// Sorted blocks the pair was assembled from, signs already following the
    /// policy (only positive and odd zero blocks may carry `−1`).
    pub truth: Vec<CanonicalBlock>,
    /// `M` with `apply_basis_change(assembled, M) = pair`.
    pub transition: CMatrix,
}

/// Random `M` with entries uniform in `[−1, 1] + i[−1, 1]` and condition
/// estimate at most [`MAX_CONDITION`].
pub fn random_transition<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    loop {
        let m = CMatrix::from_fn(n, n, |_, _| cx(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)));
        if condition_estimate(&m) <= MAX_CONDITION {
            return m;
        }
    }
}

/// Apply the sign policy: `ε = +1` wherever a sign flip is an orbit symmetry.
pub fn policy_sign(b: &CanonicalBlock) -> CanonicalBlock {
    let mut out = *b;
    if b.family.sign_is_invariant(b.k) {
        return out;
    }
    out.epsilon = 1;
    out
}

/// Assemble `spec`, then conjugate by a random well-conditioned `M` (or by the
/// identity when `seed` is `None`).
pub fn random_canonical_pair(n: usize, spec: &SpectrumSpec, seed: Option<u64>, tol: &ToleranceConfig) -> Result<GeneratedPair> {
    if spec.dim() != n {
        return Err(PairError::InvalidArgument(format!("spec has dimension {} but n = {n}", spec.dim())));
    }
    let (h, c) = assemble(&spec.blocks)?;
    let base = validate_pair(&h, &c, tol)?;
    let m = match seed {
        Some(s) => random_transition(n, &mut ChaCha8Rng::seed_from_u64(s)),
        None => CMatrix::identity(n, n),
    };
    let pair = apply_basis_change(&base, &m, tol)?;
    let truth = sort_blocks(spec.blocks.iter().map(policy_sign).collect());
    Ok(GeneratedPair { pair, truth, transition: m })
}

/// `λ²` candidates per family, spaced at least one unit apart.
const POSITIVE_SQ: [f64; 4] = [1.0, 2.5, 4.0, 5.5];
const NEGATIVE_SQ: [f64; 3] = [-1.0, -2.5, -4.0];
const NONREAL_SQ: [(f64, f64); 4] = [(1.0, 1.5), (-1.5, 2.0), (2.5, -1.5), (0.0, 3.0)];

/// Random block list of total dimension `n`. `k` is capped at `kmax`.
pub fn random_spectrum_spec<R: Rng>(n: usize, kmax: usize, rng: &mut R) -> SpectrumSpec {
    let mut blocks = Vec::new();
    let mut rem = n;
    let jitter = |rng: &mut R| rng.gen_range(-0.1..0.1);
    let mut pos = POSITIVE_SQ.to_vec();
    let mut neg = NEGATIVE_SQ.to_vec();
    let mut nre = NONREAL_SQ.to_vec();
    let mut reuse: Vec<CanonicalBlock> = Vec::new();
    while rem > 0 {
        let fam = if rem == 1 { rng.gen_range(0..2) } else { rng.gen_range(0..4) };
        let width = if fam >= 2 { 2 } else { 1 };
        let k = rng.gen_range(1..=(rem / width).min(kmax));
        let sign: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let same: Vec<CanonicalBlock> = reuse
            .iter()
            .filter(|b| match fam {
                0 => b.family == Family::PositiveReal,
                1 => b.family == Family::Zero,
                2 => b.family == Family::Negative,
                _ => b.family == Family::Nonreal,
            })
            .copied()
            .collect();
        let recycle = !same.is_empty() && rng.gen_bool(0.4);
        let b = match fam {
            0 => {
                let sq = if recycle {
                    same[0].lambda_sq.re
                } else if let Some(v) = pos.pop() {
                    v + jitter(rng)
                } else {
                    same.first().map(|b| b.lambda_sq.re).unwrap_or(1.0)
                };
                CanonicalBlock::positive(sq.sqrt(), k, sign)
            }
            1 => CanonicalBlock::zero(k, sign),
            2 => {
                let sq = if recycle {
                    same[0].lambda_sq.re
                } else if let Some(v) = neg.pop() {
                    v + jitter(rng)
                } else {
                    same.first().map(|b| b.lambda_sq.re).unwrap_or(-1.0)
                };
                CanonicalBlock::new(cx(sq, 0.0), k, 1)
            }
            _ => {
                let sq = if recycle {
                    same[0].lambda_sq
                } else if let Some((re, im)) = nre.pop() {
                    cx(re + jitter(rng), im + jitter(rng))
                } else {
                    same.first().map(|b| b.lambda_sq).unwrap_or(cx(1.0, 1.5))
                };
                CanonicalBlock::new(sq, k, 1)
            }
        }
        .expect("generated block is valid");
        let b = policy_sign(&b);
        reuse.push(b);
        rem -= b.dim();
        blocks.push(b);
    }
    SpectrumSpec { blocks }
}

/// Equal sorted block lists: families, sizes and signs exactly, `λ²` within
/// `verify_tol` relative to its magnitude.
pub fn same_blocks(a: &[CanonicalBlock], b: &[CanonicalBlock], tol: &ToleranceConfig) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.family == y.family
                && x.k == y.k
                && x.epsilon == y.epsilon
                && (x.lambda_sq - y.lambda_sq).norm() <= tol.verify_tol * x.lambda_sq.norm().max(1.0)
        })
}

/// Whether `p` and `q` have the same canonical block list.
pub fn orbit_check(p: &SelfAdjointPair, q: &SelfAdjointPair, tol: &ToleranceConfig) -> Result<bool> {
    if p.n != q.n {
        return Err(PairError::DimensionMismatch { expected: p.n, got: q.n });
    }
    let a = canonicalize_pair(p, tol)?;
    let b = canonicalize_pair(q, tol)?;
    Ok(same_blocks(&a.blocks, &b.blocks, tol))
}

/// Closed-form orbit of a `1 × 1` pair `(h, c)`: a phase rotates `c` to `|c|`
/// and a positive scale brings `h` to `±1`.
pub fn brute_force_1d_oracle(h: f64, c: Complex64) -> Result<CanonicalBlock> {
    if h == 0.0 || !h.is_finite() {
        return Err(PairError::InvalidArgument(format!("h must be a nonzero real, got {h}")));
    }
    let sign = if h > 0.0 { 1 } else { -1 };
    if c == cx(0.0, 0.0) {
        CanonicalBlock::zero(1, sign)
    } else {
        CanonicalBlock::positive(c.norm(), 1, sign)
    }
}
