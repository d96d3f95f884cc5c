//! Numbered acceptance runs. Each returns one [`Outcome`]; the CLI `selftest`
//! and the `acceptance` test target print them.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Signed;

use super::{brute_force_1d_oracle, random_canonical_pair, random_spectrum_spec, random_transition, same_blocks, GeneratedPair, SpectrumSpec};
use crate::atlas::catalan::{catalan_closed_form_exact, catalan_exact, exact_jordan, exact_matmul};
use crate::atlas::{build_alt_block, build_pair_block, jordan, m_block, n_block, CanonicalBlock, Family};
use crate::alt::jordan_square_root_exact;
use crate::canonical::{canonicalize_operator, canonicalize_pair, witness_form, CanonicalForm};
use crate::error::Result;
use crate::glr::{glr_of_pair, same_glr_blocks, square_blocks};
use crate::linalg::{conj, cx, from_real_rows, inverse, norm, signature, CMatrix};
use crate::normalizers::positive_chain_trace;
use crate::pair::{apply_basis_change, validate_pair, AntilinearOperator};
use crate::spectral::{sizes_from_levels, staircase};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!("[{}] criterion {:>2} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.name, self.detail)
    }
}

/// Per-trial bookkeeping shared by the round-trip and orbit runs.
#[derive(Debug, Default, Clone, Copy)]
pub struct SignatureTally {
    pub checked: usize,
    pub mismatched: usize,
}

fn signature_matches(g: &GeneratedPair, f: &CanonicalForm, tol: &ToleranceConfig) -> Result<bool> {
    let (h_can, _) = f.assembled()?;
    Ok(signature(g.pair.h(), tol)? == signature(&h_can, tol)?)
}

/// Round trip over `trials` generated pairs with `n ≤ 8`.
pub fn roundtrip(trials: usize, seed: u64, tol: &ToleranceConfig) -> (Outcome, SignatureTally) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = 0;
    let mut worst: f64 = 0.0;
    let mut families = [false; 4];
    let mut tally = SignatureTally::default();
    let mut first_failure: Option<String> = None;
    for t in 0..trials {
        let n = rng.gen_range(1..=8);
        let spec = random_spectrum_spec(n, 4, &mut rng);
        let trial_seed = rng.gen::<u64>();
        for b in &spec.blocks {
            families[family_index(b.family)] = true;
        }
        let res = random_canonical_pair(n, &spec, Some(trial_seed), tol).and_then(|g| {
            let f = canonicalize_pair(&g.pair, tol)?;
            Ok((g, f))
        });
        match res {
            Ok((g, f)) => {
                worst = worst.max(f.residuals.max());
                let blocks_ok = same_blocks(&f.blocks, &g.truth, tol);
                tally.checked += 1;
                if !signature_matches(&g, &f, tol).unwrap_or(false) {
                    tally.mismatched += 1;
                }
                if f.residuals.pass && blocks_ok {
                    passed += 1;
                } else if first_failure.is_none() {
                    first_failure = Some(format!("trial {t} spec {spec}: residuals {:?}, blocks_ok {blocks_ok}", f.residuals));
                }
            }
            Err(e) => {
                if first_failure.is_none() {
                    first_failure = Some(format!("trial {t} spec {spec}: {e}"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let all_families = families.iter().all(|&x| x);
    let pass = passed == trials && secs < 60.0 && all_families;
    let mut detail = format!(
        "{passed}/{trials} trials verified (worst residual {worst:.2e} ≤ {:.0e}), all four families: {all_families}, {secs:.2}s < 60s",
        tol.verify_tol
    );
    if let Some(f) = first_failure {
        detail.push_str(&format!("; first failure: {f}"));
    }
    (Outcome { id: 1, name: "round-trip canonicalization", pass, detail }, tally)
}

fn family_index(f: Family) -> usize {
    match f {
        Family::PositiveReal => 0,
        Family::Zero => 1,
        Family::Negative => 2,
        Family::Nonreal => 3,
    }
}

/// `bases` canonical configurations, each conjugated `conjugates` times.
pub fn orbit_invariance(bases: usize, conjugates: usize, seed: u64, tol: &ToleranceConfig) -> (Outcome, SignatureTally) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut consistent = 0;
    let mut tally = SignatureTally::default();
    let mut first_failure: Option<String> = None;
    for b in 0..bases {
        let n = rng.gen_range(1..=8);
        let spec = random_spectrum_spec(n, 4, &mut rng);
        let mut lists: Vec<Vec<crate::atlas::CanonicalBlock>> = Vec::new();
        let mut ok = true;
        for _ in 0..conjugates {
            let s = rng.gen::<u64>();
            match random_canonical_pair(n, &spec, Some(s), tol).and_then(|g| canonicalize_pair(&g.pair, tol).map(|f| (g, f))) {
                Ok((g, f)) => {
                    tally.checked += 1;
                    if !signature_matches(&g, &f, tol).unwrap_or(false) {
                        tally.mismatched += 1;
                    }
                    lists.push(f.blocks);
                }
                Err(e) => {
                    ok = false;
                    if first_failure.is_none() {
                        first_failure = Some(format!("base {b} spec {spec}: {e}"));
                    }
                }
            }
        }
        if ok && lists.windows(2).all(|w| same_blocks(&w[0], &w[1], tol)) {
            consistent += 1;
        } else if ok && first_failure.is_none() {
            first_failure = Some(format!("base {b} spec {spec}: block lists differ"));
        }
    }
    let pass = consistent == bases;
    let mut detail = format!("{consistent}/{bases} configurations gave identical block lists over {conjugates} conjugates");
    if let Some(f) = first_failure {
        detail.push_str(&format!("; first failure: {f}"));
    }
    (Outcome { id: 2, name: "orbit invariance", pass, detail }, tally)
}

pub fn signature_conservation(tallies: &[SignatureTally]) -> Outcome {
    let checked: usize = tallies.iter().map(|t| t.checked).sum();
    let bad: usize = tallies.iter().map(|t| t.mismatched).sum();
    Outcome {
        id: 3,
        name: "signature conservation",
        pass: bad == 0 && checked > 0,
        detail: format!("{}/{checked} trials conserved the signature", checked - bad),
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact Catalan identities in rational arithmetic.
pub fn catalan_suite() -> Outcome {
    let mut failures = Vec::new();
    for lam in [q(1, 1), q(1, 2), q(3, 1)] {
        match catalan_exact(&lam, 13) {
            Ok(rec) => {
                for (i, r) in rec.iter().enumerate().skip(1) {
                    if catalan_closed_form_exact(&lam, i).ok().as_ref() != Some(r) {
                        failures.push(format!("closed form differs at λ = {lam}, i = {i}"));
                    }
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
        for k in 1..=12 {
            match jordan_square_root_exact(&lam, k) {
                Ok(x) => {
                    if exact_matmul(&x, &x) != exact_jordan(&(&lam * &lam), k) {
                        failures.push(format!("X² ≠ J at λ = {lam}, k = {k}"));
                    }
                }
                Err(e) => failures.push(e.to_string()),
            }
        }
    }
    let half = catalan_exact(&q(1, 2), 7).unwrap_or_default();
    let abs: Vec<BigRational> = half.iter().skip(1).map(|c| c.abs()).collect();
    let want: Vec<BigRational> = [1, 1, 2, 5, 14, 42].iter().map(|&v| q(v, 1)).collect();
    if abs != want {
        failures.push(format!("|c_i(1/2)| = {abs:?}"));
    }
    Outcome {
        id: 4,
        name: "exact Catalan suite",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "recurrence = closed form for λ ∈ {1, 1/2, 3}, i ≤ 12; |c_i(1/2)| = 1,1,2,5,14,42; X² = J_{λ²,k} exactly for k ≤ 12".into()
        } else {
            failures.join("; ")
        },
    }
}

/// The explicit six-dimensional change of basis between the two nilpotent forms.
pub fn explicit_t() -> CMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let rows: [[f64; 6]; 6] = [
        [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        [-1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -1.0, 1.0],
    ];
    CMatrix::from_fn(6, 6, |i, j| cx(r * rows[i][j], 0.0))
}

pub fn explicit_t_check(tol: &ToleranceConfig) -> Outcome {
    let b = CanonicalBlock::zero(6, 1).expect("valid block");
    let t = explicit_t();
    let res = (|| -> Result<(f64, f64)> {
        let ti = inverse(&t, tol)?;
        let (h, c) = build_pair_block(&b)?;
        let n6 = n_block(&b);
        let m6 = m_block(&b)?;
        let rh = norm(&(ti.adjoint() * h * &ti - n6));
        let rc = norm(&(&t * c * conj(&ti) - m6));
        Ok((rh, rc))
    })();
    match res {
        Ok((rh, rc)) => Outcome {
            id: 5,
            name: "explicit nilpotent converter",
            pass: rh <= 1e-12 && rc <= 1e-12,
            detail: format!("‖(T⁻¹)*H T⁻¹ − N‖ = {rh:.1e}, ‖T C conj(T)⁻¹ − M‖ = {rc:.1e} (≤ 1e-12)"),
        },
        Err(e) => Outcome { id: 5, name: "explicit nilpotent converter", pass: false, detail: e.to_string() },
    }
}

/// Jordan sizes of `b` at `mu`, from exact-ish kernel dimensions.
fn sizes_at(b: &CMatrix, mu: Complex64) -> Result<Vec<(usize, usize)>> {
    let n = b.nrows();
    let m = b - CMatrix::identity(n, n) * mu;
    let levels = staircase(&m, false, 1e-10 * norm(b).max(1.0), n)?;
    sizes_from_levels(&levels.iter().map(|l| l.ncols()).collect::<Vec<_>>())
}

/// Expected Jordan data of the antilinear square of one block.
fn expected_square(b: &CanonicalBlock) -> Vec<(Complex64, Vec<(usize, usize)>)> {
    let k = b.k;
    match b.family {
        Family::PositiveReal => vec![(b.lambda_sq, vec![(k, 1)])],
        Family::Zero => {
            let (hi, lo) = (k - k / 2, k / 2);
            let sizes = if lo == 0 {
                vec![(hi, 1)]
            } else if hi == lo {
                vec![(hi, 2)]
            } else {
                vec![(hi, 1), (lo, 1)]
            };
            vec![(cx(0.0, 0.0), sizes)]
        }
        Family::Negative => vec![(b.lambda_sq, vec![(k, 2)])],
        Family::Nonreal => vec![(b.lambda_sq, vec![(k, 1)]), (b.lambda_sq.conj(), vec![(k, 1)])],
    }
}

fn is_jordan_shaped(m: &CMatrix, eps: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let z = m[(i, j)];
            if i == j {
                true
            } else if j == i + 1 {
                z.im.abs() <= eps && (z.re.abs() <= eps || (z.re - 1.0).abs() <= eps)
            } else {
                z.norm() <= eps
            }
        })
    })
}

/// Every standard and alternative atlas pair for `k ≤ kmax` in all families.
pub fn atlas_validity(kmax: usize, tol: &ToleranceConfig) -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for k in 1..=kmax {
        for base in [
            CanonicalBlock::positive(1.5, k, 1),
            CanonicalBlock::zero(k, 1),
            CanonicalBlock::new(cx(-2.0, 0.0), k, 1),
            CanonicalBlock::new(cx(1.0, 2.0), k, 1),
        ] {
            let base = base.expect("valid block");
            for eps in [1i8, -1] {
                let b = CanonicalBlock { epsilon: eps, ..base };
                for alt in [false, true] {
                    checked += 1;
                    let (h, c) = if alt { build_alt_block(&b) } else { build_pair_block(&b) }.expect("atlas block");
                    let what = format!("{} {b}", if alt { "alt" } else { "standard" });
                    if let Err(e) = validate_pair(&h, &c, tol) {
                        failures.push(format!("{what}: {e}"));
                        continue;
                    }
                    let sq = &c * conj(&c);
                    for (mu, want) in expected_square(&b) {
                        match sizes_at(&sq, mu) {
                            Ok(got) if got == want => {}
                            Ok(got) => failures.push(format!("{what}: sizes {got:?} at {mu}, want {want:?}")),
                            Err(e) => failures.push(format!("{what}: {e}")),
                        }
                    }
                    if alt {
                        let ok = match b.family {
                            Family::Zero => is_jordan_shaped(&sq, 1e-10),
                            Family::PositiveReal => norm(&(&sq - jordan(b.lambda_sq, k))) <= 1e-10,
                            _ => {
                                let want = crate::linalg::block_diag(&[jordan(b.lambda_sq, k), jordan(b.lambda_sq.conj(), k)]);
                                norm(&(&sq - want)) <= 1e-10 * norm(&sq).max(1.0)
                            }
                        };
                        if !ok {
                            failures.push(format!("{what}: square is not the Jordan matrix"));
                        }
                    }
                }
            }
        }
    }
    Outcome {
        id: 6,
        name: "atlas validity",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checked} atlas pairs valid with the expected Jordan structure of the square (≤ 1e-10)")
        } else {
            format!("{} of {checked} failed; first: {}", failures.len(), failures[0])
        },
    }
}

/// Sorted `(family, k, λ²)` data without signs.
fn unsigned(blocks: &[CanonicalBlock]) -> Vec<CanonicalBlock> {
    blocks.iter().map(|b| CanonicalBlock { epsilon: 1, ..*b }).collect()
}

/// Random operator: dense entries for even trials, the operator part of a
/// generated pair for odd ones.
fn random_operator<R: Rng>(trial: usize, rng: &mut R, tol: &ToleranceConfig) -> Result<CMatrix> {
    let n = rng.gen_range(1..=6);
    if trial % 2 == 0 {
        Ok(CMatrix::from_fn(n, n, |_, _| cx(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))))
    } else {
        let spec = random_spectrum_spec(n, 3, rng);
        Ok(random_canonical_pair(n, &spec, Some(rng.gen()), tol)?.pair.c().clone())
    }
}

pub fn operator_consistency(trials: usize, seed: u64, tol: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0;
    let mut first_failure = None;
    for t in 0..trials {
        let res = random_operator(t, &mut rng, tol).and_then(|c| {
            let op = AntilinearOperator::new(c.clone())?;
            let f = canonicalize_operator(&op, tol)?;
            let h = witness_form(&op, tol)?;
            let p = validate_pair(h.matrix(), &c, tol)?;
            let g = canonicalize_pair(&p, tol)?;
            let mut a = unsigned(&f.blocks);
            let mut b = unsigned(&g.blocks);
            a.sort_by(crate::atlas::compare_blocks);
            b.sort_by(crate::atlas::compare_blocks);
            Ok((same_blocks(&a, &b, tol) && f.residuals.pass, f.blocks, g.blocks))
        });
        match res {
            Ok((true, _, _)) => agree += 1,
            Ok((false, a, b)) => {
                first_failure.get_or_insert(format!("trial {t}: operator {a:?} vs pair {b:?}"));
            }
            Err(e) => {
                first_failure.get_or_insert(format!("trial {t}: {e}"));
            }
        }
    }
    let mut detail = format!("{agree}/{trials} operators gave matching (λ, k) multisets");
    if let Some(f) = first_failure {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Outcome { id: 7, name: "operator-only consistency", pass: agree == trials, detail }
}

/// Random spec without zero blocks.
fn nonsingular_spec<R: Rng>(rng: &mut R) -> SpectrumSpec {
    loop {
        let n = rng.gen_range(1..=8);
        let s = random_spectrum_spec(n, 3, rng);
        if s.blocks.iter().all(|b| b.family != Family::Zero) {
            return s;
        }
    }
}

pub fn glr_consistency(trials: usize, seed: u64, tol: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0;
    let mut first_failure = None;
    for t in 0..trials {
        let spec = nonsingular_spec(&mut rng);
        let s = rng.gen::<u64>();
        let res = random_canonical_pair(spec.dim(), &spec, Some(s), tol).and_then(|g| {
            let f = canonicalize_pair(&g.pair, tol)?;
            let want = square_blocks(&f.blocks)?;
            let got = glr_of_pair(&g.pair, tol)?;
            Ok((same_glr_blocks(&got.blocks, &want, tol) && got.residuals.pass, got.blocks, want))
        });
        match res {
            Ok((true, _, _)) => agree += 1,
            Ok((false, got, want)) => {
                first_failure.get_or_insert(format!("trial {t} spec {spec}: glr {got:?} vs mapped {want:?}"));
            }
            Err(e) => {
                first_failure.get_or_insert(format!("trial {t} spec {spec}: {e}"));
            }
        }
    }
    let mut detail = format!("{agree}/{trials} nonsingular pairs mapped block-for-block onto the form of (ℓ, A²)");
    if let Some(f) = first_failure {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Outcome { id: 8, name: "square-operator consistency", pass: agree == trials, detail }
}

/// `√2 sin((2k + 1)π/4)`, which is `(−1)^{k(k−1)/2}`.
pub fn hankel_sign(k: usize) -> f64 {
    std::f64::consts::SQRT_2 * ((2 * k + 1) as f64 * std::f64::consts::FRAC_PI_4).sin()
}

pub fn hankel_determinant(kmax: usize, seed: u64, tol: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for k in 1..=kmax {
        let eps: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let lambda = rng.gen_range(0.5..2.5);
        let res = (|| -> Result<f64> {
            let b = CanonicalBlock::positive(lambda, k, eps)?;
            let (h, c) = build_pair_block(&b)?;
            let m = random_transition(k, &mut rng);
            let p = apply_basis_change(&validate_pair(&h, &c, tol)?, &m, tol)?;
            let (_, trace) = positive_chain_trace(&p, tol)?;
            let det = trace.gram.clone().determinant();
            let h0 = trace.hankel[0];
            let want = hankel_sign(k) * h0.powi(k as i32);
            Ok((det - cx(want, 0.0)).norm() / want.abs())
        })();
        match res {
            Ok(r) => {
                worst = worst.max(r);
                if !(r <= 1e-8) {
                    failures.push(format!("k = {k}: relative error {r:.2e}"));
                }
            }
            Err(e) => failures.push(format!("k = {k}: {e}")),
        }
    }
    let mut detail = format!("k = 1..{kmax}: worst relative error {worst:.2e} (≤ 1e-8)");
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    Outcome { id: 9, name: "anti-triangular Hankel determinant", pass: failures.is_empty(), detail }
}

pub fn scalar_oracle(trials: usize, seed: u64, tol: &ToleranceConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = 0;
    let mut first_failure = None;
    for t in 0..trials {
        let mag = 10f64.powf(rng.gen_range(-1.0..1.0));
        let h = if rng.gen_bool(0.5) { mag } else { -mag };
        let c = if rng.gen_bool(0.1) {
            cx(0.0, 0.0)
        } else {
            Complex64::from_polar(10f64.powf(rng.gen_range(-1.0..1.0)), rng.gen_range(0.0..std::f64::consts::TAU))
        };
        let res = (|| -> Result<bool> {
            let want = brute_force_1d_oracle(h, c)?;
            let p = validate_pair(&from_real_rows(&[&[h]]), &CMatrix::from_element(1, 1, c), tol)?;
            let f = canonicalize_pair(&p, tol)?;
            let got = f.blocks.first().copied();
            Ok(f.blocks.len() == 1
                && got.is_some_and(|g| {
                    g.family == want.family
                        && g.k == want.k
                        && g.epsilon == want.epsilon
                        && (g.lambda - want.lambda).norm() <= 4.0 * f64::EPSILON * want.lambda.norm()
                }))
        })();
        match res {
            Ok(true) => agree += 1,
            Ok(false) => {
                first_failure.get_or_insert(format!("trial {t}: (h, c) = ({h}, {c})"));
            }
            Err(e) => {
                first_failure.get_or_insert(format!("trial {t}: {e}"));
            }
        }
    }
    let mut detail = format!("{agree}/{trials} scalar pairs matched the closed-form orbit");
    if let Some(f) = first_failure {
        detail.push_str(&format!("; first failure: {f}"));
    }
    Outcome { id: 10, name: "scalar oracle agreement", pass: agree == trials, detail }
}

/// Trial counts of the full acceptance run.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSize {
    pub roundtrip: usize,
    pub orbit_bases: usize,
    pub orbit_conjugates: usize,
    pub operators: usize,
    pub glr: usize,
    pub scalars: usize,
}

impl SuiteSize {
    pub const FULL: SuiteSize =
        SuiteSize { roundtrip: 500, orbit_bases: 100, orbit_conjugates: 10, operators: 200, glr: 100, scalars: 1000 };
}

/// All ten criteria in order.
pub fn run_all(size: SuiteSize, seed: u64, tol: &ToleranceConfig) -> Vec<Outcome> {
    let (c1, t1) = roundtrip(size.roundtrip, seed, tol);
    let (c2, t2) = orbit_invariance(size.orbit_bases, size.orbit_conjugates, seed.wrapping_add(1), tol);
    let c3 = signature_conservation(&[t1, t2]);
    vec![
        c1,
        c2,
        c3,
        catalan_suite(),
        explicit_t_check(tol),
        atlas_validity(8, tol),
        operator_consistency(size.operators, seed.wrapping_add(2), tol),
        glr_consistency(size.glr, seed.wrapping_add(3), tol),
        hankel_determinant(8, seed.wrapping_add(4), tol),
        scalar_oracle(size.scalars, seed.wrapping_add(5), tol),
    ]
}
