//! Acceptance run. Prints one line per criterion, then asserts all of them.
//!
//! Each criterion whose reference values could be produced by the library
//! itself is cross-checked here against an oracle computed by other means.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use pairform::atlas::catalan::catalan_exact;
use pairform::atlas::{CanonicalBlock, Family};
use pairform::harness::{brute_force_1d_oracle, suite};
use pairform::ToleranceConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Coefficients of `sqrt(λ² + t) = Σ binom(1/2, i) λ^{1−2i} t^i`.
fn binomial_series(lambda: &BigRational, count: usize) -> Vec<BigRational> {
    let half = q(1, 2);
    let mut out = Vec::with_capacity(count);
    let mut gen_binom = BigRational::one();
    for i in 0..count {
        if i > 0 {
            gen_binom = gen_binom * (&half - q(i as i64 - 1, 1)) / q(i as i64, 1);
        }
        let mut pow = BigRational::one();
        let e = 1 - 2 * i as i64;
        for _ in 0..e.unsigned_abs() {
            pow *= lambda;
        }
        let lam_pow = if e >= 0 { pow } else { pow.recip() };
        out.push(&gen_binom * lam_pow);
    }
    out
}

/// Catalan numbers from the convolution recurrence.
fn catalan_numbers(count: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::one()];
    while c.len() < count {
        let n = c.len();
        let next = (0..n).fold(BigInt::zero(), |acc, i| acc + &c[i] * &c[n - 1 - i]);
        c.push(next);
    }
    c
}

fn catalan_oracle() -> bool {
    let mut ok = true;
    for lam in [q(1, 1), q(1, 2), q(3, 1)] {
        let lib = catalan_exact(&lam, 13).expect("recurrence");
        ok &= lib == binomial_series(&lam, 13);
    }
    let lib = catalan_exact(&q(1, 2), 7).expect("recurrence");
    let cat = catalan_numbers(6);
    ok && (1..=6).all(|i| lib[i].abs() == BigRational::from_integer(cat[i - 1].clone()))
}

fn explicit_t_oracle() -> bool {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let typed = [
        [r, r, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, r, r, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, r, r],
        [-r, r, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -r, r, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -r, r],
    ];
    let t = suite::explicit_t();
    (0..6).all(|i| (0..6).all(|j| t[(i, j)] == Complex64::new(typed[i][j], 0.0)))
}

fn hankel_sign_oracle() -> bool {
    (1..=8).all(|k: usize| {
        let want = if (k * (k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        (suite::hankel_sign(k) - want).abs() <= 1e-12
    })
}

fn scalar_oracle() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    (0..1000).all(|t| {
        let h: f64 = rng.gen_range(-3.0..3.0);
        let h = if h == 0.0 { 1.0 } else { h };
        let c = if t % 10 == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        };
        let b: CanonicalBlock = brute_force_1d_oracle(h, c).expect("oracle");
        let sign = if h > 0.0 { 1 } else { -1 };
        let fam = if c.norm() == 0.0 { Family::Zero } else { Family::PositiveReal };
        b.family == fam && b.k == 1 && b.epsilon == sign && b.lambda == Complex64::new(c.norm(), 0.0)
    })
}

#[test]
fn acceptance() {
    let tol = ToleranceConfig::default();
    let outcomes = suite::run_all(suite::SuiteSize::FULL, 1, &tol);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let oracles = [
        ("binomial series and Catalan convolution", catalan_oracle()),
        ("explicit T as typed", explicit_t_oracle()),
        ("Hankel sign", hankel_sign_oracle()),
        ("inline scalar orbit formula", scalar_oracle()),
    ];
    for (name, ok) in &oracles {
        println!("[{}] oracle {name}", if *ok { "PASS" } else { "FAIL" });
    }
    assert_eq!(outcomes.len(), 10);
    assert!(outcomes.iter().all(|o| o.pass), "acceptance criteria failed");
    assert!(oracles.iter().all(|(_, ok)| *ok), "independent oracle disagreed");
}
