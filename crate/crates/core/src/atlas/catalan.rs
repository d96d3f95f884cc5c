//! Coefficients of the Toeplitz square root `Σ c_i(λ) T^i` of `J_{λ², k}`.
//!
//! Recurrence: `c_0 = λ`, `c_1 = 1/(2λ)`, `c_i = −(1/(2λ)) Σ_{j=1}^{i−1} c_j c_{i−j}`.
//! Closed form for `i ≥ 1`: `c_i = (−1)^{i+1} (2λ)^{1−2i} binom(2i−2, i−1) / i`,
//! so `|c_i(1/2)|` runs through the Catalan numbers `1, 1, 2, 5, 14, 42, …`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{PairError, Result};

/// Exact recurrence in rational arithmetic.
pub fn catalan_exact(lambda: &BigRational, count: usize) -> Result<Vec<BigRational>> {
    if lambda.is_zero() {
        return Err(PairError::InvalidArgument("Catalan coefficients need λ ≠ 0".into()));
    }
    let mut c: Vec<BigRational> = Vec::with_capacity(count);
    let two_l = lambda * BigRational::from_integer(BigInt::from(2));
    for i in 0..count {
        let v = match i {
            0 => lambda.clone(),
            1 => two_l.recip(),
            _ => {
                let mut s = BigRational::zero();
                for j in 1..i {
                    s += &c[j] * &c[i - j];
                }
                -(s / &two_l)
            }
        };
        c.push(v);
    }
    Ok(c)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Exact closed form for `i ≥ 1`; `i = 0` returns `λ`.
pub fn catalan_closed_form_exact(lambda: &BigRational, i: usize) -> Result<BigRational> {
    if lambda.is_zero() {
        return Err(PairError::InvalidArgument("Catalan coefficients need λ ≠ 0".into()));
    }
    if i == 0 {
        return Ok(lambda.clone());
    }
    let two_l = lambda * BigRational::from_integer(BigInt::from(2));
    let pow = num_traits::pow(two_l.recip(), 2 * i - 1);
    let b = BigRational::new(binomial(2 * i as u64 - 2, i as u64 - 1), BigInt::from(i));
    let sign = if i % 2 == 1 { BigRational::one() } else { -BigRational::one() };
    Ok(sign * pow * b)
}

/// Float closed form, for complex `λ`.
pub fn catalan_closed_form(lambda: Complex64, i: usize) -> Result<Complex64> {
    if lambda.norm() == 0.0 {
        return Err(PairError::InvalidArgument("Catalan coefficients need λ ≠ 0".into()));
    }
    if i == 0 {
        return Ok(lambda);
    }
    let b = binomial(2 * i as u64 - 2, i as u64 - 1).to_f64().unwrap_or(f64::INFINITY) / i as f64;
    let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
    Ok((lambda * 2.0).powi(1 - 2 * i as i32) * (sign * b))
}

/// `c_0..c_{count−1}`. Real `λ` (every finite double is a dyadic rational)
/// goes through the exact path and is rounded once at the end.
pub fn catalan_coefficients(lambda: Complex64, count: usize) -> Result<Vec<Complex64>> {
    if lambda.norm() == 0.0 || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(PairError::InvalidArgument("Catalan coefficients need finite λ ≠ 0".into()));
    }
    if lambda.im == 0.0 {
        let q = BigRational::from_float(lambda.re)
            .ok_or_else(|| PairError::InvalidArgument("λ not representable".into()))?;
        return Ok(catalan_exact(&q, count)?
            .iter()
            .map(|x| Complex64::new(rational_to_f64(x), 0.0))
            .collect());
    }
    let two_l = lambda * 2.0;
    let mut c: Vec<Complex64> = Vec::with_capacity(count);
    for i in 0..count {
        let v = match i {
            0 => lambda,
            1 => two_l.inv(),
            _ => {
                let s: Complex64 = (1..i).map(|j| c[j] * c[i - j]).sum();
                -s / two_l
            }
        };
        c.push(v);
    }
    Ok(c)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    // Scale to keep both parts in range before dividing.
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = x.denom().bits().max(x.numer().bits()) as i64 - 900;
            let sh = shift.max(0) as usize;
            let n = (x.numer() >> sh).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> sh).to_f64().unwrap_or(1.0);
            if x.is_negative() && n > 0.0 {
                -n / d
            } else {
                n / d
            }
        }
    }
}

/// Exact `k×k` upper Toeplitz matrix `Σ a_i T^i`.
pub fn exact_toeplitz(coeffs: &[BigRational], k: usize) -> Vec<Vec<BigRational>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if j >= i && j - i < coeffs.len() { coeffs[j - i].clone() } else { BigRational::zero() })
                .collect()
        })
        .collect()
}

pub fn exact_matmul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = BigRational::zero();
                    for t in 0..inner {
                        s += &a[i][t] * &b[t][j];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Exact `J_{μ,k}`.
pub fn exact_jordan(mu: &BigRational, k: usize) -> Vec<Vec<BigRational>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        mu.clone()
                    } else if j == i + 1 {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect()
}
