use num_complex::Complex64;

use super::{anti, check_chain, complement_of, ell, real_parts_ok, single_cluster, ChainBasis};
use crate::atlas::{toeplitz, CanonicalBlock, Family};
use crate::error::{PairError, Result};
use crate::glr::glr_seed_vector;
use crate::linalg::{cx, hermitian_diagonalize, norm, solve, CMatrix, CVector};
use crate::pair::SelfAdjointPair;
use crate::spectral::{real_kernel_local, SubspaceBasis};
use crate::tolerance::ToleranceConfig;

/// Intermediate quantities of the positive-case construction.
#[derive(Debug, Clone)]
pub struct PositiveTrace {
    /// Fourier coefficients `(a₀, a₁, b₁)` of `2·ℓ(v_θ, (A−λ)^{k−1} v_θ)`.
    pub fourier: (f64, f64, f64),
    /// Largest imaginary part seen in the Fourier coefficients, relative.
    pub fourier_imag: f64,
    pub theta: f64,
    /// Whether the Fourier seed fell below the floor and the fallback ran.
    pub used_fallback: bool,
    /// Gram matrix of the chain before the Toeplitz rescale.
    pub gram: CMatrix,
    /// Hankel values `h_0..h_{k−1}` read off the Gram matrix.
    pub hankel: Vec<f64>,
    pub alphas: Vec<f64>,
}

/// `θ` maximizing `|a₀ + a₁ cos 2θ + b₁ sin 2θ|`, with value `|a₀| + √(a₁² + b₁²)`.
/// A 64-point grid is used only when the closed form underperforms it.
pub fn fourier_seed_angle(a0: f64, a1: f64, b1: f64) -> Result<(f64, f64)> {
    let f = |t: f64| a0 + a1 * (2.0 * t).cos() + b1 * (2.0 * t).sin();
    let amp = a1.hypot(b1);
    if a0.abs() + amp == 0.0 || !(a0.is_finite() && amp.is_finite()) {
        return Err(PairError::Numerical("Fourier coefficients vanish".into()));
    }
    let phi = b1.atan2(a1);
    let two_theta = if a0 >= 0.0 { phi } else { phi + std::f64::consts::PI };
    let mut theta = (two_theta / 2.0).rem_euclid(std::f64::consts::PI);
    let mut best = f(theta).abs();
    for i in 0..64 {
        let t = std::f64::consts::PI * i as f64 / 64.0;
        if f(t).abs() > best * (1.0 + 1e-12) {
            best = f(t).abs();
            theta = t;
        }
    }
    Ok((theta, best))
}

/// Real upper Toeplitz coefficients `α` with `Σ_{r+s+t=i} α_r α_s h_t = ±δ_{i0}`.
pub fn toeplitz_rescale(h: &[f64]) -> Result<(Vec<f64>, i8)> {
    let k = h.len();
    if k == 0 || h[0] == 0.0 || !h[0].is_finite() {
        return Err(PairError::Numerical("Toeplitz rescale needs h₀ ≠ 0".into()));
    }
    let mut a = vec![0.0; k];
    a[0] = h[0].abs().powf(-0.5);
    for i in 1..k {
        let mut rest = 0.0;
        for r in 0..=i {
            for s in 0..=(i - r) {
                rest += a[r] * a[s] * h[i - r - s];
            }
        }
        a[i] = -rest / (2.0 * a[0] * h[0]);
    }
    Ok((a, if h[0] > 0.0 { 1 } else { -1 }))
}

/// `(A − λ) v`.
fn shifted(c: &CMatrix, lambda: f64, v: &CVector) -> CVector {
    anti(c, v) - v * cx(lambda, 0.0)
}

fn shifted_pow(c: &CMatrix, lambda: f64, v: &CVector, p: usize) -> CVector {
    let mut out = v.clone();
    for _ in 0..p {
        out = shifted(c, lambda, &out);
    }
    out
}

/// Chain for one positive block of size `k` on a single-cluster local pair.
pub(crate) fn positive_chain(h: &CMatrix, c: &CMatrix, lambda: f64, k: usize, tol: &ToleranceConfig) -> Result<ChainBasis> {
    Ok(positive_chain_impl(h, c, lambda, k, tol)?.0)
}

fn positive_chain_impl(
    h: &CMatrix,
    c: &CMatrix,
    lambda: f64,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<(ChainBasis, PositiveTrace)> {
    let r = h.nrows();
    let b = c * crate::linalg::conj(c);
    let nb = &b - CMatrix::identity(r, r) * cx(lambda * lambda, 0.0);
    let kmat = crate::linalg::matrix_power(&nb, k - 1);
    let seed = glr_seed_vector(h, &b, cx(lambda * lambda, 0.0), k, tol)?;

    let real = real_kernel_local(c, lambda, k, tol)?;
    if real.ncols() != r {
        return Err(PairError::Numerical(format!(
            "real filtration has dimension {} instead of {r}",
            real.ncols()
        )));
    }
    let coef = solve(&real, &CMatrix::from_column_slice(r, 1, seed.as_slice()))?;
    let re = CVector::from_iterator(r, coef.column(0).iter().map(|z| cx(z.re, 0.0)));
    let im = CVector::from_iterator(r, coef.column(0).iter().map(|z| cx(z.im, 0.0)));
    let vp = &real * re;
    let vm = &real * im;
    let pform = |x: &CVector, y: &CVector| ell(h, x, &shifted_pow(c, lambda, y, k - 1));
    let ppp = pform(&vp, &vp);
    let pmm = pform(&vm, &vm);
    let ppm = pform(&vp, &vm);
    let pmp = pform(&vm, &vp);
    let a0c = ppp + pmm;
    let a1c = ppp - pmm;
    let b1c = -(ppm + pmp);
    let mag = a0c.norm().max(a1c.norm()).max(b1c.norm());
    let fourier_imag = if mag == 0.0 { 0.0 } else { a0c.im.abs().max(a1c.im.abs()).max(b1c.im.abs()) / mag };
    if !real_parts_ok(&[a0c, a1c, b1c], mag, tol.verify_tol) {
        log::warn!("Fourier coefficients not real: relative imaginary part {fourier_imag:.2e}");
    }
    let hs = norm(h) * norm(&kmat).max(1.0);
    let floor = tol.rank_tol * hs * (vp.norm_squared() + vm.norm_squared()).max(f64::MIN_POSITIVE);
    let mut used_fallback = false;
    let (theta, top) = match fourier_seed_angle(a0c.re, a1c.re, b1c.re) {
        Ok((t, _)) => {
            let v = &vp * cx(t.cos(), 0.0) - &vm * cx(t.sin(), 0.0);
            let val = pform(&v, &v);
            if val.norm() >= floor {
                (t, v)
            } else {
                used_fallback = true;
                (t, fallback_seed(&pform, &real)?)
            }
        }
        Err(_) => {
            used_fallback = true;
            (0.0, fallback_seed(&pform, &real)?)
        }
    };

    // chain f_j = (A − λ)^{k−j} v, columns j = 1..k
    let mut f = CMatrix::zeros(r, k);
    let mut cur = top.clone();
    for j in (0..k).rev() {
        f.set_column(j, &cur);
        cur = shifted(c, lambda, &cur);
    }
    let gram = f.adjoint() * h * &f;
    let gscale = norm(&gram).max(f64::MIN_POSITIVE);
    // anti-diagonal t (t = i + j + 1 − k ≥ 0) carries h_t; the last row lists them all
    let hankel: Vec<f64> = (0..k).map(|t| gram[(k - 1, t)].re).collect();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let g: Complex64 = gram[(i, j)];
            let want = if i + j + 1 >= k { cx(hankel[i + j + 1 - k], 0.0) } else { cx(0.0, 0.0) };
            worst = worst.max((g - want).norm());
        }
    }
    if worst > tol.verify_tol * gscale {
        return Err(PairError::Numerical(format!("chain Gram matrix not Hankel ({:.2e})", worst / gscale)));
    }
    let (alphas, eps) = toeplitz_rescale(&hankel)?;
    let acoef: Vec<Complex64> = alphas.iter().map(|&a| cx(a, 0.0)).collect();
    let e = &f * toeplitz(&acoef, k);
    let block = CanonicalBlock::positive(lambda, k, eps)?;
    check_chain(h, c, &e, &block, tol, "positive")?;
    let trace = PositiveTrace {
        fourier: (a0c.re, a1c.re, b1c.re),
        fourier_imag,
        theta,
        used_fallback,
        gram,
        hankel,
        alphas,
    };
    Ok((ChainBasis { vectors: e, block }, trace))
}

/// Top eigenvector of the real symmetric matrix `Re P(r_i, r_j)` on the real basis.
fn fallback_seed<F: Fn(&CVector, &CVector) -> Complex64>(pform: &F, real: &CMatrix) -> Result<CVector> {
    let r = real.ncols();
    let cols: Vec<CVector> = (0..r).map(|j| real.column(j).into_owned()).collect();
    let m = CMatrix::from_fn(r, r, |i, j| cx(0.5 * (pform(&cols[i], &cols[j]).re + pform(&cols[j], &cols[i]).re), 0.0));
    let (u, d) = hermitian_diagonalize(&m, &ToleranceConfig { verify_tol: f64::INFINITY, ..Default::default() })?;
    let idx = if d[0].abs() >= d[r - 1].abs() { 0 } else { r - 1 };
    if d[idx] == 0.0 {
        return Err(PairError::Numerical("no seed with nonzero pairing in the real filtration".into()));
    }
    Ok(real * u.column(idx).map(|z| cx(z.re, 0.0)))
}

/// Peel the largest positive block off a pair whose space is one `λ² > 0` cluster.
pub fn normalize_positive(p: &SelfAdjointPair, tol: &ToleranceConfig) -> Result<(ChainBasis, SubspaceBasis)> {
    let cl = single_cluster(p, Family::PositiveReal, tol)?;
    let k = cl.block_sizes[0].0;
    let chain = positive_chain(p.h(), p.c(), cl.lambda.re, k, tol)?;
    let comp = complement_of(p, &chain)?;
    Ok((chain, comp))
}

/// Like [`normalize_positive`] but also returns the intermediate quantities.
pub fn positive_chain_trace(p: &SelfAdjointPair, tol: &ToleranceConfig) -> Result<(ChainBasis, PositiveTrace)> {
    let cl = single_cluster(p, Family::PositiveReal, tol)?;
    let k = cl.block_sizes[0].0;
    positive_chain_impl(p.h(), p.c(), cl.lambda.re, k, tol)
}
