//! Canonical form of a Hermitian form together with a self-adjoint *linear*
//! operator `B`: blocks `±S_k` with `J_{η,k}` for real `η`, and `S_{2k}` with
//! `J_{η,k} ⊕ J_{conj η,k}` for nonreal `η`.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;

use crate::atlas::{jordan, sip, CanonicalBlock, Family};
use crate::canonical::ResidualReport;
use crate::error::{PairError, Result};
use crate::linalg::{
    block_diag, conj, cx, hermitian_diagonalize, hstack, inverse, kernel_with_dim, matrix_power, norm,
    require_square, schur, svd, CMatrix, CVector,
};
use crate::normalizers::{apply_pow, ell, solve_affine};
use crate::pair::HermitianForm;
use crate::spectral::{cluster_values, invariant_basis, nilpotent_sizes, spectral_scale, staircase};
use crate::tolerance::ToleranceConfig;

/// One block of the form; nonreal `eta` is stored with `Im η > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlrBlock {
    pub eta: Complex64,
    pub k: usize,
    /// Always `+1` for nonreal `η`.
    pub epsilon: i8,
}

impl GlrBlock {
    pub fn is_real(&self) -> bool {
        self.eta.im == 0.0
    }

    pub fn dim(&self) -> usize {
        if self.is_real() {
            self.k
        } else {
            2 * self.k
        }
    }

    /// `(ε S, J)` for this block.
    pub fn matrices(&self) -> (CMatrix, CMatrix) {
        let h = sip(self.dim()) * cx(self.epsilon as f64, 0.0);
        let b = if self.is_real() {
            jordan(self.eta, self.k)
        } else {
            block_diag(&[jordan(self.eta, self.k), jordan(self.eta.conj(), self.k)])
        };
        (h, b)
    }
}

impl fmt::Display for GlrBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(η={:.6}{:+.6}i, k={}, ε={:+})", self.eta.re, self.eta.im, self.k, self.epsilon)
    }
}

/// Order by `(Re η, Im η, k descending, ε descending)`.
pub fn compare_glr(a: &GlrBlock, b: &GlrBlock) -> Ordering {
    a.eta
        .re
        .total_cmp(&b.eta.re)
        .then(a.eta.im.total_cmp(&b.eta.im))
        .then(b.k.cmp(&a.k))
        .then(b.epsilon.cmp(&a.epsilon))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlrForm {
    pub blocks: Vec<GlrBlock>,
    /// `M` with `(M⁻¹)* H M⁻¹` and `M B M⁻¹` block diagonal.
    pub transition: CMatrix,
    /// `h_residual` is for `H`, `c_residual` for `B`.
    pub residuals: ResidualReport,
}

impl GlrForm {
    pub fn assembled(&self) -> (CMatrix, CMatrix) {
        let (hs, bs): (Vec<CMatrix>, Vec<CMatrix>) = self.blocks.iter().map(|b| b.matrices()).unzip();
        (block_diag(&hs), block_diag(&bs))
    }
}

/// The blocks of `(ℓ, A²)` implied by the canonical blocks of a pair with
/// nonsingular `A`: a positive block keeps its sign, a negative block yields
/// both signs, a nonreal block yields one `+` block of width `2k`.
pub fn square_blocks(blocks: &[CanonicalBlock]) -> Result<Vec<GlrBlock>> {
    let mut out = Vec::new();
    for b in blocks {
        match b.family {
            Family::PositiveReal => out.push(GlrBlock { eta: b.lambda_sq, k: b.k, epsilon: b.epsilon }),
            Family::Negative => {
                out.push(GlrBlock { eta: b.lambda_sq, k: b.k, epsilon: 1 });
                out.push(GlrBlock { eta: b.lambda_sq, k: b.k, epsilon: -1 });
            }
            Family::Nonreal => out.push(GlrBlock { eta: b.lambda_sq, k: b.k, epsilon: 1 }),
            Family::Zero => {
                return Err(PairError::InvalidArgument("square blocks need a nonsingular operator".into()))
            }
        }
    }
    out.sort_by(compare_glr);
    Ok(out)
}

/// Equal block lists with `η` compared to `verify_tol` relative.
pub fn same_glr_blocks(a: &[GlrBlock], b: &[GlrBlock], tol: &ToleranceConfig) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.k == y.k
                && x.epsilon == y.epsilon
                && x.is_real() == y.is_real()
                && (x.eta - y.eta).norm() <= tol.verify_tol * x.eta.norm().max(1.0)
        })
}

/// A vector `v′` in `ker (B − λ²)^{s₁}` with `ℓ(v′, (B − λ²)^{s₁−1} v′)` above
/// `rank_tol · ‖H‖ · ‖v′‖²`. Candidates are eigenvectors of the Hermitian form
/// `v ↦ ℓ(v, (B − λ²)^{s₁−1} v)` on that kernel, largest `|eigenvalue|` first.
pub fn glr_seed_vector(h: &CMatrix, b: &CMatrix, lambda_sq: Complex64, s1: usize, tol: &ToleranceConfig) -> Result<CVector> {
    let n = require_square(b)?;
    if s1 == 0 {
        return Err(PairError::InvalidArgument("s₁ must be at least 1".into()));
    }
    let nmat = b - CMatrix::identity(n, n) * lambda_sq;
    let thresh = tol.cluster_tol * norm(b).max(1.0);
    let levels = staircase(&nmat, false, thresh, s1)?;
    let z = match levels.last() {
        Some(z) => z.clone(),
        None => return Err(PairError::InvalidArgument(format!("λ² = {lambda_sq} is not an eigenvalue"))),
    };
    let kmat = matrix_power(&nmat, s1 - 1);
    let g = z.adjoint() * h * &kmat * &z;
    let g = (&g + g.adjoint()) * cx(0.5, 0.0);
    let loose = ToleranceConfig { verify_tol: f64::INFINITY, ..*tol };
    let (u, d) = hermitian_diagonalize(&g, &loose)?;
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &c| d[c].abs().total_cmp(&d[a].abs()));
    let floor = tol.rank_tol * norm(h);
    for i in order {
        let v: CVector = &z * u.column(i);
        let pairing = ell(h, &v, &(&kmat * &v));
        if pairing.norm() >= floor * v.norm_squared() {
            return Ok(v);
        }
    }
    Err(PairError::Numerical(format!("no seed vector for λ² = {lambda_sq}, s₁ = {s1}")))
}

fn check_glr_chain(h: &CMatrix, b: &CMatrix, e: &CMatrix, blk: &GlrBlock, tol: &ToleranceConfig) -> Result<()> {
    let (th, tb) = blk.matrices();
    let en = norm(e).max(1.0);
    let rg = norm(&(e.adjoint() * h * e - th)) / (norm(h).max(f64::MIN_POSITIVE) * en * en);
    let rb = norm(&(b * e - e * tb)) / (norm(b).max(1.0) * en);
    if !(rg <= tol.verify_tol && rb <= tol.verify_tol) {
        return Err(PairError::Numerical(format!("GLR chain residuals too large (Gram {rg:.2e}, operator {rb:.2e})")));
    }
    Ok(())
}

/// Chain for one real-`η` block of size `k` on a local space where `B − η`
/// is nilpotent of index `≤ k`.
fn real_chain(h: &CMatrix, b: &CMatrix, eta: f64, k: usize, tol: &ToleranceConfig) -> Result<(CMatrix, GlrBlock)> {
    let r = h.nrows();
    let n = b - CMatrix::identity(r, r) * cx(eta, 0.0);
    let u = glr_seed_vector(h, b, cx(eta, 0.0), k, tol)?;
    let kmat = matrix_power(&n, k - 1);
    let d = ell(h, &u, &(&kmat * &u)).re;
    let x0 = &u * cx(d.abs().powf(-0.5), 0.0);
    let eps: i8 = if d > 0.0 { 1 } else { -1 };
    let mut x = x0.clone();
    for m in 1..k {
        let p = k - 1 - m;
        let dir = apply_pow(&n, &x0, m);
        let base = x.clone();
        let f = |v: &[f64]| -> Vec<f64> {
            let y = &base + &dir * Complex64::new(v[0], v[1]);
            vec![ell(h, &apply_pow(&n, &y, p), &y).re]
        };
        let a = solve_affine(f, 2)?;
        x = &base + &dir * Complex64::new(a[0], a[1]);
    }
    let mut e = CMatrix::zeros(r, k);
    let mut cur = x;
    for j in (0..k).rev() {
        e.set_column(j, &cur);
        cur = &n * cur;
    }
    let blk = GlrBlock { eta: cx(eta, 0.0), k, epsilon: eps };
    check_glr_chain(h, b, &e, &blk, tol)?;
    Ok((e, blk))
}

/// Chain pair for one nonreal block; the local space carries `η` and `conj η`.
fn pair_chain(h: &CMatrix, b: &CMatrix, eta: Complex64, k: usize, tol: &ToleranceConfig) -> Result<(CMatrix, GlrBlock)> {
    let r = h.nrows();
    let id = CMatrix::identity(r, r);
    let n = b - &id * eta;
    let nb = b - &id * eta.conj();
    let (zx, _) = kernel_with_dim(&matrix_power(&n, k), r / 2)?;
    let (zy, _) = kernel_with_dim(&matrix_power(&nb, k), r / 2)?;
    let kmat = matrix_power(&n, k - 1);
    // ℓ(K x, y) = y* H K x
    let q = zy.adjoint() * h * &kmat * &zx;
    let sv = svd(&q)?;
    let s1 = sv.s[0];
    if s1 <= tol.rank_tol * norm(h) * norm(&kmat).max(1.0) {
        return Err(PairError::Numerical(format!("no pairing seed at η = {eta}")));
    }
    let x: CVector = &zx * sv.v.column(0);
    let y0: CVector = &zy * sv.u.column(0) / cx(s1, 0.0);
    let mut y = y0.clone();
    for m in 1..k {
        let p = k - 1 - m;
        let dir = apply_pow(&nb, &y0, m);
        let base = y.clone();
        let xp = apply_pow(&n, &x, p);
        let f = |v: &[f64]| -> Vec<f64> {
            let yy = &base + &dir * Complex64::new(v[0], v[1]);
            let t = ell(h, &xp, &yy);
            vec![t.re, t.im]
        };
        let a = solve_affine(f, 2)?;
        y = &base + &dir * Complex64::new(a[0], a[1]);
    }
    let mut fx = CMatrix::zeros(r, k);
    let mut fy = CMatrix::zeros(r, k);
    let (mut cx_, mut cy_) = (x, y);
    for j in (0..k).rev() {
        fx.set_column(j, &cx_);
        fy.set_column(j, &cy_);
        cx_ = &n * cx_;
        cy_ = &nb * cy_;
    }
    let e = hstack(&[fx, fy]);
    let blk = GlrBlock { eta, k, epsilon: 1 };
    check_glr_chain(h, b, &e, &blk, tol)?;
    Ok((e, blk))
}

/// Peel all blocks of one local space.
fn peel(
    h: &CMatrix,
    b: &CMatrix,
    eta: Complex64,
    sizes: &[(usize, usize)],
    tol: &ToleranceConfig,
) -> Result<Vec<(GlrBlock, CMatrix)>> {
    let d = h.nrows();
    let mut y = CMatrix::identity(d, d);
    let mut out = Vec::new();
    for k in sizes.iter().flat_map(|&(k, r)| std::iter::repeat(k).take(r)) {
        let hy = y.adjoint() * h * &y;
        let by = y.adjoint() * b * &y;
        let (e, blk) = if eta.im == 0.0 { real_chain(&hy, &by, eta.re, k, tol)? } else { pair_chain(&hy, &by, eta, k, tol)? };
        let rest = y.ncols() - e.ncols();
        let comp = if rest > 0 { kernel_with_dim(&(e.adjoint() * &hy), rest)?.0 } else { CMatrix::zeros(y.ncols(), 0) };
        out.push((blk, &y * e));
        y = &y * comp;
    }
    if y.ncols() != 0 {
        return Err(PairError::Numerical(format!("{} dimensions left after peeling at η = {eta}", y.ncols())));
    }
    Ok(out)
}

/// Canonical form of `(ℓ, B)` for an ℓ-self-adjoint linear `B`.
pub fn glr_canonicalize(h: &HermitianForm, b: &CMatrix, tol: &ToleranceConfig) -> Result<GlrForm> {
    let hm = h.matrix();
    let n = require_square(b)?;
    if n != h.dim() {
        return Err(PairError::DimensionMismatch { expected: h.dim(), got: n });
    }
    if n == 0 {
        return Err(PairError::InvalidArgument("empty input".into()));
    }
    let hb = hm * b;
    let asym = norm(&(&hb - hb.adjoint()));
    if asym > tol.verify_tol * norm(&hb) {
        return Err(PairError::NotSelfAdjoint { residual: asym / norm(&hb) });
    }
    let s = schur(b)?;
    let eigs = s.eigenvalues();
    let scale = spectral_scale(&eigs);
    let groups = cluster_values(&eigs, scale, tol.cluster_tol);
    let thresh = tol.cluster_tol * scale;
    let mut used = vec![false; groups.len()];
    let mut chains: Vec<(GlrBlock, CMatrix)> = Vec::new();
    for gi in 0..groups.len() {
        if used[gi] {
            continue;
        }
        used[gi] = true;
        let g = &groups[gi];
        if g.center.im == 0.0 {
            let x = invariant_basis(&s, &g.members);
            let (hl, bl) = (x.adjoint() * hm * &x, x.adjoint() * b * &x);
            let sizes = nilpotent_sizes(&bl, g.center, thresh)?;
            for (blk, e) in peel(&hl, &bl, g.center, &sizes, tol)? {
                chains.push((blk, &x * e));
            }
        } else {
            let target = g.center.conj();
            let partner = (0..groups.len())
                .filter(|&j| !used[j] && groups[j].members.len() == g.members.len())
                .min_by(|&a, &c| (groups[a].center - target).norm().total_cmp(&(groups[c].center - target).norm()))
                .ok_or_else(|| PairError::Numerical(format!("no conjugate cluster for {}", g.center)))?;
            used[partner] = true;
            let gp = &groups[partner];
            let (upper, lower) = if g.center.im > 0.0 { (g, gp) } else { (gp, g) };
            let eta = (upper.center + lower.center.conj()) * 0.5;
            let xu = invariant_basis(&s, &upper.members);
            let sizes = nilpotent_sizes(&(xu.adjoint() * b * &xu), eta, thresh)?;
            let members: Vec<usize> = upper.members.iter().chain(lower.members.iter()).copied().collect();
            let x = invariant_basis(&s, &members);
            let (hl, bl) = (x.adjoint() * hm * &x, x.adjoint() * b * &x);
            for (blk, e) in peel(&hl, &bl, eta, &sizes, tol)? {
                chains.push((blk, &x * e));
            }
        }
    }
    chains.sort_by(|a, c| compare_glr(&a.0, &c.0));
    let blocks: Vec<GlrBlock> = chains.iter().map(|c| c.0).collect();
    let e = hstack(&chains.iter().map(|c| c.1.clone()).collect::<Vec<_>>());
    if e.ncols() != n {
        return Err(PairError::Numerical(format!("chains span {} of {n} dimensions", e.ncols())));
    }
    let m = inverse(&e, tol)?;
    let mut form = GlrForm { blocks, transition: m, residuals: ResidualReport { h_residual: 0.0, c_residual: 0.0, pass: false } };
    form.residuals = residuals_with_inverse(hm, b, &form, &e, tol);
    Ok(form)
}

fn residuals_with_inverse(h: &CMatrix, b: &CMatrix, form: &GlrForm, minv: &CMatrix, tol: &ToleranceConfig) -> ResidualReport {
    let (th, tb) = form.assembled();
    let rel = |x: f64, s: f64| if x == 0.0 { 0.0 } else { x / s };
    let h_residual = rel(norm(&(minv.adjoint() * h * minv - th)), norm(h));
    let c_residual = rel(norm(&(&form.transition * b * minv - tb)), norm(b));
    ResidualReport { h_residual, c_residual, pass: h_residual <= tol.verify_tol && c_residual <= tol.verify_tol }
}

/// Residuals of a claimed form of `(H, B)`.
pub fn verify_glr(h: &CMatrix, b: &CMatrix, form: &GlrForm, tol: &ToleranceConfig) -> Result<ResidualReport> {
    let n = require_square(&form.transition)?;
    let dim: usize = form.blocks.iter().map(|b| b.dim()).sum();
    if n != h.nrows() || n != b.nrows() || dim != n {
        return Err(PairError::DimensionMismatch { expected: h.nrows(), got: n.min(dim) });
    }
    let minv = inverse(&form.transition, tol)?;
    Ok(residuals_with_inverse(h, b, form, &minv, tol))
}

/// `B = C conj(C)` as the input of [`glr_canonicalize`].
pub fn glr_of_pair(p: &crate::pair::SelfAdjointPair, tol: &ToleranceConfig) -> Result<GlrForm> {
    glr_canonicalize(&p.form, &(p.c() * conj(p.c())), tol)
}
