//! End-to-end canonical forms: the standard form of a pair, the operator-only
//! form of a bare antilinear operator, and verification of either.

use std::fmt;

use crate::atlas::{assemble, assemble_alt, c_block, compare_blocks, sip, CanonicalBlock, Family};
use crate::error::{PairError, Result};
use crate::linalg::{
    block_diag, columns, complexify_columns, conj, cx, hstack, inverse, norm, range_basis, realify_antilinear,
    require_square, svd, CMatrix, CVector,
};
use crate::normalizers::{anti, normalize_cluster};
use crate::pair::{validate_pair, AntilinearOperator, HermitianForm, SelfAdjointPair};
use crate::spectral::{
    invariant_basis, primary_decomposition, restrict_raw, spectral_profile, staircase,
    ClusterProfile, SpectralProfile,
};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Blocks `(ε H_{λ,k}, C_{λ,k})`.
    Standard,
    /// Blocks `(ε N_{λ,k}, M_{λ,k})`.
    Alternative,
    /// Blocks `C_{λ,k}` only; every `ε` is reported as `+1` and carries no meaning.
    OperatorOnly,
}

impl Flavor {
    pub fn name(&self) -> &'static str {
        match self {
            Flavor::Standard => "standard",
            Flavor::Alternative => "alternative",
            Flavor::OperatorOnly => "operator-only",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Relative residuals of a claimed canonical form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// `‖(M⁻¹)* H M⁻¹ − H_can‖ / ‖H‖`; zero for operator-only forms.
    pub h_residual: f64,
    /// `‖M C conj(M)⁻¹ − C_can‖ / ‖C‖`, with `0/0` read as `0`.
    pub c_residual: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.h_residual.max(self.c_residual)
    }
}

/// Blocks plus the transition `M` taking the input to the assembled blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub blocks: Vec<CanonicalBlock>,
    pub transition: CMatrix,
    pub flavor: Flavor,
    pub residuals: ResidualReport,
}

impl CanonicalForm {
    /// The block-diagonal target `(H_can, C_can)` for this flavor.
    pub fn assembled(&self) -> Result<(CMatrix, CMatrix)> {
        match self.flavor {
            Flavor::Standard | Flavor::OperatorOnly => assemble(&self.blocks),
            Flavor::Alternative => assemble_alt(&self.blocks),
        }
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }
}

fn rel(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn residuals_from_inverse(
    h: Option<&CMatrix>,
    c: &CMatrix,
    m: &CMatrix,
    minv: &CMatrix,
    target: &(CMatrix, CMatrix),
    tol: &ToleranceConfig,
) -> ResidualReport {
    let h_residual = match h {
        Some(h) => rel(norm(&(minv.adjoint() * h * minv - &target.0)), norm(h)),
        None => 0.0,
    };
    let c_residual = rel(norm(&(m * c * conj(minv) - &target.1)), norm(c));
    let pass = h_residual <= tol.verify_tol && c_residual <= tol.verify_tol;
    ResidualReport { h_residual, c_residual, pass }
}

/// Residuals of `form` against `p`. Operator-only forms skip the `H` part.
pub fn verify_canonical(p: &SelfAdjointPair, form: &CanonicalForm, tol: &ToleranceConfig) -> Result<ResidualReport> {
    let n = require_square(&form.transition)?;
    if n != p.n || form.dim() != n {
        return Err(PairError::DimensionMismatch { expected: p.n, got: n.min(form.dim()) });
    }
    let minv = inverse(&form.transition, tol)?;
    let target = form.assembled()?;
    let h = if form.flavor == Flavor::OperatorOnly { None } else { Some(p.h()) };
    Ok(residuals_from_inverse(h, p.c(), &form.transition, &minv, &target, tol))
}

/// Sort chains by block key and glue them into `E`; returns `(blocks, E)`.
fn assemble_chains(mut chains: Vec<(CanonicalBlock, CMatrix)>, n: usize) -> (Vec<CanonicalBlock>, CMatrix) {
    chains.sort_by(|a, b| compare_blocks(&a.0, &b.0));
    let blocks = chains.iter().map(|c| c.0).collect();
    let e = if chains.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        hstack(&chains.iter().map(|c| c.1.clone()).collect::<Vec<_>>())
    };
    (blocks, e)
}

fn cluster_name(cl: &ClusterProfile) -> String {
    format!("{} cluster at λ² = {:.6}", cl.family.name(), cl.lambda_sq)
}

/// The standard canonical form. Blocks are sorted; within a cluster the
/// largest blocks are peeled first.
pub fn canonicalize_pair(p: &SelfAdjointPair, tol: &ToleranceConfig) -> Result<CanonicalForm> {
    let n = p.n;
    if n == 0 {
        return Err(PairError::InvalidArgument("empty pair".into()));
    }
    let profile = spectral_profile(p.c(), tol)?;
    let subs = primary_decomposition(p, &profile, tol)?;
    let mut chains = Vec::new();
    for (cl, sub) in profile.clusters.iter().zip(&subs) {
        let x = &sub.columns;
        let (hl, cloc) = restrict_raw(p.h(), p.c(), x);
        let local = normalize_cluster(&hl, &cloc, cl, norm(p.c()), tol).map_err(|e| e.context(&cluster_name(cl)))?;
        for ch in local {
            chains.push((ch.block, x * ch.vectors));
        }
    }
    let (blocks, e) = assemble_chains(chains, n);
    finish(Some(p.h()), p.c(), blocks, e, Flavor::Standard, tol)
}

fn finish(
    h: Option<&CMatrix>,
    c: &CMatrix,
    blocks: Vec<CanonicalBlock>,
    e: CMatrix,
    flavor: Flavor,
    tol: &ToleranceConfig,
) -> Result<CanonicalForm> {
    if e.ncols() != c.nrows() {
        return Err(PairError::Numerical(format!("chains span {} of {} dimensions", e.ncols(), c.nrows())));
    }
    let m = inverse(&e, tol).map_err(|e| e.context("assembling the transition"))?;
    let target = assemble(&blocks)?;
    let residuals = residuals_from_inverse(h, c, &m, &e, &target, tol);
    Ok(CanonicalForm { blocks, transition: m, flavor, residuals })
}

/// Top vectors of Jordan chains for the nilpotent map `apply`, given its
/// kernel staircase. With `partner`, each top also reserves `partner(top)`.
fn chain_tops(
    levels: &[CMatrix],
    apply: &dyn Fn(&CVector) -> CVector,
    partner: Option<&dyn Fn(&CVector) -> CVector>,
    tol: &ToleranceConfig,
) -> Result<Vec<(usize, CVector)>> {
    let s = levels.len();
    if s == 0 {
        return Ok(Vec::new());
    }
    let d = levels[0].nrows();
    let dims: Vec<usize> = levels.iter().map(|k| k.ncols()).collect();
    let weyr: Vec<usize> = (0..s).map(|j| dims[j] - if j == 0 { 0 } else { dims[j - 1] }).collect();
    let per = if partner.is_some() { 2 } else { 1 };
    let mut tops: Vec<(usize, CVector)> = Vec::new();
    for j in (1..=s).rev() {
        let diff = weyr[j - 1] - weyr.get(j).copied().unwrap_or(0);
        if diff % per != 0 {
            return Err(PairError::Numerical(format!("unpaired chains at level {j}")));
        }
        for _ in 0..diff / per {
            let mut cols: Vec<CVector> = Vec::new();
            if j >= 2 {
                cols.extend(levels[j - 2].column_iter().map(|c| c.into_owned()));
            }
            for (kt, t) in &tops {
                let mut v = t.clone();
                for _ in j..*kt {
                    v = apply(&v);
                }
                if let Some(pf) = partner {
                    cols.push(pf(&v));
                }
                cols.push(v);
            }
            let u = if cols.is_empty() { CMatrix::zeros(d, 0) } else { range_basis(&columns(&cols, d), tol.cluster_tol)? };
            let proj = CMatrix::identity(d, d) - &u * u.adjoint();
            let m = proj * &levels[j - 1];
            let sv = svd(&m)?;
            let x: CVector = &m * sv.v.column(0);
            let nx = x.norm();
            if nx <= tol.cluster_tol {
                return Err(PairError::Numerical(format!("no new chain top at level {j}")));
            }
            tops.push((j, x / cx(nx, 0.0)));
        }
    }
    Ok(tops)
}

/// `[f_1..f_k]` with `f_j = apply^{k−j}(top)`.
fn chain_columns(top: &CVector, k: usize, apply: &dyn Fn(&CVector) -> CVector) -> CMatrix {
    let mut f = CMatrix::zeros(top.len(), k);
    let mut cur = top.clone();
    for j in (0..k).rev() {
        f.set_column(j, &cur);
        cur = apply(&cur);
    }
    f
}

fn check_sizes(cl: &ClusterProfile, tops: &[(usize, CVector)]) -> Result<()> {
    let mut got: Vec<usize> = tops.iter().map(|t| t.0).collect();
    got.sort_unstable_by(|a, b| b.cmp(a));
    if got != cl.block_sequence() {
        return Err(PairError::Numerical(format!(
            "{}: chain sizes {got:?} disagree with block sizes {:?}",
            cluster_name(cl),
            cl.block_sequence()
        )));
    }
    Ok(())
}

/// Chains of one cluster in ambient coordinates, built from `C` alone.
fn operator_cluster(
    c: &CMatrix,
    prof: &SpectralProfile,
    cl: &ClusterProfile,
    tol: &ToleranceConfig,
) -> Result<Vec<(CanonicalBlock, CMatrix)>> {
    let thresh = tol.cluster_tol * prof.scale;
    let mut out = Vec::new();
    match cl.family {
        Family::PositiveReal => {
            let x = invariant_basis(&prof.schur, &cl.members);
            let cloc = x.adjoint() * c * conj(&x);
            let d = cloc.nrows();
            let lambda = cl.lambda.re;
            let l = realify_antilinear(&cloc) - CMatrix::identity(2 * d, 2 * d) * cx(lambda, 0.0);
            let lthresh = tol.cluster_tol * norm(&cloc).max(1.0);
            let levels = staircase(&l, false, lthresh, d)?;
            let apply = |v: &CVector| &l * v;
            let tops = chain_tops(&levels, &apply, None, tol)?;
            check_sizes(cl, &tops)?;
            for (k, t) in tops {
                let real = t.map(|z| cx(z.re, 0.0));
                let f = complexify_columns(&chain_columns(&real, k, &apply));
                out.push((CanonicalBlock::positive(lambda, k, 1)?, &x * f));
            }
        }
        Family::Zero => {
            let x = invariant_basis(&prof.schur, &cl.members);
            let cloc = x.adjoint() * c * conj(&x);
            let cthresh = tol.cluster_tol * norm(c).max(1.0);
            let levels = staircase(&cloc, true, cthresh, x.ncols())?;
            let apply = |v: &CVector| anti(&cloc, v);
            let tops = chain_tops(&levels, &apply, None, tol)?;
            check_sizes(cl, &tops)?;
            for (k, t) in tops {
                out.push((CanonicalBlock::zero(k, 1)?, &x * chain_columns(&t, k, &apply)));
            }
        }
        Family::Negative | Family::Nonreal => {
            let members = if cl.family == Family::Negative { &cl.members } else { &cl.upper_members };
            let x = invariant_basis(&prof.schur, members);
            let b = c * conj(c);
            let bl = x.adjoint() * &b * &x;
            let d = bl.nrows();
            let nl = &bl - CMatrix::identity(d, d) * cl.lambda_sq;
            let levels = staircase(&nl, false, thresh, d)?;
            let apply = |v: &CVector| &nl * v;
            // A maps the cluster to itself only in the negative case
            let a_loc = x.adjoint() * c * conj(&x);
            let partner = |v: &CVector| anti(&a_loc, v);
            let tops = if cl.family == Family::Negative {
                chain_tops(&levels, &apply, Some(&partner), tol)?
            } else {
                chain_tops(&levels, &apply, None, tol)?
            };
            check_sizes(cl, &tops)?;
            for (k, t) in tops {
                let f = &x * chain_columns(&t, k, &apply);
                let g = c * conj(&f);
                out.push((CanonicalBlock::new(cl.lambda_sq, k, 1)?, hstack(&[f, g])));
            }
        }
    }
    Ok(out)
}

/// Canonical form of `C` under consimilarity alone; no Hermitian form is used.
pub fn canonicalize_operator(c: &AntilinearOperator, tol: &ToleranceConfig) -> Result<CanonicalForm> {
    let cm = c.matrix();
    let n = require_square(cm)?;
    if n == 0 {
        return Err(PairError::InvalidArgument("empty operator".into()));
    }
    let prof = spectral_profile(cm, tol)?;
    let mut chains = Vec::new();
    for cl in &prof.clusters {
        chains.extend(operator_cluster(cm, &prof, cl, tol).map_err(|e| e.context(&cluster_name(cl)))?);
    }
    let (blocks, e) = assemble_chains(chains, n);
    finish(None, cm, blocks, e, Flavor::OperatorOnly, tol)
}

/// A nondegenerate Hermitian form making `C` self-adjoint: `M* (⊕ H_{λ,k}) M`
/// for the operator-only transition `M`.
pub fn witness_form(c: &AntilinearOperator, tol: &ToleranceConfig) -> Result<HermitianForm> {
    let form = canonicalize_operator(c, tol)?;
    let hs: Vec<CMatrix> = form.blocks.iter().map(|b| sip(b.dim())).collect();
    let m = &form.transition;
    let h = m.adjoint() * block_diag(&hs) * m;
    let h = (&h + h.adjoint()) * cx(0.5, 0.0);
    validate_pair(&h, c.matrix(), tol)?;
    HermitianForm::new(h, tol)
}

/// `C_can` for a block list; used by callers that only need the operator part.
pub fn assembled_operator(blocks: &[CanonicalBlock]) -> CMatrix {
    block_diag(&blocks.iter().map(c_block).collect::<Vec<_>>())
}
