//! Structure of the linear operator `B = A²`: eigenvalue clusters, invariant
//! subspaces, Jordan sizes, restrictions and ℓ-orthogonal complements.

use num_complex::Complex64;

use crate::atlas::{principal_sqrt, Family};
use crate::error::{PairError, Result};
use crate::linalg::{
    conj, cx, kernel_with_dim, norm, range_basis, realify_antilinear, reorder_schur, schur, svd, CMatrix,
    Schur,
};
use crate::pair::{square_operator, validate_pair, SelfAdjointPair};
use crate::tolerance::ToleranceConfig;

/// What a [`SubspaceBasis`] stands for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubspaceTag {
    /// Generalized eigenspace of `B` for one cluster (both conjugates if nonreal).
    Cluster { lambda_sq: Complex64 },
    /// Real space `ker (A − λ)^k`, stored as complex vectors.
    RealFiltration { lambda: f64, k: usize },
    /// ℓ-orthogonal complement of another subspace.
    Complement,
    /// Span of a normalized chain.
    Chain,
    Whole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub columns: CMatrix,
    pub tag: SubspaceTag,
}

impl SubspaceBasis {
    pub fn new(columns: CMatrix, tag: SubspaceTag) -> Self {
        SubspaceBasis { columns, tag }
    }

    pub fn whole(n: usize) -> Self {
        SubspaceBasis { columns: CMatrix::identity(n, n), tag: SubspaceTag::Whole }
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }
}

/// One cluster of eigenvalues of `B`, with conjugate clusters merged.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterProfile {
    pub lambda_sq: Complex64,
    pub lambda: Complex64,
    pub family: Family,
    /// Jordan sizes `(s, r)` of `B` on the whole cluster space, `s` decreasing.
    /// For nonreal clusters both conjugate eigenvalues are counted.
    pub jordan_sizes: Vec<(usize, usize)>,
    /// Parameters `k` of the canonical blocks of `A` with multiplicities.
    pub block_sizes: Vec<(usize, usize)>,
    /// Complex dimension of the cluster space.
    pub dim: usize,
    pub(crate) members: Vec<usize>,
    pub(crate) upper_members: Vec<usize>,
}

impl ClusterProfile {
    /// Block parameters in peeling order, largest first, repeated by multiplicity.
    pub fn block_sequence(&self) -> Vec<usize> {
        self.block_sizes.iter().flat_map(|&(k, r)| std::iter::repeat(k).take(r)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralProfile {
    pub clusters: Vec<ClusterProfile>,
    pub n: usize,
    /// `max(1, max |μ|)` over eigenvalues of `B`; every threshold scales with it.
    pub scale: f64,
    pub eigenvalues: Vec<Complex64>,
    pub(crate) schur: Schur,
}

impl SpectralProfile {
    /// Sum of canonical block dimensions; equals `n` for a consistent profile.
    pub fn total_dim(&self) -> usize {
        self.clusters
            .iter()
            .map(|c| {
                let per = match c.family {
                    Family::Negative | Family::Nonreal => 2,
                    _ => 1,
                };
                c.block_sizes.iter().map(|&(k, r)| per * k * r).sum::<usize>()
            })
            .sum()
    }
}

/// Eigenvalue groups of a general linear map, with snapping applied.
#[derive(Debug, Clone)]
pub(crate) struct Group {
    pub center: Complex64,
    pub members: Vec<usize>,
}

/// Complete-linkage dendrogram, cut top-down: a node becomes a group as soon
/// as every member lies within `cluster_tol^{1/m} · scale` of its centroid.
/// The radius grows with `m` to tolerate the `η^{1/m}` spread of a perturbed
/// defective eigenvalue, so acceptance is not monotone and the cut must start
/// at the root. A node whose children are tight and far apart is split anyway.
pub(crate) fn cluster_values(eigs: &[Complex64], scale: f64, cluster_tol: f64) -> Vec<Group> {
    let centroid = |g: &[usize]| -> Complex64 { g.iter().map(|&i| eigs[i]).sum::<Complex64>() / g.len() as f64 };
    let acceptable = |g: &[usize]| -> bool {
        let c = centroid(g);
        let m = g.len() as f64;
        let radius = cluster_tol.powf(1.0 / m) * scale;
        g.iter().all(|&i| (eigs[i] - c).norm() <= radius)
    };
    let spread = |g: &[usize]| -> f64 {
        let c = centroid(g);
        g.iter().fold(0.0f64, |m, &i| m.max((eigs[i] - c).norm()))
    };
    // two tight groups far apart relative to their own spread are distinct
    // eigenvalues even when the lenient radius of their union would accept them
    let separated = |a: &[usize], b: &[usize]| -> bool {
        let gap = (centroid(a) - centroid(b)).norm();
        acceptable(a) && acceptable(b) && gap > 4.0 * (spread(a) + spread(b)) && gap > cluster_tol.sqrt() * scale
    };
    // nodes[i] = (members, children)
    let mut nodes: Vec<(Vec<usize>, Option<(usize, usize)>)> = (0..eigs.len()).map(|i| (vec![i], None)).collect();
    let mut active: Vec<usize> = (0..eigs.len()).collect();
    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..active.len() {
            for b in (a + 1)..active.len() {
                let mut link = 0.0f64;
                for &i in &nodes[active[a]].0 {
                    for &j in &nodes[active[b]].0 {
                        link = link.max((eigs[i] - eigs[j]).norm());
                    }
                }
                if best.map_or(true, |(d, _, _)| link < d) {
                    best = Some((link, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("two active nodes");
        let (na, nb) = (active[a], active[b]);
        let mut members: Vec<usize> = nodes[na].0.iter().chain(nodes[nb].0.iter()).copied().collect();
        members.sort_unstable();
        nodes.push((members, Some((na, nb))));
        active.remove(b);
        active[a] = nodes.len() - 1;
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = active;
    while let Some(i) = stack.pop() {
        let (members, children) = &nodes[i];
        match children {
            Some((l, r)) if !acceptable(members) || separated(&nodes[*l].0, &nodes[*r].0) => {
                stack.push(*r);
                stack.push(*l);
            }
            _ => groups.push(members.clone()),
        }
    }
    let snap = cluster_tol * scale;
    let mut out: Vec<Group> = groups
        .into_iter()
        .map(|members| {
            let mut c = centroid(&members);
            if c.im.abs() <= snap {
                c.im = 0.0;
            }
            if c.norm() <= snap {
                c = cx(0.0, 0.0);
            }
            Group { center: c, members }
        })
        .collect();
    out.sort_by(|x, y| x.center.re.total_cmp(&y.center.re).then(x.center.im.total_cmp(&y.center.im)));
    out
}

pub(crate) fn spectral_scale(eigs: &[Complex64]) -> f64 {
    eigs.iter().fold(1.0f64, |m, z| m.max(z.norm()))
}

/// Orthonormal basis of the invariant subspace for the selected eigenvalue indices.
pub(crate) fn invariant_basis(s: &Schur, members: &[usize]) -> CMatrix {
    let n = s.t.nrows();
    let mut sel = vec![false; n];
    for &i in members {
        sel[i] = true;
    }
    let r = reorder_schur(s, &sel);
    r.q.columns(0, members.len()).into_owned()
}

/// Basis of `{x : m x = 0}` with singular values at or below `thresh` treated as zero.
pub(crate) fn kernel_abs(m: &CMatrix, thresh: f64) -> Result<CMatrix> {
    let n = m.ncols();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let d = svd(m)?;
    let rank = d.s.iter().filter(|&&x| x > thresh).count();
    Ok(d.v.columns(rank, n - rank).into_owned())
}

/// Nested kernels `K_j = ker L^j` for `j = 1, 2, …` until they stop growing,
/// computed as `K_j = ker((I − Π_{K_{j−1}}) L)` so no powers are formed.
/// With `antilinear`, `L` means `v ↦ m conj(v)`.
pub(crate) fn staircase(m: &CMatrix, antilinear: bool, thresh: f64, max_levels: usize) -> Result<Vec<CMatrix>> {
    let d = m.nrows();
    let mut levels: Vec<CMatrix> = Vec::new();
    let mut prev = CMatrix::zeros(d, 0);
    for _ in 0..max_levels {
        let proj = CMatrix::identity(d, d) - &prev * prev.adjoint();
        let k = kernel_abs(&(proj * m), thresh)?;
        let k = if antilinear { conj(&k) } else { k };
        if k.ncols() <= prev.ncols() {
            break;
        }
        levels.push(k.clone());
        prev = k;
        if prev.ncols() == d {
            break;
        }
    }
    Ok(levels)
}

/// Jordan sizes `(s, r)`, `s` decreasing, from staircase dimensions.
pub(crate) fn sizes_from_levels(dims: &[usize]) -> Result<Vec<(usize, usize)>> {
    let mut w: Vec<usize> = Vec::with_capacity(dims.len());
    let mut prev = 0;
    for &d in dims {
        if d < prev {
            return Err(PairError::Numerical("kernel chain not nested".into()));
        }
        w.push(d - prev);
        prev = d;
    }
    if w.windows(2).any(|p| p[1] > p[0]) {
        return Err(PairError::Numerical(format!("Weyr characteristic {w:?} not monotone")));
    }
    let mut out = Vec::new();
    for j in (0..w.len()).rev() {
        let next = if j + 1 < w.len() { w[j + 1] } else { 0 };
        let r = w[j] - next;
        if r > 0 {
            out.push((j + 1, r));
        }
    }
    Ok(out)
}

/// Jordan sizes of `b_loc − center` assuming it is nilpotent on its space.
pub(crate) fn nilpotent_sizes(b_loc: &CMatrix, center: Complex64, thresh: f64) -> Result<Vec<(usize, usize)>> {
    let d = b_loc.nrows();
    let n = b_loc - CMatrix::identity(d, d) * center;
    let levels = staircase(&n, false, thresh, d)?;
    let dims: Vec<usize> = levels.iter().map(|k| k.ncols()).collect();
    if dims.last().copied().unwrap_or(0) != d {
        return Err(PairError::Numerical(format!(
            "restricted operator not nilpotent at {center} (kernel dims {dims:?} of {d})"
        )));
    }
    sizes_from_levels(&dims)
}

/// Clusters, Jordan sizes of `B` and canonical block sizes of `A`.
pub fn spectral_profile(c: &CMatrix, tol: &ToleranceConfig) -> Result<SpectralProfile> {
    let n = crate::linalg::require_square(c)?;
    if n > tol.max_dim {
        return Err(PairError::TooLarge(n));
    }
    let b = c * conj(c);
    let s = schur(&b)?;
    let eigs = s.eigenvalues();
    let scale = spectral_scale(&eigs);
    let groups = cluster_values(&eigs, scale, tol.cluster_tol);
    let thresh = tol.cluster_tol * scale;

    let mut used = vec![false; groups.len()];
    let mut clusters = Vec::new();
    for gi in 0..groups.len() {
        if used[gi] {
            continue;
        }
        let g = &groups[gi];
        used[gi] = true;
        if g.center.im == 0.0 {
            let x = invariant_basis(&s, &g.members);
            let b_loc = x.adjoint() * &b * &x;
            let jordan = nilpotent_sizes(&b_loc, g.center, thresh)?;
            let family = Family::of(g.center);
            let blocks = match family {
                Family::PositiveReal => jordan.clone(),
                Family::Negative => {
                    if jordan.iter().any(|&(_, r)| r % 2 == 1) {
                        return Err(PairError::Numerical(format!(
                            "negative cluster {} has unpaired Jordan sizes {jordan:?}",
                            g.center
                        )));
                    }
                    jordan.iter().map(|&(s, r)| (s, r / 2)).collect()
                }
                _ => {
                    let c_loc = x.adjoint() * c * conj(&x);
                    let cthresh = tol.cluster_tol * norm(c).max(1.0);
                    let levels = staircase(&c_loc, true, cthresh, x.ncols())?;
                    let dims: Vec<usize> = levels.iter().map(|k| k.ncols()).collect();
                    if dims.last().copied().unwrap_or(0) != x.ncols() {
                        return Err(PairError::Numerical(format!("A not nilpotent on zero cluster ({dims:?})")));
                    }
                    sizes_from_levels(&dims)?
                }
            };
            clusters.push(ClusterProfile {
                lambda_sq: g.center,
                lambda: principal_sqrt(g.center),
                family,
                jordan_sizes: jordan,
                block_sizes: blocks,
                dim: g.members.len(),
                members: g.members.clone(),
                upper_members: g.members.clone(),
            });
        } else {
            // pair with the closest unused conjugate cluster of the same size
            let target = g.center.conj();
            let partner = (0..groups.len())
                .filter(|&j| !used[j] && groups[j].members.len() == g.members.len())
                .min_by(|&a, &b2| {
                    (groups[a].center - target).norm().total_cmp(&(groups[b2].center - target).norm())
                })
                .ok_or_else(|| PairError::Numerical(format!("no conjugate cluster for {}", g.center)))?;
            let gp = &groups[partner];
            let sep = (gp.center - target).norm();
            let radius = tol.cluster_tol.powf(1.0 / g.members.len() as f64) * scale;
            if sep > 2.0 * radius {
                return Err(PairError::Numerical(format!(
                    "conjugate clusters {} and {} do not match",
                    g.center, gp.center
                )));
            }
            used[partner] = true;
            let (upper, lower) = if g.center.im > 0.0 { (g, gp) } else { (gp, g) };
            let center = (upper.center + lower.center.conj()) * 0.5;
            let xu = invariant_basis(&s, &upper.members);
            let b_loc = xu.adjoint() * &b * &xu;
            let sizes = nilpotent_sizes(&b_loc, center, thresh)?;
            let members: Vec<usize> = upper.members.iter().chain(lower.members.iter()).copied().collect();
            clusters.push(ClusterProfile {
                lambda_sq: center,
                lambda: principal_sqrt(center),
                family: Family::Nonreal,
                jordan_sizes: sizes.iter().map(|&(s, r)| (s, 2 * r)).collect(),
                block_sizes: sizes,
                dim: members.len(),
                members,
                upper_members: upper.members.clone(),
            });
        }
    }
    clusters.sort_by(|a, b| {
        let ra = a.family != Family::Nonreal;
        let rb = b.family != Family::Nonreal;
        rb.cmp(&ra)
            .then(a.lambda_sq.re.total_cmp(&b.lambda_sq.re))
            .then(a.lambda_sq.im.total_cmp(&b.lambda_sq.im))
    });
    let prof = SpectralProfile { clusters, n, scale, eigenvalues: eigs, schur: s };
    if prof.total_dim() != n {
        return Err(PairError::Numerical(format!("profile accounts for {} of {n} dimensions", prof.total_dim())));
    }
    Ok(prof)
}

/// A-invariance residual `‖(I − Π_X) C conj(X)‖ / ‖C‖` for orthonormal `X`.
pub fn invariance_residual(c: &CMatrix, x: &CMatrix) -> f64 {
    let img = c * conj(x);
    let off = &img - x * (x.adjoint() * &img);
    let nc = norm(c);
    if nc == 0.0 {
        0.0
    } else {
        norm(&off) / nc
    }
}

/// ℓ-cross-term residual `‖Y* H X‖ / ‖H‖`.
pub fn cross_residual(h: &CMatrix, x: &CMatrix, y: &CMatrix) -> f64 {
    norm(&(y.adjoint() * h * x)) / norm(h)
}

/// One orthonormal basis per cluster of the profile.
pub fn primary_decomposition(p: &SelfAdjointPair, profile: &SpectralProfile, tol: &ToleranceConfig) -> Result<Vec<SubspaceBasis>> {
    if profile.n != p.n {
        return Err(PairError::DimensionMismatch { expected: p.n, got: profile.n });
    }
    let mut out = Vec::with_capacity(profile.clusters.len());
    for cl in &profile.clusters {
        let x = invariant_basis(&profile.schur, &cl.members);
        if x.ncols() != cl.dim {
            return Err(PairError::DimensionMismatch { expected: cl.dim, got: x.ncols() });
        }
        let r = invariance_residual(p.c(), &x);
        if r > tol.verify_tol {
            return Err(PairError::Numerical(format!("cluster {} not A-invariant ({r:.2e})", cl.lambda_sq)));
        }
        out.push(SubspaceBasis::new(x, SubspaceTag::Cluster { lambda_sq: cl.lambda_sq }));
    }
    for i in 0..out.len() {
        for j in (i + 1)..out.len() {
            let r = cross_residual(p.h(), &out[i].columns, &out[j].columns);
            if r > tol.verify_tol {
                return Err(PairError::Numerical(format!("clusters {i} and {j} not ℓ-orthogonal ({r:.2e})")));
            }
        }
    }
    Ok(out)
}

/// Raw restriction to orthonormal columns `x`: `(x* H x, x* C conj(x))`.
pub(crate) fn restrict_raw(h: &CMatrix, c: &CMatrix, x: &CMatrix) -> (CMatrix, CMatrix) {
    (x.adjoint() * h * x, x.adjoint() * c * conj(x))
}

/// The pair induced on an A-invariant subspace, in the coordinates of its basis.
pub fn restrict_pair(p: &SelfAdjointPair, sub: &SubspaceBasis, tol: &ToleranceConfig) -> Result<SelfAdjointPair> {
    let x = &sub.columns;
    if x.nrows() != p.n {
        return Err(PairError::DimensionMismatch { expected: p.n, got: x.nrows() });
    }
    let h = x.adjoint() * p.h() * x;
    let rhs = p.c() * conj(x);
    let gram = x.adjoint() * x;
    let cpart = crate::linalg::solve(&gram, &(x.adjoint() * &rhs))?;
    let resid = norm(&(x * &cpart - &rhs));
    let nc = norm(p.c());
    if nc > 0.0 && resid > tol.verify_tol * nc * norm(x).max(1.0) {
        return Err(PairError::Numerical(format!("subspace not A-invariant ({:.2e})", resid / nc)));
    }
    validate_pair(&h, &cpart, tol).map_err(|e| match e {
        PairError::Degenerate { residual } => {
            PairError::Numerical(format!("ℓ degenerate on the subspace (ratio {residual:.2e})"))
        }
        other => other,
    })
}

/// Orthonormal basis of `{w : ℓ(w, v_i) = 0 for all i}`.
pub fn orthogonal_complement(p: &SelfAdjointPair, v: &SubspaceBasis, tol: &ToleranceConfig) -> Result<SubspaceBasis> {
    let x = &v.columns;
    let d = x.ncols();
    let gram = x.adjoint() * p.h() * x;
    if d > 0 {
        let g = svd(&gram)?;
        let smin = *g.s.last().unwrap();
        let xs = svd(x)?;
        let scale = norm(p.h()) * xs.s[0] * xs.s[0];
        if smin <= tol.rank_tol * scale {
            return Err(PairError::Numerical(format!(
                "ℓ degenerate on the subspace (ratio {:.2e})",
                smin / scale
            )));
        }
    }
    let (k, _) = kernel_with_dim(&(x.adjoint() * p.h()), p.n - d)?;
    Ok(SubspaceBasis::new(k, SubspaceTag::Complement))
}

/// Real basis of `W̃ = ker (A − λ)^k` inside the positive cluster `λ²`.
/// Columns are complex vectors; the basis is real-linearly independent and,
/// by the half-space property, also a complex basis of its complex span.
pub fn real_filtration(p: &SelfAdjointPair, lambda: f64, k: usize, tol: &ToleranceConfig) -> Result<SubspaceBasis> {
    if !(lambda > 0.0) {
        return Err(PairError::InvalidArgument(format!("real filtration needs λ > 0, got {lambda}")));
    }
    let prof = spectral_profile(p.c(), tol)?;
    let target = cx(lambda * lambda, 0.0);
    let cl = prof
        .clusters
        .iter()
        .filter(|c| c.family == Family::PositiveReal)
        .min_by(|a, b| (a.lambda_sq - target).norm().total_cmp(&(b.lambda_sq - target).norm()))
        .ok_or_else(|| PairError::InvalidArgument(format!("no positive cluster near λ² = {}", target.re)))?;
    if (cl.lambda_sq - target).norm() > tol.cluster_tol.sqrt() * prof.scale {
        return Err(PairError::InvalidArgument(format!("λ² = {} is not an eigenvalue of A²", target.re)));
    }
    let x = invariant_basis(&prof.schur, &cl.members);
    let c_loc = x.adjoint() * p.c() * conj(&x);
    let local = real_kernel_local(&c_loc, cl.lambda.re, k, tol)?;
    let cols = &x * local;
    Ok(SubspaceBasis::new(cols, SubspaceTag::RealFiltration { lambda, k }))
}

/// Real kernel of `(A − λ)^k` for an antilinear `c_loc` on its own space,
/// returned as complex column vectors.
pub(crate) fn real_kernel_local(c_loc: &CMatrix, lambda: f64, k: usize, tol: &ToleranceConfig) -> Result<CMatrix> {
    let d = c_loc.nrows();
    let l = realify_antilinear(c_loc) - CMatrix::identity(2 * d, 2 * d) * cx(lambda, 0.0);
    let thresh = tol.cluster_tol * norm(c_loc).max(1.0);
    let levels = staircase(&l, false, thresh, k)?;
    let real = match levels.get(k.saturating_sub(1)) {
        Some(kk) if levels.len() >= k => kk.clone(),
        _ => levels.last().cloned().unwrap_or_else(|| CMatrix::zeros(2 * d, 0)),
    };
    let cols = crate::linalg::complexify_columns(&real);
    // complex independence of a real basis (half-space property)
    if cols.ncols() > 0 {
        let sv = svd(&cols)?;
        let smin = *sv.s.last().unwrap();
        if smin <= tol.rank_tol.sqrt() * sv.s[0] {
            return Err(PairError::Numerical("real filtration basis is not complex independent".into()));
        }
    }
    Ok(cols)
}

/// Real dimension of `W^{(k)±} = ker (A ∓ λ)(B − λ²)^{k−1}` on the positive cluster.
///
/// Built level by level as `{x : (B − λ²) x ∈ W^{(j−1)±}}`, so no powers are formed.
pub fn split_filtration_dim(p: &SelfAdjointPair, lambda: f64, k: usize, plus: bool, tol: &ToleranceConfig) -> Result<usize> {
    if k == 0 {
        return Ok(0);
    }
    let b = square_operator(&p.op);
    let n = p.n;
    let thresh = tol.cluster_tol * norm(&b).max(1.0);
    let sign = if plus { 1.0 } else { -1.0 };
    let ar = realify_antilinear(p.c()) - CMatrix::identity(2 * n, 2 * n) * cx(sign * lambda, 0.0);
    let nb = crate::linalg::realify_linear(&(b - CMatrix::identity(n, n) * cx(lambda * lambda, 0.0)));
    let mut level = kernel_abs(&ar, thresh)?;
    for _ in 1..k {
        let proj = CMatrix::identity(2 * n, 2 * n) - &level * level.adjoint();
        level = kernel_abs(&(proj * &nb), thresh)?;
    }
    Ok(level.ncols())
}

/// Complex dimension of `W^{(k)} = ker (B − λ²)^k`.
pub fn filtration_dim(p: &SelfAdjointPair, lambda_sq: Complex64, k: usize, tol: &ToleranceConfig) -> Result<usize> {
    if k == 0 {
        return Ok(0);
    }
    let b = square_operator(&p.op);
    let n = p.n;
    let thresh = tol.cluster_tol * norm(&b).max(1.0);
    let levels = staircase(&(&b - CMatrix::identity(n, n) * lambda_sq), false, thresh, k)?;
    Ok(levels.last().map_or(0, |l| l.ncols()))
}

/// Orthonormalized column span.
pub fn span(m: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    range_basis(m, tol.rank_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::{assemble, CanonicalBlock};
    use crate::linalg::{from_real_rows, from_rows};

    #[test]
    fn zero_operator_profile() {
        let t = ToleranceConfig::default();
        let prof = spectral_profile(&CMatrix::zeros(3, 3), &t).unwrap();
        assert_eq!(prof.clusters.len(), 1);
        assert_eq!(prof.clusters[0].jordan_sizes, vec![(1, 3)]);
        assert_eq!(prof.clusters[0].block_sizes, vec![(1, 3)]);
    }

    #[test]
    fn negative_unit_profile() {
        let t = ToleranceConfig::default();
        let c = from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let prof = spectral_profile(&c, &t).unwrap();
        assert_eq!(prof.clusters.len(), 1);
        assert_eq!(prof.clusters[0].lambda_sq, cx(-1.0, 0.0));
        assert_eq!(prof.clusters[0].jordan_sizes, vec![(1, 2)]);
        assert_eq!(prof.clusters[0].block_sizes, vec![(1, 1)]);
    }

    #[test]
    fn jordan_three_two() {
        let t = ToleranceConfig::default();
        let c = from_real_rows(&[&[3.0, 1.0], &[0.0, 3.0]]);
        let prof = spectral_profile(&c, &t).unwrap();
        assert_eq!(prof.clusters.len(), 1);
        assert!((prof.clusters[0].lambda_sq - cx(9.0, 0.0)).norm() < 1e-12);
        assert_eq!(prof.clusters[0].jordan_sizes, vec![(2, 1)]);
    }

    #[test]
    fn zero_cluster_uses_a_structure() {
        let t = ToleranceConfig::default();
        let (_, c) = assemble(&[CanonicalBlock::zero(3, 1).unwrap(), CanonicalBlock::zero(2, 1).unwrap()]).unwrap();
        let prof = spectral_profile(&c, &t).unwrap();
        assert_eq!(prof.clusters[0].block_sizes, vec![(3, 1), (2, 1)]);
        // B = T² on J_{0,3} gives sizes 2, 1; on J_{0,2} gives 1, 1
        assert_eq!(prof.clusters[0].jordan_sizes, vec![(2, 1), (1, 3)]);
    }

    #[test]
    fn clustering_groups_defective_spread() {
        let eigs = vec![cx(1.0 + 1e-5, 0.0), cx(1.0 - 0.5e-5, 0.87e-5), cx(1.0 - 0.5e-5, -0.87e-5), cx(3.0, 0.0)];
        let g = cluster_values(&eigs, 3.0, 1e-7);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].members, vec![0, 1, 2]);
        assert_eq!(g[0].center.im, 0.0);
    }

    #[test]
    fn restrict_and_complement_on_blocks() {
        let t = ToleranceConfig::default();
        let blocks = [CanonicalBlock::positive(1.0, 1, 1).unwrap(), CanonicalBlock::zero(1, 1).unwrap()];
        let (h, c) = assemble(&blocks).unwrap();
        let p = validate_pair(&h, &c, &t).unwrap();
        let e1 = SubspaceBasis::new(from_real_rows(&[&[1.0], &[0.0]]), SubspaceTag::Chain);
        let q = restrict_pair(&p, &e1, &t).unwrap();
        assert_eq!(q.n, 1);
        assert!((q.c()[(0, 0)] - cx(1.0, 0.0)).norm() < 1e-15);
        let comp = orthogonal_complement(&p, &e1, &t).unwrap();
        assert_eq!(comp.dim(), 1);
        assert!((comp.columns[(1, 0)].norm() - 1.0).abs() < 1e-14);
        let whole = SubspaceBasis::whole(2);
        assert_eq!(orthogonal_complement(&p, &whole, &t).unwrap().dim(), 0);
        let prof = spectral_profile(&c, &t).unwrap();
        let subs = primary_decomposition(&p, &prof, &t).unwrap();
        assert_eq!(subs.len(), 2);
    }

    #[test]
    fn real_filtration_scalar() {
        let t = ToleranceConfig::default();
        let phi = 0.8f64;
        let c = from_rows(&[vec![cx(2.0 * phi.cos(), 2.0 * phi.sin())]]);
        let p = validate_pair(&from_real_rows(&[&[1.0]]), &c, &t).unwrap();
        let w = real_filtration(&p, 2.0, 1, &t).unwrap();
        assert_eq!(w.dim(), 1);
        let v = w.columns[(0, 0)];
        // v is a real multiple of e^{iφ/2}
        let r = v / cx((phi / 2.0).cos(), (phi / 2.0).sin());
        assert!(r.im.abs() < 1e-12 * r.norm());
    }
}
