//! Per-eigenvalue normalizers. Each one takes a pair living on a single
//! cluster space, emits one chain realizing one canonical block, and the
//! peeling loop recurses into the ℓ-orthogonal complement.

mod negative;
mod nonreal;
mod positive;
mod zero;

pub use negative::normalize_negative;
pub use nonreal::normalize_nonreal;
pub use positive::{fourier_seed_angle, normalize_positive, positive_chain_trace, toeplitz_rescale, PositiveTrace};
pub use zero::normalize_zero;

pub(crate) use negative::negative_chain;
pub(crate) use nonreal::nonreal_chain;
pub(crate) use positive::positive_chain;
pub(crate) use zero::zero_chain;

use num_complex::Complex64;

use crate::atlas::{build_pair_block, CanonicalBlock, Family};
use crate::error::{PairError, Result};
use crate::linalg::{conj, conj_vec, kernel_with_dim, norm, real_lstsq, CMatrix, CVector};
use crate::pair::SelfAdjointPair;
use crate::spectral::{invariance_residual, spectral_profile, ClusterProfile, SubspaceBasis, SubspaceTag};
use crate::tolerance::ToleranceConfig;

/// Chain vectors (as columns, in the coordinates of the pair they were
/// computed for) realizing one canonical block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainBasis {
    pub vectors: CMatrix,
    pub block: CanonicalBlock,
}

#[inline]
pub(crate) fn anti(c: &CMatrix, v: &CVector) -> CVector {
    c * conj_vec(v)
}

#[inline]
pub(crate) fn ell(h: &CMatrix, v: &CVector, w: &CVector) -> Complex64 {
    crate::linalg::ell(h, v, w)
}

pub(crate) fn apply_pow(m: &CMatrix, v: &CVector, p: usize) -> CVector {
    let mut out = v.clone();
    for _ in 0..p {
        out = m * out;
    }
    out
}

/// Solve `f(x) = 0` for an exactly affine `f: ℝ^n → ℝ^m` by probing the unit
/// directions and taking the least-norm solution; one refinement pass.
pub(crate) fn solve_affine<F: Fn(&[f64]) -> Vec<f64>>(f: F, nvars: usize) -> Result<Vec<f64>> {
    let mut x = vec![0.0; nvars];
    for _ in 0..2 {
        let f0 = f(&x);
        let m = f0.len();
        let mut jac = vec![vec![0.0; nvars]; m];
        for j in 0..nvars {
            let mut xp = x.clone();
            xp[j] += 1.0;
            let fj = f(&xp);
            for i in 0..m {
                jac[i][j] = fj[i] - f0[i];
            }
        }
        let rhs: Vec<f64> = f0.iter().map(|v| -v).collect();
        let dx = real_lstsq(&jac, &rhs, 1e-12)?;
        for j in 0..nvars {
            x[j] += dx[j];
        }
    }
    Ok(x)
}

/// Check that the chain realizes `(target_h, target_c)` on `(h, c)`.
pub(crate) fn check_chain(
    h: &CMatrix,
    c: &CMatrix,
    e: &CMatrix,
    block: &CanonicalBlock,
    tol: &ToleranceConfig,
    what: &str,
) -> Result<()> {
    let (th, tc) = build_pair_block(block)?;
    let g = e.adjoint() * h * e;
    let en = norm(e).max(1.0);
    let hs = norm(h).max(f64::MIN_POSITIVE) * en * en;
    let rg = norm(&(g - th)) / hs;
    let img = c * conj(e);
    let rc = norm(&(img - e * tc)) / (norm(c).max(1.0) * en);
    if !(rg <= tol.verify_tol && rc <= tol.verify_tol) {
        return Err(PairError::Numerical(format!(
            "{what} chain residuals too large (Gram {rg:.2e}, operator {rc:.2e})"
        )));
    }
    Ok(())
}

/// Peel every block of one cluster. `h`, `c` live on the cluster space in
/// orthonormal coordinates; returned chain vectors use the same coordinates.
/// `cscale` is the norm of the ambient operator, used for invariance checks.
pub(crate) fn normalize_cluster(
    h: &CMatrix,
    c: &CMatrix,
    cluster: &ClusterProfile,
    cscale: f64,
    tol: &ToleranceConfig,
) -> Result<Vec<ChainBasis>> {
    let d = h.nrows();
    let mut y = CMatrix::identity(d, d);
    let mut out = Vec::new();
    for k in cluster.block_sequence() {
        let hy = y.adjoint() * h * &y;
        let cy = y.adjoint() * c * conj(&y);
        let chain = match cluster.family {
            Family::PositiveReal => positive_chain(&hy, &cy, cluster.lambda.re, k, tol)?,
            Family::Zero => zero_chain(&hy, &cy, k, tol)?,
            Family::Negative => negative_chain(&hy, &cy, cluster.lambda_sq, k, tol)?,
            Family::Nonreal => nonreal_chain(&hy, &cy, cluster.lambda_sq, k, tol)?,
        };
        let dim = chain.vectors.ncols();
        let rest = y.ncols() - dim;
        let comp = if rest > 0 {
            let (z, _) = kernel_with_dim(&(chain.vectors.adjoint() * &hy), rest)?;
            z
        } else {
            CMatrix::zeros(y.ncols(), 0)
        };
        out.push(ChainBasis { vectors: &y * &chain.vectors, block: chain.block });
        y = &y * comp;
        if y.ncols() > 0 {
            let r = invariance_residual(c, &y) * norm(c) / cscale.max(f64::MIN_POSITIVE);
            if r > tol.verify_tol {
                return Err(PairError::Numerical(format!("complement lost A-invariance ({r:.2e})")));
            }
        }
    }
    if y.ncols() != 0 {
        return Err(PairError::Numerical(format!("{} dimensions left after peeling", y.ncols())));
    }
    Ok(out)
}

/// Shared front end of the public normalizers: the whole space of `p` must be
/// one cluster of the expected family; returns that cluster.
fn single_cluster(p: &SelfAdjointPair, family: Family, tol: &ToleranceConfig) -> Result<ClusterProfile> {
    let prof = spectral_profile(p.c(), tol)?;
    if prof.clusters.len() != 1 || prof.clusters[0].family != family {
        return Err(PairError::InvalidArgument(format!(
            "expected a single {} cluster, found {:?}",
            family.name(),
            prof.clusters.iter().map(|c| (c.family.name(), c.lambda_sq)).collect::<Vec<_>>()
        )));
    }
    Ok(prof.clusters[0].clone())
}

/// Complement of a chain inside the space of `p`.
fn complement_of(p: &SelfAdjointPair, chain: &ChainBasis) -> Result<SubspaceBasis> {
    let rest = p.n - chain.vectors.ncols();
    let (z, _) = kernel_with_dim(&(chain.vectors.adjoint() * p.h()), rest)?;
    Ok(SubspaceBasis::new(z, SubspaceTag::Complement))
}

pub(crate) fn real_parts_ok(vals: &[Complex64], scale: f64, tol: f64) -> bool {
    vals.iter().all(|z| z.im.abs() <= tol * scale.max(f64::MIN_POSITIVE))
}
