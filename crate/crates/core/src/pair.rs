//! Hermitian forms, antilinear operators and the self-adjoint pairs they make.
//!
//! Convention: `H[i][j] = ℓ(e_j, e_i)`, so `ℓ(v, w) = w* H v`, and the
//! antilinear operator acts as `v ↦ C conj(v)`.

use crate::error::{PairError, Result};
use crate::linalg::{
    conj, hermitian_diagonalize, inverse, is_finite, norm, require_square, CMatrix, CVector,
};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    matrix: CMatrix,
}

impl HermitianForm {
    /// Checks Hermitian symmetry and nondegeneracy.
    pub fn new(matrix: CMatrix, tol: &ToleranceConfig) -> Result<Self> {
        require_square(&matrix)?;
        if !is_finite(&matrix) {
            return Err(PairError::NonFinite);
        }
        let r = hermitian_residual(&matrix);
        if r > tol.verify_tol {
            return Err(PairError::NotHermitian { residual: r });
        }
        let d = degeneracy_ratio(&matrix, tol)?;
        if d <= tol.rank_tol {
            return Err(PairError::Degenerate { residual: d });
        }
        Ok(HermitianForm { matrix })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        HermitianForm { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `ℓ(v, w)`.
    pub fn eval(&self, v: &CVector, w: &CVector) -> num_complex::Complex64 {
        crate::linalg::ell(&self.matrix, v, w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearOperator {
    matrix: CMatrix,
}

impl AntilinearOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        require_square(&matrix)?;
        if !is_finite(&matrix) {
            return Err(PairError::NonFinite);
        }
        Ok(AntilinearOperator { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        crate::linalg::apply_anti(&self.matrix, v)
    }

    /// Matrix `P_m` with `A^m v = P_m conj^m(v)`.
    pub fn power(&self, m: usize) -> CMatrix {
        anti_power(&self.matrix, m)
    }
}

/// `P_0 = I`, `P_m = C conj(P_{m−1})`.
pub fn anti_power(c: &CMatrix, m: usize) -> CMatrix {
    let mut p = CMatrix::identity(c.nrows(), c.ncols());
    for _ in 0..m {
        p = c * conj(&p);
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfAdjointPair {
    pub form: HermitianForm,
    pub op: AntilinearOperator,
    pub n: usize,
}

impl SelfAdjointPair {
    pub fn h(&self) -> &CMatrix {
        self.form.matrix()
    }

    pub fn c(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub(crate) fn new_unchecked(h: CMatrix, c: CMatrix) -> Self {
        let n = h.nrows();
        SelfAdjointPair {
            form: HermitianForm::new_unchecked(h),
            op: AntilinearOperator { matrix: c },
            n,
        }
    }
}

/// Residuals of the three pair conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDiagnostics {
    /// `‖H − H*‖ / ‖H‖`.
    pub hermitian: f64,
    /// Smallest `|eigenvalue|` of the Hermitian part over the largest.
    pub nondegeneracy: f64,
    /// `‖(HC)ᵀ − HC‖ / ‖HC‖`.
    pub self_adjoint: f64,
}

fn hermitian_residual(h: &CMatrix) -> f64 {
    let s = norm(h);
    let r = norm(&(h - h.adjoint()));
    if r == 0.0 {
        0.0
    } else {
        r / s
    }
}

fn degeneracy_ratio(h: &CMatrix, tol: &ToleranceConfig) -> Result<f64> {
    if h.nrows() == 0 {
        return Ok(1.0);
    }
    let herm = (h + h.adjoint()) * crate::linalg::cx(0.5, 0.0);
    let loose = ToleranceConfig { verify_tol: f64::INFINITY, ..*tol };
    let (_, d) = hermitian_diagonalize(&herm, &loose)?;
    let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dmin = d.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    Ok(if dmax == 0.0 { 0.0 } else { dmin / dmax })
}

fn self_adjoint_residual(h: &CMatrix, c: &CMatrix) -> f64 {
    let hc = h * c;
    let r = norm(&(hc.transpose() - &hc));
    if r == 0.0 {
        0.0
    } else {
        r / norm(&hc)
    }
}

/// Compute all three residuals without judging them.
pub fn diagnose_pair(h: &CMatrix, c: &CMatrix, tol: &ToleranceConfig) -> Result<PairDiagnostics> {
    let n = require_square(h)?;
    let m = require_square(c)?;
    if n != m {
        return Err(PairError::DimensionMismatch { expected: n, got: m });
    }
    if n > tol.max_dim {
        return Err(PairError::TooLarge(n));
    }
    if !is_finite(h) || !is_finite(c) {
        return Err(PairError::NonFinite);
    }
    Ok(PairDiagnostics {
        hermitian: hermitian_residual(h),
        nondegeneracy: degeneracy_ratio(h, tol)?,
        self_adjoint: self_adjoint_residual(h, c),
    })
}

/// Accept `(H, C)` iff H is Hermitian, nondegenerate and `HC` is symmetric.
/// The error names the first violated condition with its residual.
pub fn validate_pair(h: &CMatrix, c: &CMatrix, tol: &ToleranceConfig) -> Result<SelfAdjointPair> {
    let d = diagnose_pair(h, c, tol)?;
    if d.hermitian > tol.verify_tol {
        return Err(PairError::NotHermitian { residual: d.hermitian });
    }
    if d.nondegeneracy <= tol.rank_tol {
        return Err(PairError::Degenerate { residual: d.nondegeneracy });
    }
    if d.self_adjoint > tol.verify_tol {
        return Err(PairError::NotSelfAdjoint { residual: d.self_adjoint });
    }
    Ok(SelfAdjointPair::new_unchecked(h.clone(), c.clone()))
}

/// Raw action `((M⁻¹)* H M⁻¹, M C conj(M)⁻¹)` given `M⁻¹`.
pub fn transform_with_inverse(h: &CMatrix, c: &CMatrix, m: &CMatrix, minv: &CMatrix) -> (CMatrix, CMatrix) {
    (minv.adjoint() * h * minv, m * c * conj(minv))
}

/// Change of basis with transition matrix `m`; the result is re-validated.
pub fn apply_basis_change(p: &SelfAdjointPair, m: &CMatrix, tol: &ToleranceConfig) -> Result<SelfAdjointPair> {
    let n = require_square(m)?;
    if n != p.n {
        return Err(PairError::DimensionMismatch { expected: p.n, got: n });
    }
    let minv = inverse(m, tol)?;
    let (h, c) = transform_with_inverse(p.h(), p.c(), m, &minv);
    validate_pair(&h, &c, tol)
}

/// `B = C conj(C)`, the matrix of the linear operator `A²`.
pub fn square_operator(c: &AntilinearOperator) -> CMatrix {
    c.matrix() * conj(c.matrix())
}

/// Matrix of the symmetric bilinear form `ℓ′(v, w) = ℓ(w, Av)`, which is `HC`.
pub fn symmetric_form_of_pair(p: &SelfAdjointPair) -> CMatrix {
    p.h() * p.c()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cx, from_real_rows, from_rows, CVector};

    fn s2() -> CMatrix {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    fn rot() -> CMatrix {
        from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])
    }

    #[test]
    fn validate_examples() {
        let t = ToleranceConfig::default();
        assert!(validate_pair(&s2(), &rot(), &t).is_ok());
        let e = validate_pair(&CMatrix::identity(2, 2), &rot(), &t).unwrap_err();
        assert!(matches!(e, PairError::NotSelfAdjoint { .. }));
        let e = validate_pair(&from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]), &CMatrix::identity(2, 2), &t)
            .unwrap_err();
        assert!(matches!(e, PairError::Degenerate { .. }));
        let e = validate_pair(&from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]), &CMatrix::identity(2, 2), &t)
            .unwrap_err();
        assert!(matches!(e, PairError::NotHermitian { .. }));
    }

    #[test]
    fn scalar_phase_action() {
        let t = ToleranceConfig::default();
        let p = validate_pair(&from_real_rows(&[&[2.0]]), &from_rows(&[vec![cx(1.0, 0.5)]]), &t).unwrap();
        let th = 0.7f64;
        let m = from_rows(&[vec![cx(th.cos(), th.sin())]]);
        let q = apply_basis_change(&p, &m, &t).unwrap();
        assert!((q.h()[(0, 0)] - cx(2.0, 0.0)).norm() < 1e-14);
        let expect = cx((2.0 * th).cos(), (2.0 * th).sin()) * cx(1.0, 0.5);
        assert!((q.c()[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn identity_change_is_identity() {
        let t = ToleranceConfig::default();
        let p = validate_pair(&s2(), &rot(), &t).unwrap();
        let q = apply_basis_change(&p, &CMatrix::identity(2, 2), &t).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn square_examples() {
        let op = AntilinearOperator::new(rot()).unwrap();
        assert!((square_operator(&op) + CMatrix::identity(2, 2)).norm() == 0.0);
        let op = AntilinearOperator::new(CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(square_operator(&op), CMatrix::zeros(3, 3));
    }

    #[test]
    fn symmetric_form_examples() {
        let t = ToleranceConfig::default();
        let p = validate_pair(&s2(), &rot(), &t).unwrap();
        assert_eq!(symmetric_form_of_pair(&p), from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]));
        let p = validate_pair(&CMatrix::identity(3, 3), &CMatrix::identity(3, 3), &t).unwrap();
        assert_eq!(symmetric_form_of_pair(&p), CMatrix::identity(3, 3));
    }

    #[test]
    fn anti_power_matches_iteration() {
        let c = from_rows(&[vec![cx(1.0, 1.0), cx(0.0, 2.0)], vec![cx(-1.0, 0.0), cx(0.5, -0.5)]]);
        let op = AntilinearOperator::new(c.clone()).unwrap();
        let v = CVector::from_vec(vec![cx(0.3, -0.7), cx(1.2, 0.1)]);
        let a3 = op.apply(&op.apply(&op.apply(&v)));
        let p3 = op.power(3);
        assert!((a3 - p3 * v.map(|z| z.conj())).norm() < 1e-13);
    }
}
