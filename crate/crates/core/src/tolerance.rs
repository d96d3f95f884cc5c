use crate::error::{PairError, Result};

/// Thresholds shared by every numerical routine. All are relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Singular values at or below `rank_tol * largest` count as zero.
    pub rank_tol: f64,
    /// Relative residual accepted by every verification.
    pub verify_tol: f64,
    /// Radius used when grouping eigenvalues of `B = C conj(C)`.
    pub cluster_tol: f64,
    /// Largest accepted matrix dimension.
    pub max_dim: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { rank_tol: 1e-9, verify_tol: 1e-6, cluster_tol: 1e-7, max_dim: 64 }
    }
}

impl ToleranceConfig {
    pub fn new(rank_tol: f64, verify_tol: f64, cluster_tol: f64) -> Result<Self> {
        let t = ToleranceConfig { rank_tol, verify_tol, cluster_tol, ..Default::default() };
        t.validate()?;
        Ok(t)
    }

    /// Rejects non-positive thresholds. A non-recommended ordering only logs a warning.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("verify_tol", self.verify_tol),
            ("cluster_tol", self.cluster_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(PairError::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_dim == 0 {
            return Err(PairError::InvalidArgument("max_dim must be positive".into()));
        }
        if !self.ordering_recommended() {
            log::warn!(
                "tolerance ordering rank_tol < cluster_tol < verify_tol not satisfied: {:?}",
                self
            );
        }
        Ok(())
    }

    pub fn ordering_recommended(&self) -> bool {
        self.rank_tol < self.cluster_tol && self.cluster_tol < self.verify_tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_ordered() {
        let t = ToleranceConfig::default();
        assert!(t.ordering_recommended());
        assert!(t.validate().is_ok());
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(ToleranceConfig::new(0.0, 1e-6, 1e-7).is_err());
        assert!(ToleranceConfig::new(1e-9, -1.0, 1e-7).is_err());
        assert!(ToleranceConfig::new(1e-9, 1e-6, f64::NAN).is_err());
    }

    #[test]
    fn misordering_is_only_a_warning() {
        assert!(ToleranceConfig::new(1e-3, 1e-6, 1e-7).is_ok());
    }
}
