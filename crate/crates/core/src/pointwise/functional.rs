//! Functional calculus on Hermitian positive semi-definite matrices.

use serde::{Deserialize, Serialize};

use super::eigen::{herm_eig, HermEig};
use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTolerance {
    rel_eps: f64,
}

impl RankTolerance {
    pub const DEFAULT_REL_EPS: f64 = 1e-12;

    pub fn new(rel_eps: f64) -> Result<Self> {
        if !(rel_eps > 0.0 && rel_eps < 1.0) {
            return Err(Error::InvalidModel(format!("rank tolerance {rel_eps} outside (0, 1)")));
        }
        Ok(Self { rel_eps })
    }

    #[inline]
    pub fn rel_eps(&self) -> f64 {
        self.rel_eps
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self { rel_eps: Self::DEFAULT_REL_EPS }
    }
}

/// Eigendecomposition of a psd matrix with its numerical-rank cutoff applied.
#[derive(Clone, Debug)]
pub struct PsdSpectrum {
    eig: HermEig,
    cutoff: f64,
}

impl PsdSpectrum {
    pub fn new(a: &CMatrix, tol: RankTolerance) -> Result<Self> {
        let eig = herm_eig(a)?;
        let scale = eig.spectral_radius();
        let cutoff = tol.rel_eps() * scale;
        if eig.min() < -cutoff {
            return Err(Error::NotPsd { eigenvalue: eig.min() });
        }
        Ok(Self { eig, cutoff })
    }

    #[inline]
    fn is_zero(&self, l: f64) -> bool {
        l < self.cutoff || l <= 0.0
    }

    pub fn eig(&self) -> &HermEig {
        &self.eig
    }

    pub fn rank(&self) -> usize {
        self.eig.values.iter().filter(|&&l| !self.is_zero(l)).count()
    }

    pub fn sqrt(&self) -> CMatrix {
        self.eig.apply_fn(|l| if self.is_zero(l) { 0.0 } else { l.sqrt() })
    }

    /// `g(A)` with `g(t) = t^{-1/2}` on the numerical range and `g(0) = 0`.
    pub fn pinv_sqrt(&self) -> CMatrix {
        self.eig.apply_fn(|l| if self.is_zero(l) { 0.0 } else { 1.0 / l.sqrt() })
    }

    /// Orthogonal projection onto the numerical range.
    pub fn range_projection(&self) -> CMatrix {
        self.eig.apply_fn(|l| if self.is_zero(l) { 0.0 } else { 1.0 })
    }
}

pub fn psd_sqrt(a: &CMatrix, tol: RankTolerance) -> Result<CMatrix> {
    Ok(PsdSpectrum::new(a, tol)?.sqrt())
}

pub fn pinv_sqrt(a: &CMatrix, tol: RankTolerance) -> Result<CMatrix> {
    Ok(PsdSpectrum::new(a, tol)?.pinv_sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::matrix::c;

    #[test]
    fn identity_fixed_points() {
        let id = CMatrix::identity(3);
        let t = RankTolerance::default();
        assert!((&psd_sqrt(&id, t).unwrap() - &id).frobenius_norm() < 1e-15);
        assert!((&pinv_sqrt(&id, t).unwrap() - &id).frobenius_norm() < 1e-15);
    }

    #[test]
    fn diag_four_zero() {
        let a = CMatrix::from_real_diag(&[4.0, 0.0]);
        let t = RankTolerance::default();
        let s = psd_sqrt(&a, t).unwrap();
        let g = pinv_sqrt(&a, t).unwrap();
        assert!((&s - &CMatrix::from_real_diag(&[2.0, 0.0])).frobenius_norm() < 1e-15);
        assert!((&g - &CMatrix::from_real_diag(&[0.5, 0.0])).frobenius_norm() < 1e-15);
    }

    #[test]
    fn rejects_negative_definite() {
        let a = CMatrix::from_real_diag(&[1.0, -0.5]);
        assert!(matches!(psd_sqrt(&a, RankTolerance::default()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn clamps_roundoff_negatives() {
        let a = CMatrix::from_real_diag(&[1.0, -1e-14]);
        let s = psd_sqrt(&a, RankTolerance::default()).unwrap();
        assert_eq!(s[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn tolerance_bounds() {
        assert!(RankTolerance::new(0.0).is_err());
        assert!(RankTolerance::new(1.0).is_err());
        assert!(RankTolerance::new(1e-10).is_ok());
    }
}
