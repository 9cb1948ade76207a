//! Projection validation and sector membership for single matrices.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::eigen::herm_eig;
use super::functional::{PsdSpectrum, RankTolerance};
use super::matrix::{CMatrix, CVector};
use crate::error::{Error, Result};

pub const PROJECTION_TOL: f64 = 1e-10;

/// Vertex `γ` and semi-angle `θ ∈ [0, π/2)` of a sector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorParams {
    theta: f64,
    gamma: f64,
}

impl SectorParams {
    pub fn new(theta: f64, gamma: f64) -> Result<Self> {
        if !(0.0..FRAC_PI_2).contains(&theta) || !gamma.is_finite() || !theta.tan().is_finite() {
            return Err(Error::InvalidModel(format!(
                "sector parameters theta={theta}, gamma={gamma} outside [0, pi/2) x R"
            )));
        }
        Ok(Self { theta, gamma })
    }

    pub fn from_tan(tan_theta: f64, gamma: f64) -> Result<Self> {
        Self::new(tan_theta.atan(), gamma)
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn tan_theta(&self) -> f64 {
        self.theta.tan()
    }

    /// Whether `z - γ·norm_sq` lies in the closed sector, with absolute slack `tol`.
    pub fn contains(&self, z: num_complex::Complex64, norm_sq: f64, tol: f64) -> bool {
        let re = z.re - self.gamma * norm_sq;
        re >= -tol && z.im.abs() <= self.tan_theta() * re.max(0.0) + tol
    }
}

/// Result of [`is_projection`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionCheck {
    pub is_projection: bool,
    pub hermitian_residual: f64,
    pub idempotent_residual: f64,
}

/// `‖Q − Q*‖_F` and `‖Q² − Q‖_F` against `1e−10 · max(1, ‖Q‖_F)`.
pub fn is_projection(q: &CMatrix) -> ProjectionCheck {
    let herm = q.hermitian_defect();
    let idem = if q.is_square() { (&(q * q) - q).frobenius_norm() } else { f64::INFINITY };
    let bound = PROJECTION_TOL * q.frobenius_norm().max(1.0);
    ProjectionCheck {
        is_projection: q.is_finite() && herm < bound && idem < bound,
        hermitian_residual: herm,
        idempotent_residual: idem,
    }
}

/// Eigenvector of the smallest eigenvalue when it falls below `−rel_eps · scale`.
pub fn psd_violation(m: &CMatrix, scale: f64, rel_eps: f64) -> Result<Option<(f64, CVector)>> {
    let eig = herm_eig(&m.hermitian_part())?;
    if eig.min() < -rel_eps * scale {
        Ok(Some((eig.min(), eig.vectors.column(0))))
    } else {
        Ok(None)
    }
}

/// Result of [`sector_check`]; `witness` is a direction `ξ` with `Cξ·ξ ∉ Σ_θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorCheck {
    pub holds: bool,
    pub witness: Option<CVector>,
}

/// Pencil test: `A` psd and `tanθ·A ± Im_H(C)` psd.
pub fn sector_check(cm: &CMatrix, theta: f64, tol: RankTolerance) -> SectorCheck {
    let a = cm.hermitian_part();
    let im = cm.imaginary_part();
    let t = theta.tan();
    let scale = (t.max(1.0) * a.frobenius_norm() + im.frobenius_norm()).max(f64::MIN_POSITIVE);
    let candidates = [a.clone(), &a.scale_real(t) + &im, &a.scale_real(t) - &im];
    for m in &candidates {
        match psd_violation(m, scale, tol.rel_eps()) {
            Ok(None) => {}
            Ok(Some((_, w))) => return SectorCheck { holds: false, witness: Some(w) },
            Err(_) => return SectorCheck { holds: false, witness: None },
        }
    }
    SectorCheck { holds: true, witness: None }
}

/// Smallest `tanθ` for which `C` passes the pencil test, or `None` if no finite
/// angle works (negative real part, or `Im_H(C)` leaving the range of `A`).
pub fn min_sector_tan(cm: &CMatrix, tol: RankTolerance) -> Option<f64> {
    let a = cm.hermitian_part();
    let im = cm.imaginary_part();
    let spec = PsdSpectrum::new(&a, tol).ok()?;
    let scale = (a.frobenius_norm() + im.frobenius_norm()).max(f64::MIN_POSITIVE);
    let pr = spec.range_projection();
    let leak = (&im - &(&(&pr * &im) * &pr)).frobenius_norm();
    if leak > 1e-9 * scale {
        return None;
    }
    let g = spec.pinv_sqrt();
    let m = &(&g * &im) * &g;
    herm_eig(&m.hermitian_part()).ok().map(|e| e.spectral_radius())
}
