//! Kernels for single complex d×d matrices: Hermitian eigendecomposition,
//! psd square roots, the pseudo-inverse square root `g(A)`, projection
//! validation and sector membership.

mod checks;
mod eigen;
mod functional;
mod matrix;
mod solve;

pub use checks::{
    is_projection, min_sector_tan, psd_violation, sector_check, ProjectionCheck, SectorCheck,
    SectorParams, PROJECTION_TOL,
};
pub use eigen::{herm_eig, HermEig, HERMITIAN_TOL};
pub use functional::{pinv_sqrt, psd_sqrt, PsdSpectrum, RankTolerance};
pub use matrix::{c, pairwise_sum, pairwise_sum_real, CMatrix, CVector, C64, I};
pub use solve::{inverse, lu_solve, Cholesky, Lu};
