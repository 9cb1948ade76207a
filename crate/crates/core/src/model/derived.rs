use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointwise::{CMatrix, CVector, PsdSpectrum, RankTolerance, I};

use super::coefficients::CoefficientSet;
use super::grid::GridSpec;

pub const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Pointwise fields derived from the principal and lower-order coefficients.
///
/// Per cell: `A = (C + C*)/2`, `A^{1/2}`, `g(A)`, `Z = g(A) Im_H(C) g(A)`,
/// `X = g(A) conj(b)` and `Y = g(A) d`, so that `A^{1/2}(I + iZ)A^{1/2} = C`,
/// `A^{1/2} X = conj(b)` and `A^{1/2} Y = d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedFields {
    pub grid: GridSpec,
    pub a: Vec<CMatrix>,
    pub a_sqrt: Vec<CMatrix>,
    pub g: Vec<CMatrix>,
    pub z: Vec<CMatrix>,
    pub x: Vec<CVector>,
    pub y: Vec<CVector>,
}

#[derive(Clone, Debug)]
struct CellFields {
    a: CMatrix,
    a_sqrt: CMatrix,
    g: CMatrix,
    z: CMatrix,
    x: CVector,
    y: CVector,
}

fn derive_cell(coeffs: &CoefficientSet, cell: usize, tol: RankTolerance) -> Result<CellFields> {
    let f = coeffs.fields();
    let cm = &f.c[cell];
    let a = cm.hermitian_part();
    let spec = PsdSpectrum::new(&a, tol).map_err(|e| Error::SectorViolation {
        cell,
        detail: format!("Hermitian part not psd: {e}"),
        witness: None,
    })?;
    let a_sqrt = spec.sqrt();
    let g = spec.pinv_sqrt();
    let z = (&(&g * &cm.imaginary_part()) * &g).hermitian_part();
    let bbar = f.b[cell].conj();
    let x = g.mul_vec(&bbar);
    let y = g.mul_vec(&f.d[cell]);

    let d = cm.rows();
    let recon = &(&a_sqrt * &(&CMatrix::identity(d) + &z.scale(I))) * &a_sqrt;
    let err = (&recon - cm).frobenius_norm();
    if err > RECONSTRUCTION_TOL * cm.frobenius_norm().max(1.0) {
        return Err(Error::SectorViolation {
            cell,
            detail: format!("A^1/2 (I + iZ) A^1/2 misses C by {err:.3e}; Im C leaves range(A)"),
            witness: None,
        });
    }
    let t = coeffs.theta().tan();
    let znorm = crate::pointwise::herm_eig(&z)?.spectral_radius();
    if znorm > t + RECONSTRUCTION_TOL * t.max(1.0) {
        return Err(Error::SectorViolation {
            cell,
            detail: format!("|Z| = {znorm:.6e} exceeds tan(theta) = {t:.6e}"),
            witness: None,
        });
    }
    for (name, target, sol) in [("conj(b)", &bbar, &x), ("d", &f.d[cell], &y)] {
        let res = (&a_sqrt.mul_vec(sol) - target).norm();
        if res > RECONSTRUCTION_TOL * target.norm().max(1.0) {
            return Err(Error::DominationViolation {
                cell,
                detail: format!("A^1/2 solve for {name} leaves residual {res:.3e}"),
            });
        }
        let k = coeffs.k_bound();
        if sol.norm() > k + RECONSTRUCTION_TOL * k.max(1.0) {
            return Err(Error::DominationViolation {
                cell,
                detail: format!("pulled-back {name} has norm {:.6e} > K = {k}", sol.norm()),
            });
        }
    }
    Ok(CellFields { a, a_sqrt, g, z, x, y })
}

/// Computes the derived fields cell by cell, failing on the first bad cell.
pub fn derive_fields(coeffs: &CoefficientSet, tol: RankTolerance) -> Result<DerivedFields> {
    let cells: Vec<Result<CellFields>> =
        (0..coeffs.grid().n_cells()).into_par_iter().map(|c| derive_cell(coeffs, c, tol)).collect();
    let n = cells.len();
    let mut out = DerivedFields {
        grid: coeffs.grid().clone(),
        a: Vec::with_capacity(n),
        a_sqrt: Vec::with_capacity(n),
        g: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
    };
    for cell in cells {
        let cf = cell?;
        out.a.push(cf.a);
        out.a_sqrt.push(cf.a_sqrt);
        out.g.push(cf.g);
        out.z.push(cf.z);
        out.x.push(cf.x);
        out.y.push(cf.y);
    }
    Ok(out)
}

/// Worst-case residuals of the derived-field identities over all cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DerivedResiduals {
    pub reconstruction: f64,
    pub x_solve: f64,
    pub y_solve: f64,
    pub z_hermitian: f64,
    pub z_norm_max: f64,
    pub x_norm_max: f64,
    pub y_norm_max: f64,
}

impl DerivedFields {
    pub fn n_cells(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `A^{1/2}(I + iZ)A^{1/2}` at one cell.
    pub fn reconstructed_c(&self, cell: usize) -> CMatrix {
        let d = self.dim();
        let s = &self.a_sqrt[cell];
        &(s * &(&CMatrix::identity(d) + &self.z[cell].scale(I))) * s
    }

    pub fn residuals(&self, coeffs: &CoefficientSet) -> DerivedResiduals {
        let f = coeffs.fields();
        let mut r = DerivedResiduals::default();
        for cell in 0..self.n_cells() {
            let s = &self.a_sqrt[cell];
            r.reconstruction = r.reconstruction.max((&self.reconstructed_c(cell) - &f.c[cell]).frobenius_norm());
            r.x_solve = r.x_solve.max((&s.mul_vec(&self.x[cell]) - &f.b[cell].conj()).norm());
            r.y_solve = r.y_solve.max((&s.mul_vec(&self.y[cell]) - &f.d[cell]).norm());
            r.z_hermitian = r.z_hermitian.max(self.z[cell].hermitian_defect());
            if let Ok(e) = crate::pointwise::herm_eig(&self.z[cell]) {
                r.z_norm_max = r.z_norm_max.max(e.spectral_radius());
            }
            r.x_norm_max = r.x_norm_max.max(self.x[cell].norm());
            r.y_norm_max = r.y_norm_max.max(self.y[cell].norm());
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FormCoefficients;
    use crate::pointwise::{c, C64};

    #[test]
    fn identity_principal_part() {
        let g = GridSpec::new(vec![[0.0, 1.0]; 2], vec![2, 1]).unwrap();
        let mut f = FormCoefficients::zeros(&g);
        f.c = vec![CMatrix::identity(2); 2];
        let cs = CoefficientSet::new(f, 0.0, 1.0).unwrap();
        let d = derive_fields(&cs, RankTolerance::default()).unwrap();
        for cell in 0..2 {
            assert!(d.z[cell].frobenius_norm() < 1e-15);
            assert!(d.x[cell].norm() < 1e-15 && d.y[cell].norm() < 1e-15);
        }
    }

    #[test]
    fn indicator_coefficients_give_indicator_fields() {
        // d = 1, C = b = c0 = 1 on the first cell, d = -1 there; zero elsewhere.
        let g = GridSpec::uniform_1d(0.0, 1.0, 2).unwrap();
        let one = c(1.0, 0.0);
        let f = FormCoefficients::new(
            g,
            vec![CMatrix::identity(1), CMatrix::zeros(1, 1)],
            vec![CVector(vec![one]), CVector::zeros(1)],
            vec![CVector(vec![-one]), CVector::zeros(1)],
            vec![one, C64::new(0.0, 0.0)],
        )
        .unwrap();
        let cs = CoefficientSet::new(f, std::f64::consts::FRAC_PI_4, 1.0).unwrap();
        let d = derive_fields(&cs, RankTolerance::default()).unwrap();
        assert_eq!(d.a_sqrt[0][(0, 0)], one);
        assert_eq!(d.a_sqrt[1][(0, 0)], c(0.0, 0.0));
        assert_eq!(d.z[0][(0, 0)], c(0.0, 0.0));
        assert_eq!(d.x[0][0], one);
        assert_eq!(d.y[0][0], -one);
        assert_eq!(d.x[1][0], c(0.0, 0.0));
    }
}
