//! Dense LU (partial pivoting) and Cholesky factorizations.

use nalgebra::{DMatrix, DVector};

use super::matrix::{CMatrix, CVector, C64};

/// Pivots below this fraction of the largest entry mark a matrix as singular.
const LU_PIVOT_TOL: f64 = 1e-14;

/// LU factorization `P A = L U` with row pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

fn to_dvector(b: &CVector) -> DVector<C64> {
    DVector::from_column_slice(&b.0)
}

impl Lu {
    /// Returns `None` when a pivot underflows relative to the matrix scale.
    pub fn factor(a: &CMatrix) -> Option<Self> {
        assert!(a.is_square());
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let lu = a.to_dmatrix().lu();
        let u = lu.u();
        if (0..a.rows()).any(|k| !(u[(k, k)].norm() > LU_PIVOT_TOL * scale)) {
            return None;
        }
        Some(Self { lu })
    }

    pub fn solve_vec(&self, b: &CVector) -> CVector {
        let x = self.lu.solve(&to_dvector(b)).expect("nonsingular by construction");
        CVector(x.iter().copied().collect())
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        CMatrix::from_dmatrix(&self.lu.solve(&b.to_dmatrix()).expect("nonsingular by construction"))
    }
}

/// Solves `A X = B`; `None` when `A` is numerically singular.
pub fn lu_solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    Lu::factor(a).map(|lu| lu.solve(b))
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    lu_solve(a, &CMatrix::identity(a.rows()))
}

/// Cholesky factor `A = L L*` of a Hermitian positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    chol: nalgebra::Cholesky<C64, nalgebra::Dyn>,
    l: CMatrix,
}

impl Cholesky {
    /// `None` if a squared pivot is not positive beyond `rel_tol · max diag`.
    pub fn factor(a: &CMatrix, rel_tol: f64) -> Option<Self> {
        assert!(a.is_square());
        let n = a.rows();
        let dmax = (0..n).map(|i| a[(i, i)].re).fold(0.0, f64::max);
        let chol = nalgebra::Cholesky::new(a.hermitian_part().to_dmatrix())?;
        let l: DMatrix<C64> = chol.l();
        if (0..n).any(|i| !(l[(i, i)].re.powi(2) > rel_tol * dmax)) {
            return None;
        }
        Some(Self { l: CMatrix::from_dmatrix(&l), chol })
    }

    pub fn factor_matrix(&self) -> &CMatrix {
        &self.l
    }

    /// Smallest squared pivot over largest, a cheap conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let n = self.l.rows();
        if n == 0 {
            return 1.0;
        }
        let piv: Vec<f64> = (0..n).map(|i| self.l[(i, i)].re.powi(2)).collect();
        let mx = piv.iter().cloned().fold(0.0, f64::max);
        let mn = piv.iter().cloned().fold(f64::INFINITY, f64::min);
        mn / mx
    }

    pub fn solve_vec(&self, b: &CVector) -> CVector {
        CVector(self.chol.solve(&to_dvector(b)).iter().copied().collect())
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        CMatrix::from_dmatrix(&self.chol.solve(&b.to_dmatrix()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::matrix::c;

    #[test]
    fn lu_solves_complex_system() {
        let a = CMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0)],
            vec![c(1.0, -1.0), c(0.0, 0.0), c(3.0, 0.0)],
            vec![c(2.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)],
        ]);
        let x = CVector(vec![c(1.0, 0.0), c(-1.0, 2.0), c(0.5, 0.5)]);
        let b = a.mul_vec(&x);
        let got = Lu::factor(&a).unwrap().solve_vec(&b);
        assert!((&got - &x).norm() < 1e-13);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(Lu::factor(&a).is_none());
    }

    #[test]
    fn cholesky_solves_hermitian_pd() {
        let r = CMatrix::from_rows(&[vec![c(1.0, 0.5), c(0.2, 0.0)], vec![c(-0.3, 1.0), c(2.0, 0.0)]]);
        let a = &(&r * &r.adjoint()) + &CMatrix::identity(2);
        let ch = Cholesky::factor(&a, 1e-14).unwrap();
        let l = ch.factor_matrix();
        assert!((&(l * &l.adjoint()) - &a).frobenius_norm() < 1e-13);
        let b = CVector(vec![c(1.0, 1.0), c(0.0, -2.0)]);
        let x = ch.solve_vec(&b);
        assert!((&a.mul_vec(&x) - &b).norm() < 1e-13);
    }

    #[test]
    fn cholesky_rejects_semidefinite() {
        let a = CMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(Cholesky::factor(&a, 1e-12).is_none());
    }
}
