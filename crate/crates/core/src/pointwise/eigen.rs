//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Rank decisions downstream compare eigenvalues against `1e-12 · ‖A‖`, so
//! exact zeros must come back at roundoff level. Jacobi delivers that for the
//! small matrices used here.

use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};

/// Relative Frobenius tolerance for the Hermitian precondition.
pub const HERMITIAN_TOL: f64 = 1e-12;

const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `M = U diag(values) U*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|x| x)
    }

    /// `U diag(f(λ)) U*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| u[(i, k)] * fv[k] * u[(j, k)].conj()).sum()
        })
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
pub fn herm_eig(m: &CMatrix) -> Result<HermEig> {
    assert!(m.is_square(), "herm_eig needs a square matrix");
    let scale = m.frobenius_norm();
    let defect = m.hermitian_defect();
    if !m.is_finite() || defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { defect: if scale > 0.0 { defect / scale } else { defect } });
    }
    Ok(jacobi(&m.hermitian_part()))
}

fn jacobi(m0: &CMatrix) -> HermEig {
    let n = m0.rows();
    let mut a = m0.clone();
    let mut u = CMatrix::identity(n);
    let target = OFF_DIAGONAL_TOL * m0.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut u, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    HermEig { values, vectors }
}

fn rotate(a: &mut CMatrix, u: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if abs < 1e-300 || abs <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    // Phase-rotate the pair to a real symmetric 2×2 problem, then apply the
    // classical rotation. G = diag(1, e^{-iφ}) · [[c, s], [-s, c]].
    let phase = apq / abs;
    let tau = (aqq - app) / (2.0 * abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let e = phase.conj();
    let g00 = C64::new(cs, 0.0);
    let g01 = C64::new(sn, 0.0);
    let g10 = e * (-sn);
    let g11 = e * cs;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g00 + akq * g10;
        a[(k, q)] = akp * g01 + akq * g11;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
        a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let ukp = u[(k, p)];
        let ukq = u[(k, q)];
        u[(k, p)] = ukp * g00 + ukq * g10;
        u[(k, q)] = ukp * g01 + ukq * g11;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::matrix::c;

    fn unitary_defect(u: &CMatrix) -> f64 {
        (&(&u.adjoint() * u) - &CMatrix::identity(u.rows())).frobenius_norm()
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = herm_eig(&CMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert!(unitary_defect(&e.vectors) < 1e-14);
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let e = herm_eig(&CMatrix::from_real_diag(&[4.0, 0.0])).unwrap();
        assert_eq!(e.values, vec![0.0, 4.0]);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = CMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]);
        let e = herm_eig(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!((&e.reconstruct() - &m).frobenius_norm() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_matrix() {
        let e = herm_eig(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert!(unitary_defect(&e.vectors) < 1e-15);
    }

    #[test]
    fn low_rank_gram_has_roundoff_zeros() {
        use crate::random::{matrix, rng};
        let mut r = rng(7);
        for _ in 0..200 {
            let b = matrix(&mut r, 3, 1);
            let a = (&b * &b.adjoint()).hermitian_part();
            let e = herm_eig(&a).unwrap();
            let scale = e.spectral_radius();
            assert!(e.values[0].abs() < 1e-14 * scale && e.values[1].abs() < 1e-14 * scale);
            assert!((&e.reconstruct() - &a).frobenius_norm() < 1e-14 * scale);
        }
    }
}
