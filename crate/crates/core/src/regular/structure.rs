use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DerivedFields, GridSpec};
use crate::pointwise::{herm_eig, is_projection, CMatrix, CVector, Lu, I};

/// Tolerance for the `W` solve and its defining identities.
pub const W_TOL: f64 = 1e-10;

/// `Q`, `P = I − Q` and `W = Q(I + iQZQ)^{-1}Q` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStructure {
    pub q: CMatrix,
    pub p: CMatrix,
    pub w: CMatrix,
}

/// Builds `P` and `W` from a projection `q` and Hermitian `z`.
pub fn cell_structure(q: &CMatrix, z: &CMatrix) -> Result<CellStructure> {
    cell_structure_at(0, q, z)
}

fn cell_structure_at(cell: usize, q: &CMatrix, z: &CMatrix) -> Result<CellStructure> {
    let chk = is_projection(q);
    if !chk.is_projection {
        return Err(Error::ProjectionInvalid {
            cell,
            herm: chk.hermitian_residual,
            idem: chk.idempotent_residual,
        });
    }
    let d = q.rows();
    if z.rows() != d || z.cols() != d {
        return Err(Error::GridMismatch(format!("cell {cell}: Q is {d}x{d} but Z is {}x{}", z.rows(), z.cols())));
    }
    let id = CMatrix::identity(d);
    let qzq = &(q * z) * q;
    let m = &id + &qzq.scale(I);
    let lu = Lu::factor(&m).ok_or_else(|| Error::SolveFailure {
        cell,
        detail: "I + iQZQ is numerically singular".into(),
    })?;
    let wt = lu.solve(q);
    let solve_res = (&(&m * &wt) - q).frobenius_norm();
    let scale = 1.0 + z.frobenius_norm();
    if !(solve_res < W_TOL * scale) {
        return Err(Error::SolveFailure { cell, detail: format!("solve residual {solve_res:.3e}") });
    }
    let w = q * &wt;
    Ok(CellStructure { p: &id - q, q: q.clone(), w })
}

/// Projection field `Q` with the derived `W` and `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularStructure {
    pub grid: GridSpec,
    pub q: Vec<CMatrix>,
    pub p: Vec<CMatrix>,
    pub w: Vec<CMatrix>,
}

impl SingularStructure {
    pub fn n_cells(&self) -> usize {
        self.q.len()
    }

    pub fn cell(&self, cell: usize) -> CellStructure {
        CellStructure { q: self.q[cell].clone(), p: self.p[cell].clone(), w: self.w[cell].clone() }
    }

    /// Largest `‖QZ − ZQ‖_F` over cells, with its cell.
    pub fn commutator_max(&self, derived: &DerivedFields) -> (f64, usize) {
        (0..self.n_cells())
            .map(|c| {
                let (q, z) = (&self.q[c], &derived.z[c]);
                ((&(q * z) - &(z * q)).frobenius_norm(), c)
            })
            .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
    }

    /// Largest `‖QZ(I − Q)A^{1/2}‖_F` over cells.
    pub fn qz_p_asqrt_max(&self, derived: &DerivedFields) -> f64 {
        (0..self.n_cells())
            .map(|c| (&(&(&self.q[c] * &derived.z[c]) * &self.p[c]) * &derived.a_sqrt[c]).frobenius_norm())
            .fold(0.0, f64::max)
    }

    /// Cells where `QA^{1/2}` and `A^{1/2}Q` differ by more than `tol`.
    pub fn range_mismatch_cells(&self, derived: &DerivedFields, tol: f64) -> Vec<usize> {
        (0..self.n_cells())
            .filter(|&c| {
                let (q, s) = (&self.q[c], &derived.a_sqrt[c]);
                (&(q * s) - &(s * q)).frobenius_norm() > tol * (1.0 + s.frobenius_norm())
            })
            .collect()
    }
}

pub fn build_singular_structure(q_field: Vec<CMatrix>, derived: &DerivedFields) -> Result<SingularStructure> {
    if q_field.len() != derived.n_cells() {
        return Err(Error::GridMismatch(format!(
            "Q field has {} cells, derived fields have {}",
            q_field.len(),
            derived.n_cells()
        )));
    }
    let cells: Vec<Result<CellStructure>> = q_field
        .par_iter()
        .enumerate()
        .map(|(c, q)| cell_structure_at(c, q, &derived.z[c]))
        .collect();
    let mut s = SingularStructure {
        grid: derived.grid.clone(),
        q: Vec::with_capacity(cells.len()),
        p: Vec::with_capacity(cells.len()),
        w: Vec::with_capacity(cells.len()),
    };
    for cs in cells {
        let cs = cs?;
        s.q.push(cs.q);
        s.p.push(cs.p);
        s.w.push(cs.w);
    }
    Ok(s)
}

/// `Q = 1_S · I` where `S` is a union of axis-aligned boxes; a cell belongs to
/// `S` when its center does.
pub fn indicator_projection(grid: &GridSpec, boxes: &[Vec<[f64; 2]>]) -> Result<Vec<CMatrix>> {
    let d = grid.dim();
    if boxes.iter().any(|b| b.len() != d) {
        return Err(Error::InvalidModel(format!("indicator boxes must have {d} intervals")));
    }
    Ok((0..grid.n_cells())
        .map(|cell| {
            let x = grid.cell_center(cell);
            let inside = boxes.iter().any(|b| b.iter().zip(&x).all(|(&[lo, hi], &xi)| lo <= xi && xi <= hi));
            if inside {
                CMatrix::identity(d)
            } else {
                CMatrix::zeros(d, d)
            }
        })
        .collect())
}

/// Orthonormalizes by modified Gram–Schmidt with one re-orthogonalization pass.
/// Vectors whose remainder falls below `1e−12` of their norm are dropped.
pub fn orthonormalize(vectors: &[CVector]) -> Vec<CVector> {
    let mut out: Vec<CVector> = Vec::new();
    for v in vectors {
        let n0 = v.norm();
        if n0 == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for e in &out {
                let coef = r.dot(e);
                r.axpy(-coef, e);
            }
        }
        let n = r.norm();
        if n > 1e-12 * n0 {
            out.push(r.scale_real(1.0 / n));
        }
    }
    out
}

/// Projection onto the span of the given vectors.
pub fn projection_from_span(d: usize, vectors: &[CVector]) -> Result<CMatrix> {
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidModel(format!("spanning vectors must have length {d}")));
    }
    let mut q = CMatrix::zeros(d, d);
    for e in orthonormalize(vectors) {
        q = &q + &CMatrix::outer(&e, &e);
    }
    Ok(q)
}

/// Orthonormal basis of `range(Q)` from the eigenvectors with eigenvalue above ½.
pub fn range_basis(q: &CMatrix) -> Result<Vec<CVector>> {
    let eig = herm_eig(&q.hermitian_part())?;
    Ok((0..q.rows()).filter(|&k| eig.values[k] > 0.5).map(|k| eig.vectors.column(k)).collect())
}

pub fn zero_projection_field(grid: &GridSpec) -> Vec<CMatrix> {
    vec![CMatrix::zeros(grid.dim(), grid.dim()); grid.n_cells()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::c;

    #[test]
    fn zero_projection_gives_zero_w() {
        let z = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let cs = cell_structure(&CMatrix::zeros(2, 2), &z).unwrap();
        assert_eq!(cs.w, CMatrix::zeros(2, 2));
        assert_eq!(cs.p, CMatrix::identity(2));
    }

    #[test]
    fn zero_z_gives_w_equal_q() {
        let q = CMatrix::from_real_diag(&[1.0, 0.0, 1.0]);
        let cs = cell_structure(&q, &CMatrix::zeros(3, 3)).unwrap();
        assert!((&cs.w - &q).frobenius_norm() < 1e-15);
    }

    #[test]
    fn scalar_case() {
        // Q = 1, Z = z: W = 1/(1 + iz).
        let z = 0.7;
        let cs = cell_structure(&CMatrix::identity(1), &CMatrix::from_real_diag(&[z])).unwrap();
        assert!((cs.w[(0, 0)] - c(1.0, 0.0) / c(1.0, z)).norm() < 1e-15);
    }

    #[test]
    fn non_projection_reports_cell() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 3).unwrap();
        let mut f = crate::model::FormCoefficients::zeros(&g);
        f.c = vec![CMatrix::identity(1); 3];
        let cs = crate::model::CoefficientSet::new(f, 0.0, 1.0).unwrap();
        let d = crate::model::derive_fields(&cs, Default::default()).unwrap();
        let mut q = zero_projection_field(&g);
        q[2] = CMatrix::from_real_diag(&[0.5]);
        match build_singular_structure(q, &d) {
            Err(Error::ProjectionInvalid { cell, .. }) => assert_eq!(cell, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gram_schmidt_span() {
        let v = vec![
            CVector(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
            CVector(vec![c(2.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]),
            CVector(vec![c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)]),
        ];
        let q = projection_from_span(3, &v).unwrap();
        assert!(is_projection(&q).is_projection);
        assert!((q.trace().re - 2.0).abs() < 1e-13);
        assert_eq!(range_basis(&q).unwrap().len(), 2);
    }

    #[test]
    fn indicator_uses_cell_centers() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 4).unwrap();
        let q = indicator_projection(&g, &[vec![[0.0, 0.5]]]).unwrap();
        let flags: Vec<f64> = q.iter().map(|m| m[(0, 0)].re).collect();
        assert_eq!(flags, vec![1.0, 1.0, 0.0, 0.0]);
    }
}
