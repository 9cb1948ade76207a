//! Coefficient fields of the regular and singular parts.
//!
//! With `S = A^{1/2}`, `M = (I − iWZ)PS` and `N = (I + iW*Z)PS`, the regular
//! part in the coefficient layout of [`FormCoefficients`] is
//!
//! - `C_reg = S P (I + iZ + ZWZ) P S`
//! - `b_reg = Mᵗ conj(X)`, so that `(b_regᵗ∇u) v̄ = ⟨M∇u, vX⟩`
//! - `d_reg = N* Y`, so that `u ⟨d_reg, ∇v⟩ = ⟨uY, N∇v⟩`
//! - `c0_reg = c₀ − conj(X)ᵗ W Y`
//!
//! and the singular fields are the differences to the input.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, DerivedFields, FormCoefficients, GridSpec, TestFunction};
use crate::pointwise::{min_sector_tan, pairwise_sum, CMatrix, CVector, Lu, RankTolerance, C64, I};

use super::structure::SingularStructure;

/// Relative tolerance for `QZ = ZQ`.
pub const COMMUTATOR_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizedCoefficients {
    pub reg: FormCoefficients,
    pub sing: FormCoefficients,
}

impl RegularizedCoefficients {
    fn from_reg(original: &FormCoefficients, reg: FormCoefficients) -> Result<Self> {
        let sing = original.difference(&reg)?;
        Ok(Self { reg, sing })
    }
}

struct CellOut {
    c: CMatrix,
    b: CVector,
    d: CVector,
    c0: C64,
}

fn check_grids(grid: &GridSpec, derived: &DerivedFields, s: &SingularStructure) -> Result<()> {
    if &derived.grid != grid || &s.grid != grid || derived.n_cells() != s.n_cells() {
        return Err(Error::GridMismatch("coefficients, derived fields and Q live on different grids".into()));
    }
    Ok(())
}

fn collect(grid: &GridSpec, cells: Vec<Result<CellOut>>) -> Result<FormCoefficients> {
    let n = cells.len();
    let mut f = FormCoefficients {
        grid: grid.clone(),
        c: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        d: Vec::with_capacity(n),
        c0: Vec::with_capacity(n),
    };
    for cell in cells {
        let o = cell?;
        f.c.push(o.c);
        f.b.push(o.b);
        f.d.push(o.d);
        f.c0.push(o.c0);
    }
    Ok(f)
}

/// Regular-part fields from explicit lower-order data `x`, `y`, `c0`.
fn general_cell(
    s_sqrt: &CMatrix,
    z: &CMatrix,
    p: &CMatrix,
    w: &CMatrix,
    x: &CVector,
    y: &CVector,
    c0: C64,
) -> CellOut {
    let d = z.rows();
    let id = CMatrix::identity(d);
    let ps = p * s_sqrt;
    let kernel = &(&id + &z.scale(I)) + &(&(z * w) * z);
    let c = &(&ps.adjoint() * &kernel) * &ps;
    let m = &(&id - &(w * z).scale(I)) * &ps;
    let n = &(&id + &(&w.adjoint() * z).scale(I)) * &ps;
    let b = m.transpose().mul_vec(&x.conj());
    let dv = n.adjoint().mul_vec(y);
    let c0_reg = c0 - x.conj().bilinear(&w.mul_vec(y));
    CellOut { c, b, d: dv, c0: c0_reg }
}

/// Regular and singular parts of the form.
pub fn assemble_regular(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
) -> Result<RegularizedCoefficients> {
    let f = coeffs.fields();
    check_grids(&f.grid, derived, s)?;
    let cells = (0..f.n_cells())
        .into_par_iter()
        .map(|c| {
            Ok(general_cell(&derived.a_sqrt[c], &derived.z[c], &s.p[c], &s.w[c], &derived.x[c], &derived.y[c], f.c0[c]))
        })
        .collect();
    RegularizedCoefficients::from_reg(f, collect(&f.grid, cells)?)
}

/// The simplified formula valid when `QZ = ZQ`; fails with `NotCommuting` otherwise.
pub fn assemble_regular_commuting(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
) -> Result<RegularizedCoefficients> {
    check_grids(coeffs.grid(), derived, s)?;
    for c in 0..s.n_cells() {
        let (q, z) = (&s.q[c], &derived.z[c]);
        let comm = (&(q * z) - &(z * q)).frobenius_norm();
        if comm > COMMUTATOR_TOL * z.frobenius_norm().max(1.0) {
            return Err(Error::NotCommuting { cell: c, commutator: comm });
        }
    }
    assemble_regular_commuting_unchecked(coeffs, derived, s)
}

/// Evaluates the simplified formula without the commutation check, for comparing
/// it against [`assemble_regular`] on arbitrary inputs.
pub fn assemble_regular_commuting_unchecked(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
) -> Result<RegularizedCoefficients> {
    let f = coeffs.fields();
    check_grids(&f.grid, derived, s)?;
    let cells = (0..f.n_cells())
        .into_par_iter()
        .map(|c| {
            let (sq, z, q, p) = (&derived.a_sqrt[c], &derived.z[c], &s.q[c], &s.p[c]);
            let (x, y) = (&derived.x[c], &derived.y[c]);
            let d = z.rows();
            let id = CMatrix::identity(d);
            let ps = p * sq;
            let i_plus_iz = &id + &z.scale(I);
            let cm = &(&ps.adjoint() * &i_plus_iz) * &ps;
            let b = ps.transpose().mul_vec(&x.conj());
            let dv = ps.adjoint().mul_vec(y);
            let lu = Lu::factor(&i_plus_iz)
                .ok_or_else(|| Error::SolveFailure { cell: c, detail: "I + iZ is numerically singular".into() })?;
            let qy = q.mul_vec(y);
            let inner = q.mul_vec(&lu.solve_vec(&qy));
            let c0 = f.c0[c] - x.conj().bilinear(&inner);
            Ok(CellOut { c: cm, b, d: dv, c0 })
        })
        .collect();
    RegularizedCoefficients::from_reg(f, collect(&f.grid, cells)?)
}

/// Regular and singular parts of the principal part alone (`b = d = 0`, `c₀ = 0`).
pub fn pure_second_order_parts(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
) -> Result<RegularizedCoefficients> {
    let f = coeffs.fields();
    check_grids(&f.grid, derived, s)?;
    let zero = CVector::zeros(f.dim());
    let cells = (0..f.n_cells())
        .into_par_iter()
        .map(|c| Ok(general_cell(&derived.a_sqrt[c], &derived.z[c], &s.p[c], &s.w[c], &zero, &zero, C64::new(0.0, 0.0))))
        .collect();
    RegularizedCoefficients::from_reg(&f.principal_only(), collect(&f.grid, cells)?)
}

fn quad(grid: &GridSpec, terms: Vec<C64>) -> C64 {
    pairwise_sum(&terms) * grid.cell_volume()
}

fn pair_max(funcs: &[TestFunction], mut f: impl FnMut(&TestFunction, &TestFunction) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for u in funcs {
        for v in funcs {
            worst = worst.max(f(u, v)?);
        }
    }
    Ok(worst)
}

/// Largest relative defect of `a_reg = a^p_reg + (lower-order terms)` over all
/// pairs of `funcs`, the lower-order terms evaluated by direct quadrature.
pub fn observe_residual(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
    full: &RegularizedCoefficients,
    pure: &RegularizedCoefficients,
    funcs: &[TestFunction],
) -> Result<f64> {
    let f = coeffs.fields();
    check_grids(&f.grid, derived, s)?;
    let id = CMatrix::identity(f.dim());
    pair_max(funcs, |u, v| {
        let lhs = crate::model::eval_form(&full.reg, u, v)?.value;
        let pr = crate::model::eval_form(&pure.reg, u, v)?.value;
        let terms = (0..f.n_cells())
            .map(|c| {
                let (sq, z, p, w) = (&derived.a_sqrt[c], &derived.z[c], &s.p[c], &s.w[c]);
                let (x, y) = (&derived.x[c], &derived.y[c]);
                let (uc, vc) = (u.cell_values()[c], v.cell_values()[c]);
                let psu = (p * sq).mul_vec(&u.gradient()[c]);
                let psv = (p * sq).mul_vec(&v.gradient()[c]);
                let t1 = (&id - &(w * z).scale(I)).mul_vec(&psu).dot(&x.scale(vc));
                let t2 = y.scale(uc).dot(&(&id + &(&w.adjoint() * z).scale(I)).mul_vec(&psv));
                let t3 = w.mul_vec(y).scale(uc).dot(&x.scale(vc));
                t1 + t2 - t3 + f.c0[c] * uc * vc.conj()
            })
            .collect();
        let rhs = pr + quad(&f.grid, terms);
        Ok((lhs - rhs).norm() / (1.0 + lhs.norm()))
    })
}

/// Largest relative defect of the commuting-case singular-part identity
/// `a_s = a^p_s + ⟨QS∇u, vX⟩ + ⟨uY, QS∇v⟩ + ⟨uWY, vX⟩` over pairs of `funcs`.
pub fn remark_residual(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
    full: &RegularizedCoefficients,
    pure: &RegularizedCoefficients,
    funcs: &[TestFunction],
) -> Result<f64> {
    let f = coeffs.fields();
    check_grids(&f.grid, derived, s)?;
    pair_max(funcs, |u, v| {
        let lhs = crate::model::eval_form(&full.sing, u, v)?.value;
        let ps = crate::model::eval_form(&pure.sing, u, v)?.value;
        let terms = (0..f.n_cells())
            .map(|c| {
                let (sq, q, w) = (&derived.a_sqrt[c], &s.q[c], &s.w[c]);
                let (x, y) = (&derived.x[c], &derived.y[c]);
                let (uc, vc) = (u.cell_values()[c], v.cell_values()[c]);
                let qsu = (q * sq).mul_vec(&u.gradient()[c]);
                let qsv = (q * sq).mul_vec(&v.gradient()[c]);
                qsu.dot(&x.scale(vc)) + y.scale(uc).dot(&qsv) + w.mul_vec(y).scale(uc).dot(&x.scale(vc))
            })
            .collect();
        let rhs = ps + quad(&f.grid, terms);
        Ok((lhs - rhs).norm() / (1.0 + lhs.norm()))
    })
}

/// Smallest `tanθ′` for which every cell of `C_reg` passes the pencil test;
/// `None` if some cell admits no finite angle.
pub fn regular_sector_tan(reg: &FormCoefficients, tol: RankTolerance) -> Option<f64> {
    let tans: Vec<Option<f64>> = reg.c.par_iter().map(|c| min_sector_tan(c, tol)).collect();
    tans.into_iter().try_fold(0.0f64, |acc, t| t.map(|t| acc.max(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive_fields;
    use crate::pointwise::c;
    use crate::regular::{build_singular_structure, zero_projection_field};

    fn small_model() -> CoefficientSet {
        let g = GridSpec::uniform_1d(0.0, 1.0, 3).unwrap();
        let one = c(1.0, 0.0);
        let f = FormCoefficients::new(
            g,
            vec![CMatrix::identity(1).scale(c(2.0, 1.0)); 3],
            vec![CVector(vec![c(0.5, 0.2)]); 3],
            vec![CVector(vec![c(-0.3, 0.1)]); 3],
            vec![one; 3],
        )
        .unwrap();
        CoefficientSet::new(f, 0.5, 1.0).unwrap()
    }

    #[test]
    fn zero_projection_reproduces_input() {
        let cs = small_model();
        let d = derive_fields(&cs, Default::default()).unwrap();
        let s = build_singular_structure(zero_projection_field(cs.grid()), &d).unwrap();
        let r = assemble_regular(&cs, &d, &s).unwrap();
        assert!(r.reg.max_deviation(cs.fields()) < 1e-13);
        assert!(r.sing.max_abs() < 1e-13);
    }

    #[test]
    fn full_projection_scalar() {
        // d = 1, Q = 1: W = 1/(1 + iz), all gradient terms vanish and
        // c0_reg = c0 − conj(X) Y / (1 + iz).
        let cs = small_model();
        let d = derive_fields(&cs, Default::default()).unwrap();
        let q = vec![CMatrix::identity(1); 3];
        let s = build_singular_structure(q, &d).unwrap();
        let r = assemble_regular(&cs, &d, &s).unwrap();
        let (z, x, y) = (d.z[0][(0, 0)], d.x[0][0], d.y[0][0]);
        let expect = c(1.0, 0.0) - x.conj() * y / (c(1.0, 0.0) + I * z);
        assert!((r.reg.c0[0] - expect).norm() < 1e-14);
        assert!(r.reg.c[0].max_abs() < 1e-15 && r.reg.b[0].norm() < 1e-15 && r.reg.d[0].norm() < 1e-15);
        let rc = assemble_regular_commuting(&cs, &d, &s).unwrap();
        assert!(rc.reg.max_deviation(&r.reg) < 1e-14);
    }

    #[test]
    fn complementation_is_exact() {
        let cs = small_model();
        let d = derive_fields(&cs, Default::default()).unwrap();
        let s = build_singular_structure(vec![CMatrix::identity(1); 3], &d).unwrap();
        let r = assemble_regular(&cs, &d, &s).unwrap();
        for c in 0..3 {
            assert!((r.reg.c0[c] + r.sing.c0[c] - cs.fields().c0[c]).norm() <= 2.0 * f64::EPSILON);
        }
    }
}
