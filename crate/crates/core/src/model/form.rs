//! Midpoint-rule evaluation of differential sesquilinear forms.
//!
//! Pairing convention: the principal term is `⟨C∇u, ∇v⟩ = Σ_k (C∇u)_k conj(∂_k v)`,
//! the first-order terms are `(bᵗ∇u) v̄` and `u ⟨d, ∇v⟩`. With this orientation
//! the coefficient form and the factored form built from `A^{1/2}, Z, X, Y`
//! agree identically.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointwise::{pairwise_sum, CMatrix, CVector, C64, I};

use super::coefficients::FormCoefficients;
use super::derived::DerivedFields;
use super::grid::GridSpec;
use super::test_function::TestFunction;

/// Contributions of the four integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FormParts {
    pub second_order: C64,
    pub first_order_b: C64,
    pub first_order_d: C64,
    pub zeroth_order: C64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FormValue {
    pub value: C64,
    pub parts: FormParts,
}

impl FormValue {
    fn from_parts(parts: FormParts) -> Self {
        Self {
            value: parts.second_order + parts.first_order_b + parts.first_order_d + parts.zeroth_order,
            parts,
        }
    }
}

fn check_grids(grid: &GridSpec, u: &TestFunction, v: &TestFunction) -> Result<()> {
    if u.grid() != grid || v.grid() != grid {
        return Err(Error::GridMismatch("test functions and coefficients live on different grids".into()));
    }
    Ok(())
}

/// Sums per-cell 4-tuples deterministically, then scales by the cell volume.
fn integrate(grid: &GridSpec, terms: Vec<[C64; 4]>) -> FormValue {
    let h = grid.cell_volume();
    let column = |k: usize| pairwise_sum(&terms.iter().map(|t| t[k]).collect::<Vec<_>>()) * h;
    FormValue::from_parts(FormParts {
        second_order: column(0),
        first_order_b: column(1),
        first_order_d: column(2),
        zeroth_order: column(3),
    })
}

/// `a(u, v)` from the coefficient fields.
pub fn eval_form(coeffs: &FormCoefficients, u: &TestFunction, v: &TestFunction) -> Result<FormValue> {
    check_grids(&coeffs.grid, u, v)?;
    let terms = (0..coeffs.n_cells())
        .into_par_iter()
        .map(|cell| {
            let gu = &u.gradient()[cell];
            let gv = &v.gradient()[cell];
            let uc = u.cell_values()[cell];
            let vc = v.cell_values()[cell];
            [
                coeffs.c[cell].mul_vec(gu).dot(gv),
                coeffs.b[cell].bilinear(gu) * vc.conj(),
                uc * coeffs.d[cell].dot(gv),
                coeffs.c0[cell] * uc * vc.conj(),
            ]
        })
        .collect();
    Ok(integrate(&coeffs.grid, terms))
}

/// `⟨(I+iZ)A^{1/2}∇u, A^{1/2}∇v⟩ + ⟨A^{1/2}∇u, vX⟩ + ⟨uY, A^{1/2}∇v⟩ + ⟨c₀u, v⟩`.
pub fn eval_form_factored(
    derived: &DerivedFields,
    c0: &[C64],
    u: &TestFunction,
    v: &TestFunction,
) -> Result<FormValue> {
    check_grids(&derived.grid, u, v)?;
    if c0.len() != derived.n_cells() {
        return Err(Error::GridMismatch("c0 field length differs from cell count".into()));
    }
    let d = derived.dim();
    let terms = (0..derived.n_cells())
        .into_par_iter()
        .map(|cell| {
            let s = &derived.a_sqrt[cell];
            let su = s.mul_vec(&u.gradient()[cell]);
            let sv = s.mul_vec(&v.gradient()[cell]);
            let uc = u.cell_values()[cell];
            let vc = v.cell_values()[cell];
            let iz = &CMatrix::identity(d) + &derived.z[cell].scale(I);
            [
                iz.mul_vec(&su).dot(&sv),
                su.dot(&derived.x[cell].scale(vc)),
                derived.y[cell].scale(uc).dot(&sv),
                c0[cell] * uc * vc.conj(),
            ]
        })
        .collect();
    Ok(integrate(&derived.grid, terms))
}

/// `‖u‖²`-type Gram matrix of the `H` inner product: `M[j][i] = ⟨u_i, u_j⟩_H`.
pub fn l2_gram(basis: &[TestFunction]) -> CMatrix {
    let n = basis.len();
    let Some(first) = basis.first() else {
        return CMatrix::zeros(0, 0);
    };
    let h = first.grid().cell_volume();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let prods: Vec<C64> = basis[i]
                .cell_values()
                .iter()
                .zip(basis[j].cell_values())
                .map(|(a, b)| a * b.conj())
                .collect();
            let val = pairwise_sum(&prods) * h;
            m[(j, i)] = val;
            m[(i, j)] = val.conj();
        }
    }
    m
}

/// Form matrix `F[j][i] = a(u_i, u_j)`, so `a(Σα_i u_i, Σβ_j u_j) = β* F α`.
pub fn form_gram(coeffs: &FormCoefficients, basis: &[TestFunction]) -> Result<CMatrix> {
    let n = basis.len();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(j, i)] = eval_form(coeffs, &basis[i], &basis[j])?.value;
        }
    }
    Ok(m)
}

/// Coefficients of a linear combination as a test function.
pub fn combine(basis: &[TestFunction], coeffs: &CVector) -> Result<TestFunction> {
    let first = basis.first().ok_or_else(|| Error::DegenerateBasis("empty basis".into()))?;
    let mut vals = vec![C64::new(0.0, 0.0); first.grid().n_nodes()];
    for (f, &a) in basis.iter().zip(coeffs.iter()) {
        for (v, x) in vals.iter_mut().zip(f.node_values()) {
            *v += a * x;
        }
    }
    TestFunction::from_nodes(first.grid(), vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::c;

    #[test]
    fn zero_functions_give_zero() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 4).unwrap();
        let mut f = FormCoefficients::zeros(&g);
        f.c = vec![CMatrix::identity(1); 4];
        f.c0 = vec![c(1.0, 1.0); 4];
        let z = TestFunction::zero(&g);
        assert_eq!(eval_form(&f, &z, &z).unwrap().value, c(0.0, 0.0));
    }

    #[test]
    fn unit_gradient_on_identity() {
        // u(x) = x on [0, 1] with n cells: ∫|u'|² = n h = 1.
        let n = 8;
        let g = GridSpec::uniform_1d(0.0, 1.0, n).unwrap();
        let mut f = FormCoefficients::zeros(&g);
        f.c = vec![CMatrix::identity(1); n];
        let u = TestFunction::from_fn(&g, |x| c(x[0], 0.0)).unwrap();
        let val = eval_form(&f, &u, &u).unwrap();
        assert!((val.value - c(n as f64 * g.cell_volume(), 0.0)).norm() < 1e-14);
        assert_eq!(val.parts.first_order_b, c(0.0, 0.0));
    }

    #[test]
    fn grid_mismatch_detected() {
        let g1 = GridSpec::uniform_1d(0.0, 1.0, 4).unwrap();
        let g2 = GridSpec::uniform_1d(0.0, 1.0, 5).unwrap();
        let f = FormCoefficients::zeros(&g1);
        let u = TestFunction::zero(&g2);
        assert!(matches!(eval_form(&f, &u, &u), Err(Error::GridMismatch(_))));
    }
}
