//! Finite-dimensional realization of the abstract regular-part construction.
//!
//! `H′ = H × H^d` carries the inner product `⟨·,·⟩_a`; `Φ(u) = (u, A^{1/2}∇u)`
//! embeds test functions, and `V = span{Φ(u_i)} ⊕ ({0} × range Q)` stands in
//! for the completion of the form domain, with `V₁ = {0} × range Q` as the
//! kernel of `j̃(u, w) = u`. The operators `π₁`, `T`, `T₁₁` and `Π` are
//! computed from Gram-matrix solves on this space, and
//! `a_reg(u, v) = ã(ΠΦ(u), ΠΦ(v))` is evaluated directly. Nothing here uses
//! the closed-form coefficient formula, so the two paths check each other.

mod ambient;
mod operators;
mod probe;
mod subspace;

pub use ambient::{build_ambient, AmbientSpace, FormKind, HPrimeVec, MIN_CELL_EIGENVALUE};
pub use operators::{
    check_invariants, compute_operators, dense_operators, multiplication_residuals, oracle_matrix,
    oracle_regular_part, pi_phi, t_pi2_phi, AbstractOperators, InvariantReport, MultiplicationResiduals,
    V1Operators, DENSE_LIMIT,
};
pub use probe::{linear_fit, t_pi2_probe, ProbePoint, ProbeReport, DEFAULT_LAMBDAS};
pub use subspace::{build_v_subspace, V1Basis, VSubspace, MAX_CONDITION};

use crate::error::Result;
use crate::model::{CoefficientSet, DerivedFields, TestFunction};
use crate::pointwise::CMatrix;

/// Everything needed to evaluate the oracle for one model and function family.
#[derive(Clone, Debug)]
pub struct Oracle {
    pub ambient: AmbientSpace,
    pub space: VSubspace,
    pub ops: AbstractOperators,
}

impl Oracle {
    pub fn new(
        coeffs: &CoefficientSet,
        derived: &DerivedFields,
        q_field: &[CMatrix],
        funcs: &[TestFunction],
        gamma0: f64,
        kind: FormKind,
    ) -> Result<Self> {
        let ambient = build_ambient(coeffs, derived, gamma0)?;
        let space = build_v_subspace(&ambient, q_field, funcs)?;
        let ops = compute_operators(&ambient, &space, kind)?;
        Ok(Self { ambient, space, ops })
    }

    /// Entry `[k][i] = a_reg(u_i, u_k)`.
    pub fn matrix(&self) -> Result<CMatrix> {
        oracle_matrix(&self.ambient, &self.space, &self.ops)
    }

    pub fn value(&self, u_idx: usize, v_idx: usize) -> Result<crate::pointwise::C64> {
        oracle_regular_part(&self.ambient, &self.space, &self.ops, u_idx, v_idx)
    }

    pub fn invariants(&self) -> InvariantReport {
        check_invariants(&self.ambient, &self.space, &self.ops)
    }

    pub fn multiplication_residuals(&self, q_field: &[CMatrix]) -> MultiplicationResiduals {
        multiplication_residuals(&self.ambient, &self.space, &self.ops, q_field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_fields, form_gram};
    use crate::random::{random_model, rng, ModelOptions};
    use crate::regular::{assemble_regular, build_singular_structure};

    #[test]
    fn oracle_matches_formula_on_random_models() {
        let mut r = rng(11);
        for d in 1..=3 {
            for commuting in [false, true] {
                let m = random_model(&mut r, &ModelOptions::new(d, commuting)).unwrap();
                let der = derive_fields(&m.coeffs, Default::default()).unwrap();
                let s = build_singular_structure(m.q.clone(), &der).unwrap();
                let reg = assemble_regular(&m.coeffs, &der, &s).unwrap();
                let formula = form_gram(&reg.reg, &m.funcs).unwrap();
                let o = Oracle::new(&m.coeffs, &der, &m.q, &m.funcs, 0.0, FormKind::Full).unwrap();
                let oracle = o.matrix().unwrap();
                let err = (0..formula.rows())
                    .flat_map(|k| (0..formula.cols()).map(move |i| (k, i)))
                    .map(|(k, i)| (formula[(k, i)] - oracle[(k, i)]).norm() / (1.0 + formula[(k, i)].norm()))
                    .fold(0.0, f64::max);
                assert!(err < 1e-8, "d={d} commuting={commuting}: {err:e}");
                let inv = o.invariants();
                assert!(inv.max() < 1e-9, "{inv:?}");
                let mr = o.multiplication_residuals(&m.q);
                assert!(mr.pi1 < 1e-9 && mr.t < 1e-9, "{mr:?}");
            }
        }
    }

    #[test]
    fn zero_projection_oracle_is_the_form() {
        let mut r = rng(3);
        let m = random_model(&mut r, &ModelOptions::new(2, false)).unwrap();
        let der = derive_fields(&m.coeffs, Default::default()).unwrap();
        let q = crate::regular::zero_projection_field(m.coeffs.grid());
        let o = Oracle::new(&m.coeffs, &der, &q, &m.funcs, 0.0, FormKind::Full).unwrap();
        assert_eq!(o.space.v1.dim(), 0);
        let direct = form_gram(m.coeffs.fields(), &m.funcs).unwrap();
        assert!((&o.matrix().unwrap() - &direct).max_abs() < 1e-10 * (1.0 + direct.max_abs()));
    }

    #[test]
    fn dependent_family_is_degenerate() {
        let mut r = rng(5);
        let m = random_model(&mut r, &ModelOptions::new(1, false)).unwrap();
        let der = derive_fields(&m.coeffs, Default::default()).unwrap();
        let u = m.funcs[0].clone();
        let fam = vec![u.clone(), u.scaled(crate::pointwise::c(2.0, 0.0))];
        let err = Oracle::new(&m.coeffs, &der, &m.q, &fam, 0.0, FormKind::Full).unwrap_err();
        assert!(matches!(err, crate::Error::DegenerateBasis(_)), "{err:?}");
    }
}
