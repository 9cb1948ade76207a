//! Sectoriality diagnostics for the singular part, the real-part commutation
//! test, and the fat-Cantor example generator.

mod cantor;
mod equivalence;
mod probe;
mod realpart;

pub use cantor::{
    cantor_grid, cantor_intervals, cantor_measure, generate_cantor_example, generate_cantor_example_with,
    CantorExample, BUMP_COUNT, CANTOR_DOMAIN, MAX_STAGE,
};
pub use equivalence::{
    check_equivalences, singular_vertex, DiagnosticsReport, Verdict, Verdicts, FORMULA_TOL, STRICT_COMMUTATOR,
    T_PI2_TOL, WITNESS_COMMUTATOR,
};
pub use probe::{run_probe, ProbeConfig, ProbeOutcome, MAX_PHASE_STEP, PROBE_SLOPE_TOL};
pub use realpart::{
    check_realpart_commutation, check_realpart_with_oracle, RealPartPair, RealPartReport, REALPART_ORACLE_TOL,
    XY_TOL,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_fields, CoefficientSet, FormCoefficients, GridSpec, TestFunction};
    use crate::pointwise::{c, CMatrix, CVector, I};
    use crate::regular::{assemble_regular, build_singular_structure};

    fn constant_model(q: CMatrix, cells: usize) -> (CoefficientSet, Vec<CMatrix>, Vec<TestFunction>) {
        let g = GridSpec::new(vec![[0.0, 1.0]; 2], vec![cells; 2]).unwrap();
        let z = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let cm = &CMatrix::identity(2) + &z.scale(I);
        let n = g.n_cells();
        let f = FormCoefficients::new(
            g.clone(),
            vec![cm; n],
            vec![CVector::zeros(2); n],
            vec![CVector::zeros(2); n],
            vec![c(0.0, 0.0); n],
        )
        .unwrap();
        let cs = CoefficientSet::new(f, 1.0, 1.0).unwrap();
        let funcs = vec![
            TestFunction::bump(&g, &[0.5, 0.5], 0.4).unwrap(),
            TestFunction::bump(&g, &[0.4, 0.6], 0.3).unwrap(),
        ];
        (cs, vec![q; n], funcs)
    }

    fn verdicts(cs: &CoefficientSet, q: Vec<CMatrix>, funcs: &[TestFunction]) -> DiagnosticsReport {
        let der = derive_fields(cs, Default::default()).unwrap();
        let s = build_singular_structure(q, &der).unwrap();
        check_equivalences(cs, &der, &s, funcs, &ProbeConfig::default()).unwrap()
    }

    #[test]
    fn off_diagonal_z_fails_everything() {
        let (cs, q, funcs) = constant_model(CMatrix::from_real_diag(&[1.0, 0.0]), 6);
        let r = verdicts(&cs, q, &funcs);
        for (name, v) in r.verdicts.as_array() {
            assert_eq!(v.holds(), Some(false), "({name})");
        }
        assert!(r.probe_growing());
        assert!(r.inconsistencies().is_empty(), "{:?}", r.inconsistencies());
    }

    #[test]
    fn trivial_projections_pass_everything() {
        for q in [CMatrix::identity(2), CMatrix::zeros(2, 2)] {
            let (cs, q, funcs) = constant_model(q, 4);
            let r = verdicts(&cs, q, &funcs);
            for (name, v) in r.verdicts.as_array() {
                assert_eq!(v.holds(), Some(true), "({name})");
            }
            assert!(r.inconsistencies().is_empty(), "{:?}", r.inconsistencies());
        }
    }

    #[test]
    fn cantor_example_commutes_but_real_part_does_not() {
        let g = cantor_grid(3, 1).unwrap();
        let ex = generate_cantor_example(3, &g).unwrap();
        let der = derive_fields(&ex.coeffs, Default::default()).unwrap();
        let s = build_singular_structure(ex.q.clone(), &der).unwrap();
        let r = check_equivalences(&ex.coeffs, &der, &s, &ex.funcs, &ProbeConfig::default()).unwrap();
        for (name, v) in r.verdicts.as_array() {
            assert_eq!(v.holds(), Some(true), "({name})");
        }
        let reg = assemble_regular(&ex.coeffs, &der, &s).unwrap();
        let rp = check_realpart_with_oracle(&ex.coeffs, &der, &s, &reg, &ex.funcs[..1]).unwrap();
        assert!(!rp.holds);
        assert_eq!(rp.oracle_agrees(), Some(false));
        let p = &rp.pairs[0];
        assert!((p.re_of_regular - 2.0 * p.regular_of_re).norm() < 1e-12);

        let vs = r.as_vertex.unwrap();
        assert!(vs.params.gamma() <= -ex.measure / ex.plateau().l2_norm_sqr() + 1e-9);
        let vp = r.principal_singular_vertex.unwrap();
        assert!(vp.params.gamma() >= -1e-9);
    }

    #[test]
    fn pure_second_order_commuting_passes_realpart() {
        let (cs, _, _) = constant_model(CMatrix::identity(2), 3);
        let der = derive_fields(&cs, Default::default()).unwrap();
        let q = vec![CMatrix::from_real_diag(&[1.0, 1.0]); cs.grid().n_cells()];
        let s = build_singular_structure(q, &der).unwrap();
        assert!(check_realpart_commutation(&der, &s).holds);
    }
}
