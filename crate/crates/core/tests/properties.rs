use proptest::prelude::*;
use regpart::io::{ModelFile, ProjectionEntry};
use regpart::model::{derive_fields, eval_form};
use regpart::pointwise::{c, is_projection, CMatrix, PsdSpectrum, RankTolerance, I};
use regpart::random::{
    hermitian_with_norm, matrix, projection_and_hermitian, random_function, random_model, rng, ModelOptions,
};
use regpart::regular::{
    assemble_regular, assemble_regular_commuting, build_singular_structure, cell_structure, identity_residuals,
    zero_projection_field,
};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn fro(m: &CMatrix) -> f64 {
    m.frobenius_norm()
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn identities_hold_for_any_projection_and_hermitian(seed in any::<u64>(), d in 1usize..=6, zmax in 0.0f64..10.0) {
        let mut r = rng(seed);
        let (q, z) = projection_and_hermitian(&mut r, d, zmax);
        let s = cell_structure(&q, &z).unwrap();
        for res in identity_residuals(&s, &z) {
            prop_assert!(res < 1e-10 * (1.0 + zmax), "{res}");
        }
        prop_assert!(fro(&(&(&s.q * &s.w) - &s.w)) < 1e-12 * (1.0 + zmax));
        prop_assert!(fro(&(&(&s.w * &s.q) - &s.w)) < 1e-12 * (1.0 + zmax));
        prop_assert!(is_projection(&s.p).is_projection);
    }

    #[test]
    fn pinv_sqrt_inverts_on_the_range(seed in any::<u64>(), d in 1usize..=5, rank_gap in 0usize..=5) {
        let mut r = rng(seed);
        let rank = d.saturating_sub(rank_gap);
        let b = matrix(&mut r, d, rank);
        let a = (&b * &b.adjoint()).hermitian_part();
        let spec = PsdSpectrum::new(&a, RankTolerance::default()).unwrap();
        let (s, g, p) = (spec.sqrt(), spec.pinv_sqrt(), spec.range_projection());
        let scale = fro(&a).max(1e-300);
        prop_assert_eq!(spec.rank(), rank);
        prop_assert!(fro(&(&(&s * &s) - &a)) <= 1e-12 * scale);
        prop_assert!(fro(&(&(&g * &s) - &p)) <= 1e-10);
        prop_assert!(fro(&(&(&s * &g) - &p)) <= 1e-10);
        prop_assert!(is_projection(&p).is_projection);
    }

    #[test]
    fn hermitian_with_norm_has_requested_norm(seed in any::<u64>(), d in 1usize..=6, norm in 0.0f64..5.0) {
        let mut r = rng(seed);
        let h = hermitian_with_norm(&mut r, d, norm);
        let rad = regpart::pointwise::herm_eig(&h).unwrap().spectral_radius();
        prop_assert!((rad - norm).abs() <= 1e-12 * (1.0 + norm));
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn derived_fields_reconstruct_the_coefficients(seed in any::<u64>(), d in 1usize..=3, commuting in any::<bool>()) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &ModelOptions::new(d, commuting || d == 1)).unwrap();
        let der = derive_fields(&m.coeffs, Default::default()).unwrap();
        let res = der.residuals(&m.coeffs);
        prop_assert!(res.reconstruction < 1e-12);
        prop_assert!(res.z_hermitian < 1e-12);
        prop_assert!(res.z_norm_max <= m.coeffs.theta().tan() + 1e-9);
        for cell in 0..der.n_cells() {
            let rec = der.reconstructed_c(cell);
            prop_assert!(fro(&(&rec - &m.coeffs.fields().c[cell])) < 1e-12 * (1.0 + fro(&rec)));
        }
    }

    #[test]
    fn regular_and_singular_parts_sum_to_the_form(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &ModelOptions::new(d, d == 1 || seed % 2 == 0)).unwrap();
        let der = derive_fields(&m.coeffs, Default::default()).unwrap();
        let s = build_singular_structure(m.q.clone(), &der).unwrap();
        let parts = assemble_regular(&m.coeffs, &der, &s).unwrap();
        let (u, v) = (&m.funcs[0], m.funcs.last().unwrap());
        let whole = eval_form(m.coeffs.fields(), u, v).unwrap().value;
        let split = eval_form(&parts.reg, u, v).unwrap().value + eval_form(&parts.sing, u, v).unwrap().value;
        prop_assert!((whole - split).norm() <= 1e-10 * (1.0 + whole.norm()));
    }

    #[test]
    fn commuting_formula_agrees_when_q_and_z_commute(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &ModelOptions::new(d, true)).unwrap();
        let der = derive_fields(&m.coeffs, Default::default()).unwrap();
        let s = build_singular_structure(m.q.clone(), &der).unwrap();
        let full = assemble_regular(&m.coeffs, &der, &s).unwrap();
        let simple = assemble_regular_commuting(&m.coeffs, &der, &s).unwrap();
        prop_assert!(full.reg.max_deviation(&simple.reg) <= 1e-10 * (1.0 + full.reg.max_abs()));
    }

    #[test]
    fn zero_projection_keeps_the_form(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &ModelOptions::new(d, d == 1)).unwrap();
        let der = derive_fields(&m.coeffs, Default::default()).unwrap();
        let s = build_singular_structure(zero_projection_field(m.coeffs.grid()), &der).unwrap();
        let parts = assemble_regular(&m.coeffs, &der, &s).unwrap();
        prop_assert!(parts.reg.max_deviation(m.coeffs.fields()) <= 1e-12 * (1.0 + parts.reg.max_abs()));
    }

    #[test]
    fn forms_are_sesquilinear(seed in any::<u64>(), d in 1usize..=3, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &ModelOptions::new(d, true)).unwrap();
        let grid = m.coeffs.grid();
        let (u, v) = (random_function(&mut r, grid).unwrap(), random_function(&mut r, grid).unwrap());
        let alpha = c(re, im);
        let f = m.coeffs.fields();
        let base = eval_form(f, &u, &v).unwrap().value;
        let left = eval_form(f, &u.scaled(alpha), &v).unwrap().value;
        let right = eval_form(f, &u, &v.scaled(alpha)).unwrap().value;
        let tol = 1e-11 * (1.0 + base.norm()) * (1.0 + alpha.norm());
        prop_assert!((left - alpha * base).norm() <= tol);
        prop_assert!((right - alpha.conj() * base).norm() <= tol);
    }

    #[test]
    fn model_files_round_trip(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &ModelOptions::new(d, d == 1)).unwrap();
        let grid = m.coeffs.grid();
        let specs = m.funcs.iter().map(|u| regpart::io::FunctionSpec::samples(None, u)).collect();
        let file = ModelFile::new(&m.coeffs, ProjectionEntry::dense(&m.q), specs);
        let text = file.to_json().unwrap();
        let back = ModelFile::from_json(&text).unwrap();
        prop_assert_eq!(&back.to_json().unwrap(), &text);
        let loaded = back.load().unwrap();
        prop_assert_eq!(loaded.coeffs.fields(), m.coeffs.fields());
        prop_assert_eq!(&loaded.q, &m.q);
        prop_assert_eq!(loaded.funcs.len(), m.funcs.len());
        for (a, b) in loaded.funcs.iter().zip(&m.funcs) {
            prop_assert_eq!(a.node_values(), b.node_values());
            prop_assert!(a.grid() == grid);
        }
    }
}

#[test]
fn scalar_commuting_cell_has_closed_form_w() {
    // For Q = I and Z = z, W = (1 + iz)^{-1}.
    let z = CMatrix::from_real_diag(&[0.7]);
    let s = cell_structure(&CMatrix::identity(1), &z).unwrap();
    let want = c(1.0, 0.0) / (c(1.0, 0.0) + I * 0.7);
    assert!((s.w[(0, 0)] - want).norm() < 1e-15);
}
