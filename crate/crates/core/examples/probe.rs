//! Plane-wave probe: `‖Tπ₂ u_λ‖² / ‖u_λ‖²` grows like `λ²` when `QZ(I−Q)A^{1/2} ≠ 0`.
//!
//! The model has `A = I`, `Q = diag(1, 0)` and `Z = [[0, z], [z, 0]]`, so along
//! `ξ = e₂` the slope times `‖τ‖²` approaches `z² ∫ τ²`.

use regpart::diagnostics::{run_probe, ProbeConfig};
use regpart::model::{derive_fields, CoefficientSet, FormCoefficients, GridSpec, TestFunction};
use regpart::pointwise::{c, CMatrix, CVector, C64};

fn main() -> regpart::Result<()> {
    let z = 0.5;
    let grid = GridSpec::new(vec![[0.0, 1.0]; 2], vec![16, 256])?;
    let n = grid.n_cells();
    let cm = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, z)], vec![c(0.0, z), c(1.0, 0.0)]]);
    let fields = FormCoefficients::new(grid.clone(), vec![cm; n], vec![CVector::zeros(2); n], vec![CVector::zeros(2); n], vec![C64::new(0.0, 0.0); n])?;
    let coeffs = CoefficientSet::new(fields, 1.0f64.atan(), 1.0)?;
    let der = derive_fields(&coeffs, Default::default())?;
    let q = vec![CMatrix::from_real_diag(&[1.0, 0.0]); n];

    let pi = std::f64::consts::PI;
    let tau = TestFunction::from_fn(&grid, |x| C64::new((pi * x[0]).sin().powi(2) * (pi * x[1]).sin().powi(2), 0.0))?;
    let cfg = ProbeConfig { lambdas: vec![10.0, 20.0, 40.0, 80.0], tau: Some(tau), xi: Some(vec![0.0, 1.0]) };
    let out = &run_probe(&coeffs, &der, &q, &cfg)?[0];

    for p in &out.report.points {
        println!("lambda = {:5.1}  ratio = {:.6e}  gradient ratio = {:.6e}", p.lambda, p.ratio, p.gradient_ratio);
    }
    println!("slope = {:.6e}", out.report.gradient_slope);
    println!("slope x |tau|^2 = {:.6e}, exact z^2 (3/8)^2 = {:.6e}", out.report.integral_estimate, z * z * 0.140625);
    Ok(())
}
