//! Regular and singular coefficients of a two-dimensional model with a
//! projection field that commutes with `Z` on the left half and not on the right.

use regpart::model::{derive_fields, CoefficientSet, FormCoefficients, GridSpec};
use regpart::pointwise::{c, CMatrix, CVector, C64, I};
use regpart::regular::{assemble_regular, assemble_regular_commuting, build_singular_structure};

fn fmt(v: &[C64]) -> String {
    v.iter().map(|z| format!("{:>8.4}{:+.4}i", z.re, z.im)).collect::<Vec<_>>().join("  ")
}

fn main() -> regpart::Result<()> {
    let grid = GridSpec::new(vec![[0.0, 1.0]; 2], vec![2, 1])?;
    let z_diag = CMatrix::from_real_diag(&[0.5, -0.3]);
    let z_off = CMatrix::from_real_rows(&[&[0.0, 0.4], &[0.4, 0.0]]);
    let id = CMatrix::identity(2);

    let c_field = vec![&id + &z_diag.scale(I), &id + &z_off.scale(I)];
    let b = vec![CVector(vec![c(0.2, 0.0), c(0.0, 0.1)]); 2];
    let d = vec![CVector(vec![c(-0.1, 0.0), c(0.3, 0.0)]); 2];
    let c0 = vec![C64::new(1.0, 0.0); 2];
    let fields = FormCoefficients::new(grid, c_field, b, d, c0)?;
    let coeffs = CoefficientSet::new(fields, 1.0f64.atan(), 1.0)?;

    let der = derive_fields(&coeffs, Default::default())?;
    let q = vec![CMatrix::from_real_diag(&[1.0, 0.0]); 2];
    let s = build_singular_structure(q, &der)?;
    let parts = assemble_regular(&coeffs, &der, &s)?;

    for cell in 0..2 {
        println!("cell {cell}");
        let cr = &parts.reg.c[cell];
        for r in 0..2 {
            println!("  C_reg[{r}] = {}", fmt(&[cr[(r, 0)], cr[(r, 1)]]));
        }
        println!("  b_reg    = {}", fmt(&parts.reg.b[cell].0));
        println!("  d_reg    = {}", fmt(&parts.reg.d[cell].0));
        println!("  c0_reg   = {}", fmt(&[parts.reg.c0[cell]]));
    }

    match assemble_regular_commuting(&coeffs, &der, &s) {
        Ok(_) => println!("commuting formula applies"),
        Err(e) => println!("commuting formula rejected: {e}"),
    }
    Ok(())
}
