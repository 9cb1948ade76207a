//! Fat-Cantor example: the regular part doubles the zeroth-order term on `K`
//! and the singular part pushes the vertex below zero.
//!
//! ```text
//! cargo run --release --example cantor -- 5
//! ```

use regpart::diagnostics::{cantor_grid, generate_cantor_example_with};
use regpart::model::{derive_fields, estimate_vertex_angle, eval_form};
use regpart::regular::{assemble_regular, build_singular_structure};

fn main() -> regpart::Result<()> {
    let stage: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let grid = cantor_grid(stage, 1)?;

    for with_c0 in [true, false] {
        let ex = generate_cantor_example_with(stage, &grid, with_c0)?;
        let der = derive_fields(&ex.coeffs, Default::default())?;
        let s = build_singular_structure(ex.q.clone(), &der)?;
        let parts = assemble_regular(&ex.coeffs, &der, &s)?;

        let u = ex.plateau();
        let reg = eval_form(&parts.reg, u, u)?.value;
        let sing = eval_form(&parts.sing, u, u)?.value;
        println!("c0 = {}:", if with_c0 { "1_K" } else { "0" });
        println!("  |K| = {} on {} cells", ex.measure, grid.n_cells());
        println!("  a_reg(u,u) = {:.12}", reg.re);
        println!("  a_s(u,u)   = {:.12} {:+.12}i", sing.re, sing.im);
        if with_c0 {
            let v = estimate_vertex_angle(&ex.coeffs, &ex.funcs)?;
            println!("  vertex of a: gamma = {:.3e}, tan(theta) = {:.6}", v.params.gamma(), v.params.tan_theta());
        }
    }
    Ok(())
}
