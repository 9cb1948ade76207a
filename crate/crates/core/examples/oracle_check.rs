//! Compares the closed-form regular part with the finite-dimensional
//! projection construction on a random model.

use regpart::model::{derive_fields, eval_form};
use regpart::oracle::{FormKind, Oracle};
use regpart::random::{random_model, rng, ModelOptions};
use regpart::regular::{assemble_regular, build_singular_structure};

fn main() -> regpart::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(11);
    let m = random_model(&mut rng(seed), &ModelOptions::new(2, false))?;
    let der = derive_fields(&m.coeffs, Default::default())?;
    let s = build_singular_structure(m.q.clone(), &der)?;
    let reg = assemble_regular(&m.coeffs, &der, &s)?.reg;

    let oracle = Oracle::new(&m.coeffs, &der, &m.q, &m.funcs, 0.0, FormKind::Full)?;
    let table = oracle.matrix()?;
    println!("{} cells, {} test functions", m.coeffs.grid().n_cells(), m.funcs.len());
    let mut worst: f64 = 0.0;
    for (i, u) in m.funcs.iter().enumerate() {
        for (k, v) in m.funcs.iter().enumerate() {
            let f = eval_form(&reg, u, v)?.value;
            let o = table[(k, i)];
            worst = worst.max((f - o).norm() / (1.0 + f.norm()));
            if i == k {
                println!("  a_reg(u{i},u{i}): formula {f:.10}  oracle {o:.10}");
            }
        }
    }
    let inv = oracle.invariants();
    let mr = oracle.multiplication_residuals(&m.q);
    println!("worst relative gap {worst:.3e}");
    println!("oracle invariants {:.3e}, pi1/T residuals {:.3e}/{:.3e}", inv.max(), mr.pi1, mr.t);
    Ok(())
}
