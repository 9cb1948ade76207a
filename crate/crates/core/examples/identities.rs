//! Pointwise identities of `W = Q(I + iQZQ)^{-1}Q` over random `(Q, Z)` draws.

use rand::Rng;
use regpart::random::{projection_and_hermitian, rng};
use regpart::regular::{cell_structure, identity_residuals, IDENTITY_NAMES};

fn main() -> regpart::Result<()> {
    let draws = 1000;
    for d in 1..=6 {
        let mut r = rng(d as u64);
        let mut worst = [0.0f64; 6];
        for _ in 0..draws {
            let zmax = r.gen_range(0.0..3.0);
            let (q, z) = projection_and_hermitian(&mut r, d, zmax);
            let res = identity_residuals(&cell_structure(&q, &z)?, &z);
            for (w, x) in worst.iter_mut().zip(res) {
                *w = w.max(x);
            }
        }
        println!("d = {d}: {draws} draws");
        for (name, w) in IDENTITY_NAMES.iter().zip(worst) {
            println!("  {name:<48} {w:.2e}");
        }
    }
    Ok(())
}
