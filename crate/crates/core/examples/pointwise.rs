//! Pointwise functional calculus on a single rank-deficient cell.

use regpart::pointwise::{c, CMatrix, PsdSpectrum, RankTolerance, I};

fn main() -> regpart::Result<()> {
    // A = v v* + w w* with v, w independent, so rank 2 in dimension 3.
    let a = CMatrix::from_rows(&[
        vec![c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
        vec![c(1.0, -1.0), c(2.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
    ]);
    let spec = PsdSpectrum::new(&a, RankTolerance::default())?;
    let (s, g) = (spec.sqrt(), spec.pinv_sqrt());
    println!("eigenvalues {:?}", spec.eig().values);
    println!("rank {}", spec.rank());
    println!("|S^2 - A|      = {:.2e}", (&(&s * &s) - &a).frobenius_norm());
    println!("|g S - P_range| = {:.2e}", (&(&g * &s) - &spec.range_projection()).frobenius_norm());

    // Z from C = S (I + iZ) S for a skew part living on range(A).
    let z = CMatrix::from_real_rows(&[&[0.3, 0.1, 0.0], &[0.1, -0.2, 0.0], &[0.0, 0.0, 0.0]]);
    let cm = &(&s * &(&CMatrix::identity(3) + &z.scale(I))) * &s;
    let z_back = &(&g * &cm.imaginary_part()) * &g;
    println!("|Z recovered - Z| = {:.2e}", (&z_back - &z).frobenius_norm());
    Ok(())
}
