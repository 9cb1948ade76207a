use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, FormCoefficients, GridSpec, TestFunction};
use crate::pointwise::{CMatrix, CVector, C64};
use crate::regular::indicator_projection;

/// Largest supported construction stage.
pub const MAX_STAGE: u32 = 12;

/// Domain of the generated grid; `K` sits in `[0, 1]` with room for test functions on both sides.
pub const CANTOR_DOMAIN: [f64; 2] = [-1.0, 2.0];

/// Number of bumps in the generated test family.
pub const BUMP_COUNT: usize = 6;

/// Closed intervals of the stage-`n` fat Cantor set: starting from `[0, 1]`, step `k`
/// removes the open middle interval of length `4^{-k}` from every remaining piece.
pub fn cantor_intervals(stage: u32) -> Result<Vec<[f64; 2]>> {
    check_stage(stage)?;
    let mut pieces = vec![[0.0, 1.0]];
    for k in 1..=stage {
        let gap = 0.25f64.powi(k as i32);
        pieces = pieces
            .iter()
            .flat_map(|&[lo, hi]| {
                let side = 0.5 * (hi - lo - gap);
                [[lo, lo + side], [hi - side, hi]]
            })
            .collect();
    }
    Ok(pieces)
}

/// `|K_n| = 1 − ½(1 − 2^{−n})`.
pub fn cantor_measure(stage: u32) -> f64 {
    1.0 - 0.5 * (1.0 - 0.5f64.powi(stage as i32))
}

/// Grid on [`CANTOR_DOMAIN`] with `refine · 2·4^n` cells per unit length, so every
/// interval endpoint is a cell boundary and the last removed gaps span `2·refine` cells.
pub fn cantor_grid(stage: u32, refine: usize) -> Result<GridSpec> {
    check_stage(stage)?;
    if refine == 0 {
        return Err(Error::InvalidGrid("refinement factor must be positive".into()));
    }
    let per_unit = 2usize.checked_mul(4usize.pow(stage)).and_then(|n| n.checked_mul(refine));
    let cells = per_unit
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::InvalidGrid("cell count overflows".into()))?;
    GridSpec::uniform_1d(CANTOR_DOMAIN[0], CANTOR_DOMAIN[1], cells)
}

fn check_stage(stage: u32) -> Result<()> {
    if stage > MAX_STAGE {
        return Err(Error::InvalidModel(format!("stage {stage} exceeds the maximum {MAX_STAGE}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CantorExample {
    pub stage: u32,
    pub intervals: Vec<[f64; 2]>,
    /// Exact measure of the stage-`n` set.
    pub measure: f64,
    /// Cell count of `K_n` times the cell volume.
    pub grid_measure: f64,
    pub coeffs: CoefficientSet,
    pub q: Vec<CMatrix>,
    /// Index 0 is the plateau (equal to 1 on `[0, 1]`), then [`BUMP_COUNT`] disjoint bumps.
    pub funcs: Vec<TestFunction>,
    pub in_k: Vec<bool>,
}

impl CantorExample {
    pub fn plateau(&self) -> &TestFunction {
        &self.funcs[0]
    }
}

/// Model with `C = b = c₀ = 1_K`, `d = −1_K`, `Q = 1_K` and `θ = π/4` on a 1-D grid.
pub fn generate_cantor_example(stage: u32, grid: &GridSpec) -> Result<CantorExample> {
    generate_cantor_example_with(stage, grid, true)
}

/// As [`generate_cantor_example`]; `with_c0 = false` sets `c₀ = 0`.
pub fn generate_cantor_example_with(stage: u32, grid: &GridSpec, with_c0: bool) -> Result<CantorExample> {
    let intervals = cantor_intervals(stage)?;
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid(format!("the example lives on a 1-D grid, got dimension {}", grid.dim())));
    }
    let [lo, hi] = grid.bounds()[0];
    if lo > 0.0 || hi < 1.0 {
        return Err(Error::InvalidGrid(format!("grid [{lo}, {hi}] does not contain [0, 1]")));
    }
    let h = grid.spacing(0);
    if stage > 0 {
        let gap = 0.25f64.powi(stage as i32);
        if gap < 2.0 * h * (1.0 - 1e-9) {
            return Err(Error::ResolutionTooCoarse(format!(
                "removed intervals of length {gap:e} span {:.3} cells, need at least 2",
                gap / h
            )));
        }
    }
    for &[a, b] in &intervals {
        for e in [a, b] {
            let t = (e - lo) / h;
            if (t - t.round()).abs() > 1e-6 {
                return Err(Error::ResolutionTooCoarse(format!("endpoint {e} is not a cell boundary")));
            }
        }
    }

    let boxes: Vec<Vec<[f64; 2]>> = intervals.iter().map(|&iv| vec![iv]).collect();
    let q = indicator_projection(grid, &boxes)?;
    let in_k: Vec<bool> = q.iter().map(|m| m[(0, 0)].re > 0.5).collect();
    let ind = |c: usize, v: f64| C64::new(if in_k[c] { v } else { 0.0 }, 0.0);
    let n = grid.n_cells();
    let fields = FormCoefficients::new(
        grid.clone(),
        (0..n).map(|c| CMatrix::from_diag(&[ind(c, 1.0)])).collect(),
        (0..n).map(|c| CVector(vec![ind(c, 1.0)])).collect(),
        (0..n).map(|c| CVector(vec![ind(c, -1.0)])).collect(),
        (0..n).map(|c| if with_c0 { ind(c, 1.0) } else { C64::new(0.0, 0.0) }).collect(),
    )?;
    let coeffs = CoefficientSet::new(fields, FRAC_PI_4, 1.0)?;

    let mut funcs = vec![TestFunction::plateau(grid, &[[0.0, 1.0]], 1.0_f64.min(-lo).min(hi - 1.0))?];
    let width = (hi - lo) / BUMP_COUNT as f64;
    for k in 0..BUMP_COUNT {
        funcs.push(TestFunction::bump(grid, &[lo + (k as f64 + 0.5) * width], 0.5 * width)?);
    }
    let grid_measure = in_k.iter().filter(|&&b| b).count() as f64 * grid.cell_volume();
    Ok(CantorExample { stage, measure: cantor_measure(stage), intervals, grid_measure, coeffs, q, funcs, in_k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_follow_the_removal_series() {
        assert_eq!(cantor_measure(0), 1.0);
        assert_eq!(cantor_measure(1), 0.75);
        assert_eq!(cantor_measure(5), 0.515625);
        assert!((cantor_measure(60) - 0.5).abs() < 1e-15);
        for n in 0..=6 {
            let total: f64 = cantor_intervals(n).unwrap().iter().map(|[a, b]| b - a).sum();
            assert!((total - cantor_measure(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn stage_five_is_grid_exact() {
        let g = cantor_grid(5, 1).unwrap();
        let ex = generate_cantor_example(5, &g).unwrap();
        assert_eq!(ex.grid_measure, ex.measure);
        assert_eq!(ex.intervals.len(), 32);
    }

    #[test]
    fn coarse_grid_and_large_stage_are_rejected() {
        let g = cantor_grid(3, 1).unwrap();
        assert!(matches!(generate_cantor_example(4, &g), Err(Error::ResolutionTooCoarse(_))));
        assert!(cantor_intervals(13).is_err());
        assert!(cantor_grid(11, 1).is_err());
    }
}
