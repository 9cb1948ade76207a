use crate::error::{Error, Result};
use crate::pointwise::{CVector, C64};

use super::grid::GridSpec;

/// Node-sampled function with its designated discrete gradient.
///
/// The cell value is the mean over the cell's `2^d` corners. Gradient
/// component `k` is the forward difference along axis `k`, averaged over the
/// `2^{d-1}` cell edges parallel to that axis.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    grid: GridSpec,
    values: Vec<C64>,
    cell_values: Vec<C64>,
    gradient: Vec<CVector>,
}

impl TestFunction {
    pub fn from_nodes(grid: &GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch(format!(
                "{} node values for a grid with {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidModel("non-finite test function sample".into()));
        }
        let d = grid.dim();
        let h: Vec<f64> = (0..d).map(|k| grid.spacing(k)).collect();
        let corners_per_cell = 1usize << d;
        let edge_weight = 2.0 / corners_per_cell as f64;
        let mut cell_values = Vec::with_capacity(grid.n_cells());
        let mut gradient = Vec::with_capacity(grid.n_cells());
        for cell in 0..grid.n_cells() {
            let corners = grid.cell_corners(cell);
            let mean: C64 = corners.iter().map(|&n| values[n]).sum::<C64>() / corners_per_cell as f64;
            let mut g = CVector::zeros(d);
            for (mask, &node) in corners.iter().enumerate() {
                for k in 0..d {
                    if (mask >> k) & 1 == 1 {
                        let lower = corners[mask & !(1 << k)];
                        g[k] += (values[node] - values[lower]) * (edge_weight / h[k]);
                    }
                }
            }
            cell_values.push(mean);
            gradient.push(g);
        }
        Ok(Self { grid: grid.clone(), values, cell_values, gradient })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        let values = (0..grid.n_nodes()).map(|n| f(&grid.node_coords(n))).collect();
        Self::from_nodes(grid, values)
    }

    pub fn zero(grid: &GridSpec) -> Self {
        Self::from_nodes(grid, vec![C64::new(0.0, 0.0); grid.n_nodes()]).expect("zero function")
    }

    /// Product of 1-D plateaus: `1` on `[lo_k, hi_k]`, linear ramps of width
    /// `ramp` on either side, `0` beyond.
    pub fn plateau(grid: &GridSpec, core: &[[f64; 2]], ramp: f64) -> Result<Self> {
        if core.len() != grid.dim() || !(ramp > 0.0) {
            return Err(Error::InvalidModel("plateau needs one interval per axis and ramp > 0".into()));
        }
        Self::from_fn(grid, |x| {
            let v: f64 = x
                .iter()
                .zip(core)
                .map(|(&xi, &[lo, hi])| {
                    if xi < lo {
                        (1.0 - (lo - xi) / ramp).max(0.0)
                    } else if xi > hi {
                        (1.0 - (xi - hi) / ramp).max(0.0)
                    } else {
                        1.0
                    }
                })
                .product();
            C64::new(v, 0.0)
        })
    }

    /// Smooth bump `exp(1 − 1/(1 − r²))` with `r = |x − center| / radius`.
    pub fn bump(grid: &GridSpec, center: &[f64], radius: f64) -> Result<Self> {
        if center.len() != grid.dim() || !(radius > 0.0) {
            return Err(Error::InvalidModel("bump needs a center per axis and radius > 0".into()));
        }
        Self::from_fn(grid, |x| {
            let r2: f64 =
                x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (radius * radius);
            let v = if r2 < 1.0 { (1.0 - 1.0 / (1.0 - r2)).exp() } else { 0.0 };
            C64::new(v, 0.0)
        })
    }

    /// `u_λ = e^{iλ x·ξ} τ`, sampled at the nodes.
    pub fn plane_wave(tau: &TestFunction, lambda: f64, xi: &[f64]) -> Result<Self> {
        let grid = &tau.grid;
        if xi.len() != grid.dim() {
            return Err(Error::GridMismatch("direction length differs from grid dimension".into()));
        }
        let values = (0..grid.n_nodes())
            .map(|n| {
                let x = grid.node_coords(n);
                let phase: f64 = lambda * x.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
                tau.values[n] * C64::from_polar(1.0, phase)
            })
            .collect();
        Self::from_nodes(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn node_values(&self) -> &[C64] {
        &self.values
    }

    pub fn cell_values(&self) -> &[C64] {
        &self.cell_values
    }

    pub fn gradient(&self) -> &[CVector] {
        &self.gradient
    }

    pub fn is_compactly_supported(&self) -> bool {
        (0..self.grid.n_nodes())
            .filter(|&n| self.grid.node_on_boundary(n))
            .all(|n| self.values[n].norm() == 0.0)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self::from_nodes(&self.grid, self.values.iter().map(|v| v * s).collect()).expect("same grid")
    }

    /// `‖u‖²_H` with midpoint quadrature on cell values.
    pub fn l2_norm_sqr(&self) -> f64 {
        let h = self.grid.cell_volume();
        crate::pointwise::pairwise_sum_real(
            &self.cell_values.iter().map(|z| z.norm_sqr() * h).collect::<Vec<_>>(),
        )
    }

    pub fn ensure_same_grid(&self, grid: &GridSpec) -> Result<()> {
        if &self.grid != grid {
            return Err(Error::GridMismatch("test function lives on a different grid".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_has_exact_gradient() {
        let g = GridSpec::new(vec![[0.0, 1.0], [0.0, 2.0]], vec![3, 5]).unwrap();
        let u = TestFunction::from_fn(&g, |x| C64::new(2.0 * x[0] - x[1], 0.5 * x[1])).unwrap();
        for gr in u.gradient() {
            assert!((gr[0] - C64::new(2.0, 0.0)).norm() < 1e-13);
            assert!((gr[1] - C64::new(-1.0, 0.5)).norm() < 1e-13);
        }
        // cell value of a linear function is its value at the cell center
        let c0 = g.cell_center(7);
        assert!((u.cell_values()[7] - C64::new(2.0 * c0[0] - c0[1], 0.5 * c0[1])).norm() < 1e-13);
    }

    #[test]
    fn plateau_is_flat_on_core() {
        let g = GridSpec::uniform_1d(-1.0, 2.0, 12).unwrap();
        let u = TestFunction::plateau(&g, &[[0.0, 1.0]], 1.0).unwrap();
        for cell in 4..8 {
            assert_eq!(u.cell_values()[cell], C64::new(1.0, 0.0));
            assert_eq!(u.gradient()[cell][0], C64::new(0.0, 0.0));
        }
        assert!(u.is_compactly_supported());
    }

    #[test]
    fn node_count_checked() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 4).unwrap();
        assert!(TestFunction::from_nodes(&g, vec![C64::new(0.0, 0.0); 4]).is_err());
    }
}
