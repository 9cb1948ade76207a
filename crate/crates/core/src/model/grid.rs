use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_CELLS: usize = 10_000_000;
pub const MAX_DIM: usize = 16;

/// Uniform cell grid over an axis-aligned box in ℝ^d.
///
/// Cells and nodes are numbered lexicographically with axis 0 fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    #[serde(rename = "box")]
    bounds: Vec<[f64; 2]>,
    cells_per_axis: Vec<usize>,
}

impl GridSpec {
    pub fn new(bounds: Vec<[f64; 2]>, cells_per_axis: Vec<usize>) -> Result<Self> {
        let g = Self { dim: bounds.len(), bounds, cells_per_axis };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform_1d(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        Self::new(vec![[lo, hi]], vec![cells])
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {} outside 1..={MAX_DIM}", self.dim)));
        }
        if self.bounds.len() != self.dim || self.cells_per_axis.len() != self.dim {
            return Err(Error::InvalidGrid("box/cells_per_axis length differs from dim".into()));
        }
        for (k, [lo, hi]) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidGrid(format!("axis {k}: need lo < hi, got [{lo}, {hi}]")));
            }
        }
        if self.cells_per_axis.contains(&0) {
            return Err(Error::InvalidGrid("cells_per_axis must be positive".into()));
        }
        let total = self
            .cells_per_axis
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&t| t <= MAX_CELLS);
        if total.is_none() {
            return Err(Error::InvalidGrid(format!("more than {MAX_CELLS} cells")));
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> &[[f64; 2]] {
        &self.bounds
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells_per_axis
    }

    pub fn n_cells(&self) -> usize {
        self.cells_per_axis.iter().product()
    }

    pub fn n_nodes(&self) -> usize {
        self.cells_per_axis.iter().map(|n| n + 1).product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let [lo, hi] = self.bounds[axis];
        (hi - lo) / self.cells_per_axis[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.spacing(k)).product()
    }

    pub fn cell_multi_index(&self, mut cell: usize) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.dim);
        for &n in &self.cells_per_axis {
            idx.push(cell % n);
            cell /= n;
        }
        idx
    }

    pub fn cell_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (k, &i) in multi.iter().enumerate() {
            idx += i * stride;
            stride *= self.cells_per_axis[k];
        }
        idx
    }

    /// Splits every cell into `factor` cells along `axis`; returns the finer grid and
    /// the parent cell of each fine cell.
    pub fn refine_axis(&self, axis: usize, factor: usize) -> Result<(GridSpec, Vec<usize>)> {
        if axis >= self.dim || factor == 0 {
            return Err(Error::InvalidGrid(format!("cannot refine axis {axis} by {factor}")));
        }
        let mut cells = self.cells_per_axis.clone();
        cells[axis] *= factor;
        let fine = GridSpec::new(self.bounds.clone(), cells)?;
        let parent = (0..fine.n_cells())
            .map(|c| {
                let mut m = fine.cell_multi_index(c);
                m[axis] /= factor;
                self.cell_index(&m)
            })
            .collect();
        Ok((fine, parent))
    }

    pub fn node_multi_index(&self, mut node: usize) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.dim);
        for &n in &self.cells_per_axis {
            idx.push(node % (n + 1));
            node /= n + 1;
        }
        idx
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (k, &i) in multi.iter().enumerate() {
            idx += i * stride;
            stride *= self.cells_per_axis[k] + 1;
        }
        idx
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        self.cell_multi_index(cell)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.bounds[k][0] + (i as f64 + 0.5) * self.spacing(k))
            .collect()
    }

    pub fn node_coords(&self, node: usize) -> Vec<f64> {
        self.node_multi_index(node)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.bounds[k][0] + i as f64 * self.spacing(k))
            .collect()
    }

    pub fn node_on_boundary(&self, node: usize) -> bool {
        self.node_multi_index(node)
            .iter()
            .zip(&self.cells_per_axis)
            .any(|(&i, &n)| i == 0 || i == n)
    }

    /// Node indices of the `2^d` corners of a cell; bit `k` of the position
    /// selects the upper node along axis `k`.
    pub fn cell_corners(&self, cell: usize) -> Vec<usize> {
        let base = self.cell_multi_index(cell);
        (0..(1usize << self.dim))
            .map(|mask| {
                let multi: Vec<usize> =
                    base.iter().enumerate().map(|(k, &i)| i + ((mask >> k) & 1)).collect();
                self.node_index(&multi)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_volume() {
        let g = GridSpec::new(vec![[0.0, 1.0], [0.0, 2.0]], vec![4, 8]).unwrap();
        assert_eq!(g.n_cells(), 32);
        assert_eq!(g.n_nodes(), 45);
        assert!((g.cell_volume() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn corners_of_first_cell() {
        let g = GridSpec::new(vec![[0.0, 1.0], [0.0, 1.0]], vec![2, 2]).unwrap();
        assert_eq!(g.cell_corners(0), vec![0, 1, 3, 4]);
        assert_eq!(g.cell_corners(3), vec![4, 5, 7, 8]);
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(GridSpec::uniform_1d(1.0, 0.0, 4).is_err());
        assert!(GridSpec::uniform_1d(0.0, 1.0, 0).is_err());
        assert!(GridSpec::new(vec![[0.0, 1.0]], vec![MAX_CELLS + 1]).is_err());
    }

    #[test]
    fn boundary_nodes() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 3).unwrap();
        let b: Vec<bool> = (0..4).map(|n| g.node_on_boundary(n)).collect();
        assert_eq!(b, vec![true, false, false, true]);
    }

    #[test]
    fn refined_cells_sit_inside_parents() {
        let g = GridSpec::new(vec![[0.0, 1.0], [0.0, 2.0]], vec![3, 2]).unwrap();
        let (f, parent) = g.refine_axis(1, 4).unwrap();
        assert_eq!(f.n_cells(), 24);
        for c in 0..f.n_cells() {
            let x = f.cell_center(c);
            let m = g.cell_multi_index(parent[c]);
            for k in 0..2 {
                let lo = g.bounds()[k][0] + m[k] as f64 * g.spacing(k);
                assert!(x[k] > lo && x[k] < lo + g.spacing(k));
            }
        }
    }
}
