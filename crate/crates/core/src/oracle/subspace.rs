use crate::error::{Error, Result};
use crate::model::{l2_gram, TestFunction};
use crate::pointwise::{herm_eig, CMatrix, CVector, Cholesky, C64};
use crate::regular::range_basis;

use super::ambient::{AmbientSpace, HPrimeVec};

/// Condition number above which a Gram matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e10;
const CHOLESKY_TOL: f64 = 1e-14;

/// Basis of `V₁ = {0} × range Q`: orthonormal vectors of `range Q(x)` localized at single cells.
#[derive(Clone, Debug)]
pub struct V1Basis {
    pub vectors: Vec<Vec<CVector>>,
    /// Index of the first basis vector of each cell; `offsets[n_cells]` is the dimension.
    pub offsets: Vec<usize>,
    /// `⟨s_l, s_k⟩_a` per cell, row `k`, column `l`.
    pub gram: Vec<CMatrix>,
    /// `h̃(s_l, s_k)` per cell.
    pub ht_gram: Vec<CMatrix>,
    gram_chol: Vec<Option<Cholesky>>,
    ht_chol: Vec<Option<Cholesky>>,
}

impl V1Basis {
    pub fn new(ambient: &AmbientSpace, q_field: &[CMatrix]) -> Result<Self> {
        let n = ambient.n_cells();
        if q_field.len() != n {
            return Err(Error::GridMismatch(format!("Q field has {} cells, ambient space {n}", q_field.len())));
        }
        let h = ambient.h();
        let zero = C64::new(0.0, 0.0);
        let mut vectors = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut gram = Vec::with_capacity(n);
        let mut ht_gram = Vec::with_capacity(n);
        let mut gram_chol = Vec::with_capacity(n);
        let mut ht_chol = Vec::with_capacity(n);
        let mut total = 0;
        for c in 0..n {
            let basis = range_basis(&q_field[c])?;
            let k = basis.len();
            let g = CMatrix::from_fn(k, k, |r, l| ambient.ip_local(c, zero, &basis[l], zero, &basis[r]) * h);
            let hg = CMatrix::from_fn(k, k, |r, l| ambient.ht_local(c, zero, &basis[l], zero, &basis[r]) * h);
            let gc = Cholesky::factor(&g, CHOLESKY_TOL);
            let hc = Cholesky::factor(&hg, CHOLESKY_TOL);
            if k > 0 && (gc.is_none() || hc.is_none()) {
                return Err(Error::SingularGram(format!("cell {c}: V1 block is not positive definite")));
            }
            offsets.push(total);
            total += k;
            vectors.push(basis);
            gram.push(g);
            ht_gram.push(hg);
            gram_chol.push(gc);
            ht_chol.push(hc);
        }
        offsets.push(total);
        Ok(Self { vectors, offsets, gram, ht_gram, gram_chol, ht_chol })
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn n_cells(&self) -> usize {
        self.vectors.len()
    }

    pub fn cell_dim(&self, c: usize) -> usize {
        self.vectors[c].len()
    }

    /// `(cell, local index)` of global basis index `j`.
    pub fn locate(&self, j: usize) -> (usize, usize) {
        let c = self.offsets.partition_point(|&o| o <= j) - 1;
        (c, j - self.offsets[c])
    }

    /// Solves the `⟨·,·⟩_a` block system of cell `c`.
    pub fn solve_gram(&self, c: usize, rhs: &CVector) -> CVector {
        match &self.gram_chol[c] {
            Some(ch) => ch.solve_vec(rhs),
            None => CVector::zeros(0),
        }
    }

    /// Solves the `h̃` block system of cell `c`.
    pub fn solve_ht(&self, c: usize, rhs: &CVector) -> CVector {
        match &self.ht_chol[c] {
            Some(ch) => ch.solve_vec(rhs),
            None => CVector::zeros(0),
        }
    }

    /// `H′` vector `Σ_j coef_j s_j`.
    pub fn embed(&self, coef: &CVector, d: usize) -> HPrimeVec {
        let n = self.n_cells();
        let mut out = HPrimeVec::zeros(n, d);
        for c in 0..n {
            for (k, s) in self.vectors[c].iter().enumerate() {
                out.w[c].axpy(coef[self.offsets[c] + k], s);
            }
        }
        out
    }
}

/// `V = span{Φ(u_i)} ⊕ V₁` with its `⟨·,·⟩_a` Gram blocks.
#[derive(Clone, Debug)]
pub struct VSubspace {
    pub phis: Vec<HPrimeVec>,
    pub v1: V1Basis,
    /// `⟨Φ_i, Φ_k⟩_a` at row `k`, column `i`.
    pub g_pp: CMatrix,
    /// `⟨Φ_i, s_j⟩_a` at row `j`, column `i`.
    pub g_jp: CMatrix,
    /// Condition number of the diagonally scaled Schur complement of the `V₁` block.
    pub schur_condition: f64,
    /// Condition number of the `H`-Gram of the function family.
    pub h_gram_condition: f64,
}

fn scaled_condition(m: &CMatrix) -> Result<(f64, f64)> {
    let n = m.rows();
    let d: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return Ok((0.0, f64::INFINITY));
    }
    let s = CMatrix::from_fn(n, n, |r, c| m[(r, c)] / (d[r] * d[c]).sqrt());
    let e = herm_eig(&s.hermitian_part())?;
    let cond = if e.min() > 0.0 { e.max() / e.min() } else { f64::INFINITY };
    Ok((e.min(), cond))
}

pub fn build_v_subspace(ambient: &AmbientSpace, q_field: &[CMatrix], funcs: &[TestFunction]) -> Result<VSubspace> {
    if funcs.is_empty() {
        return Err(Error::DegenerateBasis("function family is empty".into()));
    }
    let v1 = V1Basis::new(ambient, q_field)?;
    let phis = funcs.iter().map(|u| ambient.phi(u)).collect::<Result<Vec<_>>>()?;
    let m = phis.len();
    let n1 = v1.dim();
    let h = ambient.h();
    let zero = C64::new(0.0, 0.0);

    let mut g_pp = CMatrix::zeros(m, m);
    for i in 0..m {
        for k in i..m {
            let v = ambient.ip(&phis[i], &phis[k]);
            g_pp[(k, i)] = v;
            g_pp[(i, k)] = v.conj();
        }
    }
    let mut g_jp = CMatrix::zeros(n1, m);
    for c in 0..v1.n_cells() {
        for (l, s) in v1.vectors[c].iter().enumerate() {
            for i in 0..m {
                g_jp[(v1.offsets[c] + l, i)] = ambient.ip_local(c, phis[i].u[c], &phis[i].w[c], zero, s) * h;
            }
        }
    }

    let mut schur = g_pp.clone();
    for c in 0..v1.n_cells() {
        let k = v1.cell_dim(c);
        if k == 0 {
            continue;
        }
        let block = g_jp.sub_matrix(v1.offsets[c]..v1.offsets[c] + k, 0..m);
        let mut solved = CMatrix::zeros(k, m);
        for i in 0..m {
            solved.set_column(i, &v1.solve_gram(c, &block.column(i)));
        }
        schur = &schur - &(&block.adjoint() * &solved);
    }
    let (schur_min, schur_condition) = scaled_condition(&schur)?;
    if !(schur_min > 0.0) || schur_condition > MAX_CONDITION {
        return Err(Error::DegenerateBasis(format!(
            "V Gram is singular (scaled Schur complement condition {schur_condition:.3e})"
        )));
    }
    let (_, h_gram_condition) = scaled_condition(&l2_gram(funcs))?;
    if h_gram_condition > MAX_CONDITION {
        return Err(Error::KernelMismatch(format!(
            "a combination of the functions vanishes in H but not in V (H-Gram condition {h_gram_condition:.3e})"
        )));
    }
    Ok(VSubspace { phis, v1, g_pp, g_jp, schur_condition, h_gram_condition })
}

impl VSubspace {
    pub fn n_funcs(&self) -> usize {
        self.phis.len()
    }

    pub fn dim(&self) -> usize {
        self.n_funcs() + self.v1.dim()
    }

    /// Basis vector `e_k` of `V` as an `H′` vector: `Φ_k` for `k < m`, then `s_j`.
    pub fn basis_vector(&self, k: usize, d: usize) -> HPrimeVec {
        let m = self.n_funcs();
        if k < m {
            return self.phis[k].clone();
        }
        let (c, l) = self.v1.locate(k - m);
        let mut out = HPrimeVec::zeros(self.v1.n_cells(), d);
        out.w[c] = self.v1.vectors[c][l].clone();
        out
    }
}
