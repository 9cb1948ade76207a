//! `π₁`, `π₂`, `T`, `T₁₁` and `Π` on the finite-dimensional `V`, obtained from
//! Gram-matrix normal equations rather than from closed-form multiplication
//! operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointwise::{CMatrix, CVector, Lu, C64, I};

use super::ambient::{AmbientSpace, FormKind, HPrimeVec};
use super::subspace::{V1Basis, VSubspace};

/// Above this dimension of `V` the dense invariant checks are skipped.
pub const DENSE_LIMIT: usize = 600;

/// `T₁₁ = T|_{V₁}` per cell, in the local `V₁` coordinates.
#[derive(Clone, Debug)]
pub struct V1Operators {
    pub kind: FormKind,
    pub t11: Vec<CMatrix>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl V1Operators {
    pub fn new(ambient: &AmbientSpace, v1: &V1Basis, kind: FormKind) -> Self {
        let h = ambient.h();
        let t11 = (0..v1.n_cells())
            .map(|c| {
                let s = &v1.vectors[c];
                let k = s.len();
                let ima = CMatrix::from_fn(k, k, |r, l| ambient.form_imag_local(kind, c, zero(), &s[l], zero(), &s[r]) * h);
                let mut t = CMatrix::zeros(k, k);
                for l in 0..k {
                    t.set_column(l, &v1.solve_ht(c, &ima.column(l)));
                }
                t
            })
            .collect();
        Self { kind, t11 }
    }

    /// Coordinates of `π₁x` for any `x ∈ H′`.
    pub fn project_v1(&self, ambient: &AmbientSpace, v1: &V1Basis, x: &HPrimeVec) -> CVector {
        let h = ambient.h();
        let mut out = CVector::zeros(v1.dim());
        for c in 0..v1.n_cells() {
            let s = &v1.vectors[c];
            if s.is_empty() {
                continue;
            }
            let rhs = CVector(s.iter().map(|sl| ambient.ip_local(c, x.u[c], &x.w[c], zero(), sl) * h).collect());
            for (l, v) in v1.solve_gram(c, &rhs).iter().enumerate() {
                out[v1.offsets[c] + l] = *v;
            }
        }
        out
    }

    /// Coordinates of `Tx`: the unique element of `V₁` with `Im ã(x, v) = h̃(Tx, v)` on `V₁`.
    pub fn apply_t(&self, ambient: &AmbientSpace, v1: &V1Basis, x: &HPrimeVec) -> CVector {
        let h = ambient.h();
        let mut out = CVector::zeros(v1.dim());
        for c in 0..v1.n_cells() {
            let s = &v1.vectors[c];
            if s.is_empty() {
                continue;
            }
            let rhs = CVector(
                s.iter().map(|sl| ambient.form_imag_local(self.kind, c, x.u[c], &x.w[c], zero(), sl) * h).collect(),
            );
            for (l, v) in v1.solve_ht(c, &rhs).iter().enumerate() {
                out[v1.offsets[c] + l] = *v;
            }
        }
        out
    }

    pub fn apply_t11(&self, v1: &V1Basis, coef: &CVector) -> CVector {
        let mut out = CVector::zeros(v1.dim());
        for c in 0..v1.n_cells() {
            let k = v1.cell_dim(c);
            if k == 0 {
                continue;
            }
            let o = v1.offsets[c];
            let local = CVector(coef.0[o..o + k].to_vec());
            for (l, v) in self.t11[c].mul_vec(&local).iter().enumerate() {
                out[o + l] = *v;
            }
        }
        out
    }

    /// Coordinates of `Tπ₂x`.
    pub fn t_pi2(&self, ambient: &AmbientSpace, v1: &V1Basis, x: &HPrimeVec) -> CVector {
        let beta = self.project_v1(ambient, v1, x);
        &self.apply_t(ambient, v1, x) - &self.apply_t11(v1, &beta)
    }

    /// `h̃(y, y)` for `y = Σ coef_j s_j`.
    pub fn ht_norm_sqr(&self, v1: &V1Basis, coef: &CVector) -> f64 {
        let mut acc = 0.0;
        for c in 0..v1.n_cells() {
            let k = v1.cell_dim(c);
            if k == 0 {
                continue;
            }
            let o = v1.offsets[c];
            let local = CVector(coef.0[o..o + k].to_vec());
            acc += v1.ht_gram[c].quadratic(&local, &local).re;
        }
        acc
    }
}

/// Operators in the coordinates of the `V` basis `{Φ_i} ∪ {s_j}`.
#[derive(Clone, Debug)]
pub struct AbstractOperators {
    pub v1_ops: V1Operators,
    /// `V₁` coordinates of `π₁Φ_i` (column `i`).
    pub pi1: CMatrix,
    /// `V₁` coordinates of `TΦ_i`.
    pub t_phi: CMatrix,
    /// `V₁` coordinates of `ΠΦ_i`; its `Φ` coordinates are `e_i`. `Π` vanishes on `V₁`.
    pub pi_j: CMatrix,
}

impl AbstractOperators {
    pub fn kind(&self) -> FormKind {
        self.v1_ops.kind
    }
}

pub fn compute_operators(ambient: &AmbientSpace, vs: &VSubspace, kind: FormKind) -> Result<AbstractOperators> {
    let v1 = &vs.v1;
    let v1_ops = V1Operators::new(ambient, v1, kind);
    let m = vs.n_funcs();
    let n1 = v1.dim();
    let mut pi1 = CMatrix::zeros(n1, m);
    let mut t_phi = CMatrix::zeros(n1, m);
    let mut pi_j = CMatrix::zeros(n1, m);
    for i in 0..m {
        let p = v1_ops.project_v1(ambient, v1, &vs.phis[i]);
        let t = v1_ops.apply_t(ambient, v1, &vs.phis[i]);
        let t_pi2 = &t - &v1_ops.apply_t11(v1, &p);
        pi1.set_column(i, &p);
        t_phi.set_column(i, &t);
        let mut corr = CVector::zeros(n1);
        for c in 0..v1.n_cells() {
            let k = v1.cell_dim(c);
            if k == 0 {
                continue;
            }
            let o = v1.offsets[c];
            let m_c = &CMatrix::identity(k) + &v1_ops.t11[c].scale(I);
            let lu = Lu::factor(&m_c)
                .ok_or_else(|| Error::SingularGram(format!("cell {c}: I + iT11 is singular")))?;
            let x = lu.solve_vec(&CVector(t_pi2.0[o..o + k].to_vec()));
            for l in 0..k {
                corr[o + l] = x[l];
            }
        }
        let col = CVector((0..n1).map(|j| -p[j] - I * corr[j]).collect());
        pi_j.set_column(i, &col);
    }
    Ok(AbstractOperators { v1_ops, pi1, t_phi, pi_j })
}

/// `ΠΦ(u_i)` as an `H′` vector.
pub fn pi_phi(ambient: &AmbientSpace, vs: &VSubspace, ops: &AbstractOperators, i: usize) -> Result<HPrimeVec> {
    if i >= vs.n_funcs() {
        return Err(Error::IndexOutOfRange { index: i, len: vs.n_funcs() });
    }
    let corr = vs.v1.embed(&ops.pi_j.column(i), ambient.dim());
    Ok(HPrimeVec {
        u: vs.phis[i].u.clone(),
        w: vs.phis[i].w.iter().zip(&corr.w).map(|(a, b)| a + b).collect(),
    })
}

/// `Tπ₂Φ(u_i)` as an `H′` vector.
pub fn t_pi2_phi(ambient: &AmbientSpace, vs: &VSubspace, ops: &AbstractOperators, i: usize) -> Result<HPrimeVec> {
    if i >= vs.n_funcs() {
        return Err(Error::IndexOutOfRange { index: i, len: vs.n_funcs() });
    }
    let coef = &ops.t_phi.column(i) - &ops.v1_ops.apply_t11(&vs.v1, &ops.pi1.column(i));
    Ok(vs.v1.embed(&coef, ambient.dim()))
}

/// `a_reg(u_i, u_k) = ã(ΠΦ(u_i), ΠΦ(u_k))` (with `h̃` in place of `ã` for [`FormKind::RealPart`]).
pub fn oracle_regular_part(
    ambient: &AmbientSpace,
    vs: &VSubspace,
    ops: &AbstractOperators,
    u_idx: usize,
    v_idx: usize,
) -> Result<C64> {
    let x = pi_phi(ambient, vs, ops, u_idx)?;
    let y = pi_phi(ambient, vs, ops, v_idx)?;
    Ok(ambient.form(ops.kind(), &x, &y))
}

/// All pairs: entry `[k][i] = a_reg(u_i, u_k)`.
pub fn oracle_matrix(ambient: &AmbientSpace, vs: &VSubspace, ops: &AbstractOperators) -> Result<CMatrix> {
    let m = vs.n_funcs();
    let pis = (0..m).map(|i| pi_phi(ambient, vs, ops, i)).collect::<Result<Vec<_>>>()?;
    Ok(CMatrix::from_fn(m, m, |k, i| ambient.form(ops.kind(), &pis[i], &pis[k])))
}

/// Dense `N × N` matrix `F[k][l] = f(e_l, e_k)` over the `V` basis, using that
/// each `s_j` lives on a single cell.
fn dense_form(
    ambient: &AmbientSpace,
    vs: &VSubspace,
    f: &dyn Fn(usize, C64, &CVector, C64, &CVector) -> C64,
) -> CMatrix {
    let m = vs.n_funcs();
    let n = vs.dim();
    let h = ambient.h();
    let v1 = &vs.v1;
    let mut out = CMatrix::zeros(n, n);
    for i in 0..m {
        for k in 0..m {
            let terms: Vec<C64> = (0..ambient.n_cells())
                .map(|c| f(c, vs.phis[i].u[c], &vs.phis[i].w[c], vs.phis[k].u[c], &vs.phis[k].w[c]))
                .collect();
            out[(k, i)] = crate::pointwise::pairwise_sum(&terms) * h;
        }
    }
    for c in 0..v1.n_cells() {
        let o = v1.offsets[c];
        for (l, s) in v1.vectors[c].iter().enumerate() {
            let j = m + o + l;
            for i in 0..m {
                let (u, w) = (vs.phis[i].u[c], &vs.phis[i].w[c]);
                out[(j, i)] = f(c, u, w, zero(), s) * h;
                out[(i, j)] = f(c, zero(), s, u, w) * h;
            }
            for (r, s2) in v1.vectors[c].iter().enumerate() {
                out[(m + o + r, j)] = f(c, zero(), s, zero(), s2) * h;
            }
        }
    }
    out
}

/// Relative residuals of the structural properties of the computed operators.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub skipped: bool,
    pub pi1_idempotent: f64,
    pub pi1_self_adjoint: f64,
    pub pi2_orthogonal_to_v1: f64,
    pub ht_equals_ip_on_v1: f64,
    pub t_defining_relation: f64,
    pub t11_self_adjoint: f64,
    pub pi_idempotent: f64,
}

impl InvariantReport {
    pub fn max(&self) -> f64 {
        [
            self.pi1_idempotent,
            self.pi1_self_adjoint,
            self.pi2_orthogonal_to_v1,
            self.ht_equals_ip_on_v1,
            self.t_defining_relation,
            self.t11_self_adjoint,
            self.pi_idempotent,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel(diff: &CMatrix, scale: f64) -> f64 {
    diff.max_abs() / (1.0 + scale)
}

/// Full operator matrices on `V` (columns are images of basis vectors).
pub fn dense_operators(vs: &VSubspace, ops: &AbstractOperators) -> (CMatrix, CMatrix, CMatrix) {
    let m = vs.n_funcs();
    let n1 = vs.v1.dim();
    let n = m + n1;
    let mut p1 = CMatrix::zeros(n, n);
    let mut t = CMatrix::zeros(n, n);
    let mut pi = CMatrix::zeros(n, n);
    for i in 0..m {
        pi[(i, i)] = C64::new(1.0, 0.0);
        for j in 0..n1 {
            p1[(m + j, i)] = ops.pi1[(j, i)];
            t[(m + j, i)] = ops.t_phi[(j, i)];
            pi[(m + j, i)] = ops.pi_j[(j, i)];
        }
    }
    for c in 0..vs.v1.n_cells() {
        let o = vs.v1.offsets[c];
        let k = vs.v1.cell_dim(c);
        for l in 0..k {
            p1[(m + o + l, m + o + l)] = C64::new(1.0, 0.0);
            for r in 0..k {
                t[(m + o + r, m + o + l)] = ops.v1_ops.t11[c][(r, l)];
            }
        }
    }
    (p1, t, pi)
}

pub fn check_invariants(ambient: &AmbientSpace, vs: &VSubspace, ops: &AbstractOperators) -> InvariantReport {
    let n = vs.dim();
    if n > DENSE_LIMIT {
        return InvariantReport { skipped: true, ..Default::default() };
    }
    let kind = ops.kind();
    let g = dense_form(ambient, vs, &|c, a, b, d, e| ambient.ip_local(c, a, b, d, e));
    let ht = dense_form(ambient, vs, &|c, a, b, d, e| ambient.ht_local(c, a, b, d, e));
    let ima = dense_form(ambient, vs, &|c, a, b, d, e| ambient.form_imag_local(kind, c, a, b, d, e));
    let (p1, t, pi) = dense_operators(vs, ops);
    let m = vs.n_funcs();
    let gs = g.max_abs();
    let j_rows = |mat: &CMatrix| mat.sub_matrix(m..n, 0..n);
    let gp = &g * &p1;
    let p2 = &CMatrix::identity(n) - &p1;
    let ht_t = &ht * &t;
    let k = ht_t.sub_matrix(m..n, m..n);
    InvariantReport {
        skipped: false,
        pi1_idempotent: rel(&(&(&p1 * &p1) - &p1), p1.max_abs()),
        pi1_self_adjoint: rel(&(&gp - &gp.adjoint()), gs),
        pi2_orthogonal_to_v1: rel(&j_rows(&(&g * &p2)), gs),
        ht_equals_ip_on_v1: rel(&(&ht.sub_matrix(0..n, m..n) - &g.sub_matrix(0..n, m..n)), gs),
        t_defining_relation: rel(&(&j_rows(&ima) - &j_rows(&ht_t)), ima.max_abs()),
        t11_self_adjoint: rel(&(&k - &k.adjoint()), k.max_abs()),
        pi_idempotent: rel(&(&(&pi * &pi) - &pi), pi.max_abs()),
    }
}

/// Largest relative deviation of the computed `π₁` and `T` from the
/// multiplication operators `π₁(u,w) = (0, Qw + ½uQ(X+Y))` and
/// `T(u,w) = (0, QZw + (i/2)uQ(X−Y))`, over all basis vectors of `V`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiplicationResiduals {
    pub pi1: f64,
    pub t: f64,
}

pub fn multiplication_residuals(
    ambient: &AmbientSpace,
    vs: &VSubspace,
    ops: &AbstractOperators,
    q_field: &[CMatrix],
) -> MultiplicationResiduals {
    let d = ambient.dim();
    let (p1, t, _) = dense_operators(vs, ops);
    let m = vs.n_funcs();
    let n = vs.dim();
    let mut out = MultiplicationResiduals::default();
    for k in 0..n {
        let x = vs.basis_vector(k, d);
        let scale = 1.0 + ambient.plain_norm(&x);
        let mut pi1_formula = HPrimeVec::zeros(ambient.n_cells(), d);
        let mut t_formula = HPrimeVec::zeros(ambient.n_cells(), d);
        for c in 0..ambient.n_cells() {
            let q = &q_field[c];
            let (u, w) = (x.u[c], &x.w[c]);
            let xy = &ambient.x[c] + &ambient.y[c];
            let xmy = &ambient.x[c] - &ambient.y[c];
            pi1_formula.w[c] = &q.mul_vec(w) + &q.mul_vec(&xy).scale(0.5 * u);
            t_formula.w[c] = &(q * &ambient.z[c]).mul_vec(w) + &q.mul_vec(&xmy).scale(0.5 * I * u);
        }
        let col_p1 = CVector((m..n).map(|j| p1[(j, k)]).collect());
        let col_t = CVector((m..n).map(|j| t[(j, k)]).collect());
        let got_p1 = vs.v1.embed(&col_p1, d);
        let got_t = vs.v1.embed(&col_t, d);
        out.pi1 = out.pi1.max(ambient.plain_norm(&got_p1.sub(&pi1_formula)) / scale);
        out.t = out.t.max(ambient.plain_norm(&got_t.sub(&t_formula)) / scale);
    }
    out
}
