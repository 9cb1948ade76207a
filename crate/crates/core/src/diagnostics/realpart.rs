use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{eval_form, CoefficientSet, DerivedFields, TestFunction};
use crate::oracle::{FormKind, Oracle};
use crate::pointwise::{CMatrix, C64, I};
use crate::regular::{RegularizedCoefficients, SingularStructure, COMMUTATOR_TOL};

/// Relative tolerance for `(I+iZ)QX = (I−iZ)QY`.
pub const XY_TOL: f64 = 1e-9;

/// Relative tolerance for the oracle comparison of `Re(a_reg)` and `(Re a)_reg`.
pub const REALPART_ORACLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPartPair {
    pub u: usize,
    pub v: usize,
    /// `Re(a_reg)(u_u, u_v)` from the coefficient formula.
    pub re_of_regular: C64,
    /// `(Re a)_reg(u_u, u_v)` from the oracle.
    pub regular_of_re: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealPartReport {
    /// Both pointwise criteria hold in every cell.
    pub holds: bool,
    pub commutator_max: f64,
    /// Largest `‖(I+iZ)QX − (I−iZ)QY‖` over cells.
    pub xy_residual: f64,
    pub pairs: Vec<RealPartPair>,
    /// Largest `|Re(a_reg) − (Re a)_reg| / (1 + |Re(a_reg)|)` over `pairs`.
    pub oracle_gap: Option<f64>,
}

impl RealPartReport {
    /// Whether the oracle sees `Re(a_reg) = (Re a)_reg` on the tested pairs.
    pub fn oracle_agrees(&self) -> Option<bool> {
        self.oracle_gap.map(|g| g <= REALPART_ORACLE_TOL)
    }
}

/// Pointwise test of `QZ = ZQ` and `(I+iZ)QX = (I−iZ)QY`.
pub fn check_realpart_commutation(derived: &DerivedFields, s: &SingularStructure) -> RealPartReport {
    let mut holds = true;
    let mut commutator_max: f64 = 0.0;
    let mut xy_residual: f64 = 0.0;
    for c in 0..s.n_cells() {
        let (q, z) = (&s.q[c], &derived.z[c]);
        let zn = z.frobenius_norm().max(1.0);
        let comm = (&(q * z) - &(z * q)).frobenius_norm();
        let id = CMatrix::identity(z.rows());
        let lhs = (&id + &z.scale(I)).mul_vec(&q.mul_vec(&derived.x[c]));
        let rhs = (&id - &z.scale(I)).mul_vec(&q.mul_vec(&derived.y[c]));
        let xy = (&lhs - &rhs).norm();
        let scale = zn * (1.0 + derived.x[c].norm() + derived.y[c].norm());
        holds &= comm <= COMMUTATOR_TOL * zn && xy <= XY_TOL * scale;
        commutator_max = commutator_max.max(comm);
        xy_residual = xy_residual.max(xy);
    }
    RealPartReport { holds, commutator_max, xy_residual, pairs: Vec::new(), oracle_gap: None }
}

/// Pointwise test plus a comparison of `Re(a_reg)` with the oracle's regular part of `Re a`
/// on all pairs of `funcs`.
pub fn check_realpart_with_oracle(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
    reg: &RegularizedCoefficients,
    funcs: &[TestFunction],
) -> Result<RealPartReport> {
    let mut report = check_realpart_commutation(derived, s);
    if funcs.is_empty() {
        return Ok(report);
    }
    let oracle = Oracle::new(coeffs, derived, &s.q, funcs, 0.0, FormKind::RealPart)?;
    let m = oracle.matrix()?;
    let mut gap: f64 = 0.0;
    for (i, u) in funcs.iter().enumerate() {
        for (k, v) in funcs.iter().enumerate() {
            let uv = eval_form(&reg.reg, u, v)?.value;
            let vu = eval_form(&reg.reg, v, u)?.value;
            let re = 0.5 * (uv + vu.conj());
            let orc = m[(k, i)];
            gap = gap.max((re - orc).norm() / (1.0 + re.norm()));
            report.pairs.push(RealPartPair { u: i, v: k, re_of_regular: re, regular_of_re: orc });
        }
    }
    report.oracle_gap = Some(gap);
    Ok(report)
}
