use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{estimate_vertex_angle_fields, CoefficientSet, DerivedFields, FormCoefficients, TestFunction, VertexEstimate};
use crate::oracle::{t_pi2_phi, FormKind, HPrimeVec, Oracle};
use crate::pointwise::I;
use crate::regular::{
    assemble_regular, assemble_regular_commuting_unchecked, pure_second_order_parts, SingularStructure,
    COMMUTATOR_TOL,
};

use super::probe::{run_probe, ProbeConfig, ProbeOutcome, PROBE_SLOPE_TOL};
use super::realpart::{check_realpart_commutation, RealPartReport};

/// Relative tolerance for the general and commuting formulas to count as equal.
pub const FORMULA_TOL: f64 = 1e-9;
/// Relative tolerance for `Tπ₂Φ(u)` against its commuting-case closed form.
pub const T_PI2_TOL: f64 = 1e-8;
/// Below this commutator every other item must pass.
pub const STRICT_COMMUTATOR: f64 = 1e-10;
/// A growing probe requires a commutator at least this large somewhere.
pub const WITNESS_COMMUTATOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Consistent with the property on everything tested, without proving it.
    ConsistentTrue,
    /// Disproved by a witness.
    CertifiedFalse,
    Undecided,
}

impl Verdict {
    pub fn holds(self) -> Option<bool> {
        match self {
            Verdict::Holds | Verdict::ConsistentTrue => Some(true),
            Verdict::Fails | Verdict::CertifiedFalse => Some(false),
            Verdict::Undecided => None,
        }
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

/// The five equivalent conditions on the singular part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    /// (i) `a_s` is sectorial.
    pub singular_sectorial: Verdict,
    /// (ii) `QZ = ZQ`.
    pub commutes: Verdict,
    /// (iii) the regular part is given by the commuting formula.
    pub commuting_formula: Verdict,
    /// (iv) `Tπ₂Φ(u) = (0, −½uQZQ(X+Y) + (i/2)uQ(X−Y))`.
    pub t_pi2_formula: Verdict,
    /// (v) the singular part of the principal part is sectorial.
    pub principal_singular_sectorial: Verdict,
}

impl Verdicts {
    pub fn as_array(&self) -> [(&'static str, Verdict); 5] {
        [
            ("i", self.singular_sectorial),
            ("ii", self.commutes),
            ("iii", self.commuting_formula),
            ("iv", self.t_pi2_formula),
            ("v", self.principal_singular_sectorial),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Largest `‖QZ − ZQ‖_F`.
    pub commutator_max: f64,
    pub commutator_cell: usize,
    /// Largest `‖QZ(I−Q)A^{1/2}‖_F`.
    pub qz_iq_asqrt_max: f64,
    pub realpart: RealPartReport,
    /// Largest relative deviation between the general and commuting formulas.
    pub formula_deviation: Option<f64>,
    /// Largest relative residual of `Tπ₂Φ(u)` against its commuting-case closed form.
    pub t_pi2_residual: Option<f64>,
    pub slope_probe: Vec<ProbeOutcome>,
    /// Largest gradient-channel slope over the probed directions.
    pub probe_slope: f64,
    pub as_vertex: Option<VertexEstimate>,
    pub principal_singular_vertex: Option<VertexEstimate>,
    pub verdicts: Verdicts,
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    pub fn probe_growing(&self) -> bool {
        self.slope_probe.iter().any(ProbeOutcome::is_growing)
    }

    /// Violations of the implication graph among the verdicts and measurements.
    pub fn inconsistencies(&self) -> Vec<String> {
        let v = &self.verdicts;
        let mut out = Vec::new();
        let group = [("ii", v.commutes), ("iii", v.commuting_formula), ("iv", v.t_pi2_formula)];
        let decided: Vec<_> = group.iter().filter_map(|(n, x)| x.holds().map(|b| (*n, b))).collect();
        if decided.windows(2).any(|w| w[0].1 != w[1].1) {
            out.push(format!("(ii), (iii) and (iv) disagree: {decided:?}"));
        }
        for (name, item) in [("i", v.singular_sectorial), ("v", v.principal_singular_sectorial)] {
            if let (Some(a), Some(b)) = (v.commutes.holds(), item.holds()) {
                if a != b {
                    out.push(format!("(ii) is {a} but ({name}) is {b}"));
                }
            }
        }
        if self.probe_growing() && self.commutator_max <= WITNESS_COMMUTATOR {
            out.push(format!("probe grows but the commutator is only {:.3e}", self.commutator_max));
        }
        if self.commutator_max < STRICT_COMMUTATOR {
            if self.formula_deviation.is_some_and(|d| d > FORMULA_TOL) {
                out.push("commutator vanishes but the formulas differ".into());
            }
            if self.t_pi2_residual.is_some_and(|r| r > T_PI2_TOL) {
                out.push("commutator vanishes but Tπ₂Φ(u) misses its closed form".into());
            }
            if self.probe_slope >= PROBE_SLOPE_TOL {
                out.push(format!("commutator vanishes but the probe slope is {:.3e}", self.probe_slope));
            }
        }
        out
    }
}

/// Vertex and angle of a singular part on the span of `basis`.
pub fn singular_vertex(sing: &FormCoefficients, basis: &[TestFunction]) -> Result<VertexEstimate> {
    estimate_vertex_angle_fields(sing, basis)
}

fn relative_deviation(a: &FormCoefficients, b: &FormCoefficients) -> f64 {
    a.max_deviation(b) / (1.0 + a.max_abs().max(b.max_abs()))
}

fn t_pi2_residual(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
    funcs: &[TestFunction],
) -> Result<f64> {
    let oracle = Oracle::new(coeffs, derived, &s.q, funcs, 0.0, FormKind::Full)?;
    let amb = &oracle.ambient;
    let mut worst: f64 = 0.0;
    for (i, phi) in oracle.space.phis.iter().enumerate() {
        let got = t_pi2_phi(amb, &oracle.space, &oracle.ops, i)?;
        let mut want = HPrimeVec::zeros(amb.n_cells(), amb.dim());
        for c in 0..amb.n_cells() {
            let (q, z) = (&s.q[c], &derived.z[c]);
            let u = phi.u[c];
            let qzq = &(q * z) * q;
            let sum = &derived.x[c] + &derived.y[c];
            let diff = &derived.x[c] - &derived.y[c];
            want.w[c] = &qzq.mul_vec(&sum).scale(-0.5 * u)
                + &q.mul_vec(&diff).scale(0.5 * I * u);
        }
        worst = worst.max(amb.plain_norm(&got.sub(&want)) / (1.0 + amb.plain_norm(phi)));
    }
    Ok(worst)
}

/// Evaluates the five equivalent conditions and the measurements behind them.
pub fn check_equivalences(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    s: &SingularStructure,
    funcs: &[TestFunction],
    probe: &ProbeConfig,
) -> Result<DiagnosticsReport> {
    let mut notes = Vec::new();
    let (commutator_max, commutator_cell) = s.commutator_max(derived);
    let commutes = (0..s.n_cells()).all(|c| {
        let (q, z) = (&s.q[c], &derived.z[c]);
        (&(q * z) - &(z * q)).frobenius_norm() <= COMMUTATOR_TOL * z.frobenius_norm().max(1.0)
    });

    let full = assemble_regular(coeffs, derived, s)?;
    let formula_deviation = match assemble_regular_commuting_unchecked(coeffs, derived, s) {
        Ok(simple) => Some(relative_deviation(&full.reg, &simple.reg)),
        Err(e) => {
            notes.push(format!("commuting formula unavailable: {e}"));
            None
        }
    };

    let t_res = if funcs.is_empty() {
        notes.push("no test functions: (iv) undecided".into());
        None
    } else {
        match t_pi2_residual(coeffs, derived, s, funcs) {
            Ok(r) => Some(r),
            Err(e) => {
                notes.push(format!("oracle unavailable for (iv): {e}"));
                None
            }
        }
    };

    let slope_probe = run_probe(coeffs, derived, &s.q, probe)?;
    let probe_slope = slope_probe
        .iter()
        .filter(|p| !p.report.skipped)
        .map(|p| p.report.gradient_slope)
        .fold(0.0f64, f64::max);
    let growing = slope_probe.iter().any(ProbeOutcome::is_growing);
    let probed = slope_probe.iter().any(|p| !p.report.skipped);
    let sectorial_verdict = if growing {
        Verdict::CertifiedFalse
    } else if probed {
        Verdict::ConsistentTrue
    } else {
        Verdict::Undecided
    };

    let vertex = |f: &FormCoefficients, what: &str, notes: &mut Vec<String>| {
        if funcs.is_empty() {
            return None;
        }
        singular_vertex(f, funcs).map_err(|e| notes.push(format!("{what} vertex search failed: {e}"))).ok()
    };
    let as_vertex = vertex(&full.sing, "a_s", &mut notes);
    let principal = pure_second_order_parts(coeffs, derived, s)?;
    let principal_singular_vertex = vertex(&principal.sing, "principal a_s", &mut notes);

    let verdicts = Verdicts {
        singular_sectorial: sectorial_verdict,
        commutes: Verdict::from_bool(commutes),
        commuting_formula: formula_deviation.map_or(Verdict::Undecided, |d| Verdict::from_bool(d <= FORMULA_TOL)),
        t_pi2_formula: t_res.map_or(Verdict::Undecided, |r| Verdict::from_bool(r <= T_PI2_TOL)),
        principal_singular_sectorial: sectorial_verdict,
    };
    Ok(DiagnosticsReport {
        commutator_max,
        commutator_cell,
        qz_iq_asqrt_max: s.qz_p_asqrt_max(derived),
        realpart: check_realpart_commutation(derived, s),
        formula_deviation,
        t_pi2_residual: t_res,
        slope_probe,
        probe_slope,
        as_vertex,
        principal_singular_vertex,
        verdicts,
        notes,
    })
}
