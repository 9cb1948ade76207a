use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{CoefficientSet, DerivedFields, FormCoefficients, TestFunction};
use crate::oracle::{build_ambient, t_pi2_probe, FormKind, ProbeReport, V1Basis, V1Operators, DEFAULT_LAMBDAS};
use crate::pointwise::CMatrix;

/// Largest phase step `λ_max·h` along the probe direction before the grid is refined.
pub const MAX_PHASE_STEP: f64 = 0.5;

/// A probe counts as growing when its `λ²` slope exceeds this.
pub const PROBE_SLOPE_TOL: f64 = 1e-9;

/// Plane-wave probe settings. Unless both `tau` and `xi` are given, every coordinate
/// direction is probed with a plateau covering the whole domain, on a copy of the
/// model refined along that direction until `λ_max·h ≤ MAX_PHASE_STEP`.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub lambdas: Vec<f64>,
    pub tau: Option<TestFunction>,
    pub xi: Option<Vec<f64>>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { lambdas: DEFAULT_LAMBDAS.to_vec(), tau: None, xi: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub direction: Vec<f64>,
    /// Cells per original cell along the direction.
    pub refinement: usize,
    pub report: ProbeReport,
}

impl ProbeOutcome {
    pub fn is_growing(&self) -> bool {
        !self.report.skipped && self.report.gradient_slope > PROBE_SLOPE_TOL
    }
}

fn pull<T: Clone>(v: &[T], parent: &[usize]) -> Vec<T> {
    parent.iter().map(|&p| v[p].clone()).collect()
}

fn probe_on(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    q: &[CMatrix],
    tau: &TestFunction,
    xi: &[f64],
    lambdas: &[f64],
) -> Result<ProbeReport> {
    let ambient = build_ambient(coeffs, derived, 0.0)?;
    let v1 = V1Basis::new(&ambient, q)?;
    let ops = V1Operators::new(&ambient, &v1, FormKind::Full);
    t_pi2_probe(&ambient, &v1, &ops, tau, xi, lambdas)
}

/// Runs the `λ`-probe of `Tπ₂` as configured.
pub fn run_probe(
    coeffs: &CoefficientSet,
    derived: &DerivedFields,
    q: &[CMatrix],
    cfg: &ProbeConfig,
) -> Result<Vec<ProbeOutcome>> {
    if let (Some(tau), Some(xi)) = (&cfg.tau, &cfg.xi) {
        let report = probe_on(coeffs, derived, q, tau, xi, &cfg.lambdas)?;
        return Ok(vec![ProbeOutcome { direction: xi.clone(), refinement: 1, report }]);
    }
    let grid = coeffs.grid();
    let dim = grid.dim();
    let lambda_max = cfg.lambdas.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let ramp = (0..dim)
        .map(|k| grid.spacing(k).min(0.25 * (grid.bounds()[k][1] - grid.bounds()[k][0])))
        .fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(dim);
    for axis in 0..dim {
        let factor = ((lambda_max * grid.spacing(axis) / MAX_PHASE_STEP).ceil() as usize).max(1);
        let (fine, parent) = grid.refine_axis(axis, factor)?;
        let f = coeffs.fields();
        let fields = FormCoefficients::new(
            fine.clone(),
            pull(&f.c, &parent),
            pull(&f.b, &parent),
            pull(&f.d, &parent),
            pull(&f.c0, &parent),
        )?;
        let fine_coeffs = CoefficientSet::new(fields, coeffs.theta(), coeffs.k_bound())?;
        let fine_derived = DerivedFields {
            grid: fine.clone(),
            a: pull(&derived.a, &parent),
            a_sqrt: pull(&derived.a_sqrt, &parent),
            g: pull(&derived.g, &parent),
            z: pull(&derived.z, &parent),
            x: pull(&derived.x, &parent),
            y: pull(&derived.y, &parent),
        };
        let core: Vec<[f64; 2]> = fine.bounds().iter().map(|&[lo, hi]| [lo + ramp, hi - ramp]).collect();
        let tau = TestFunction::plateau(&fine, &core, ramp)?;
        let xi: Vec<f64> = (0..dim).map(|k| if k == axis { 1.0 } else { 0.0 }).collect();
        let report = probe_on(&fine_coeffs, &fine_derived, &pull(q, &parent), &tau, &xi, &cfg.lambdas)?;
        out.push(ProbeOutcome { direction: xi, refinement: factor, report });
    }
    Ok(out)
}
