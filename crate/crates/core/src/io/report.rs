use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{check_equivalences, check_realpart_with_oracle, DiagnosticsReport, ProbeConfig, RealPartReport};
use crate::error::{Error, Result};
use crate::model::{derive_fields, estimate_vertex_angle, eval_form, DerivedResiduals, FormCoefficients, VertexEstimate};
use crate::oracle::{FormKind, Oracle};
use crate::regular::{assemble_regular, build_singular_structure, identity_suite, IDENTITY_NAMES};

use super::model_file::{cx, CoefficientArrays, Cx, GridEntry, LoadedModel, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub names: Vec<String>,
    pub max: [f64; 6],
    pub argmax: [usize; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub u: String,
    pub v: String,
    pub formula: Cx,
    pub oracle: Cx,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VertexSummary {
    pub form: Option<VertexEstimate>,
    pub singular: Option<VertexEstimate>,
    pub principal_singular: Option<VertexEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub grid: GridEntry,
    pub regular: CoefficientArrays,
    pub singular: CoefficientArrays,
    pub derived_residuals: DerivedResiduals,
    pub identities: IdentitySummary,
    pub diagnostics: DiagnosticsReport,
    pub realpart: RealPartReport,
    pub oracle_table: Vec<OracleRow>,
    pub vertex: VertexSummary,
    pub warnings: Vec<String>,
}

impl ReportFile {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Largest relative error in the oracle table.
    pub fn oracle_max_rel_err(&self) -> f64 {
        self.oracle_table.iter().map(|r| r.rel_err).fold(0.0, f64::max)
    }
}

fn check_finite(f: &FormCoefficients, what: &str) -> Result<()> {
    for cell in 0..f.n_cells() {
        let c0 = f.c0[cell];
        if !(f.c[cell].is_finite() && f.b[cell].is_finite() && f.d[cell].is_finite() && c0.re.is_finite() && c0.im.is_finite()) {
            return Err(Error::InvalidModel(format!("cell {cell}: non-finite {what} coefficient")));
        }
    }
    Ok(())
}

/// Regular and singular parts, identity residuals, diagnostics and the oracle comparison.
pub fn compute_report(model: &LoadedModel, probe: &ProbeConfig) -> Result<ReportFile> {
    let mut warnings = Vec::new();
    let coeffs = &model.coeffs;
    let derived = derive_fields(coeffs, Default::default())?;
    let s = build_singular_structure(model.q.clone(), &derived)?;
    let reg = assemble_regular(coeffs, &derived, &s)?;
    check_finite(&reg.reg, "regular")?;
    check_finite(&reg.sing, "singular")?;
    let ids = identity_suite(&s, &derived);
    let diagnostics = check_equivalences(coeffs, &derived, &s, &model.funcs, probe)?;
    warnings.extend(diagnostics.notes.iter().cloned());

    let mut oracle_table = Vec::new();
    let mut realpart = diagnostics.realpart.clone();
    let mut vertex = VertexSummary {
        singular: diagnostics.as_vertex.clone(),
        principal_singular: diagnostics.principal_singular_vertex.clone(),
        ..Default::default()
    };
    if model.funcs.is_empty() {
        warnings.push("empty function list: oracle table and vertex estimates skipped".into());
    } else {
        match Oracle::new(coeffs, &derived, &model.q, &model.funcs, 0.0, FormKind::Full).and_then(|o| o.matrix()) {
            Ok(m) => {
                for (i, u) in model.funcs.iter().enumerate() {
                    for (k, v) in model.funcs.iter().enumerate() {
                        let formula = eval_form(&reg.reg, u, v)?.value;
                        let oracle = m[(k, i)];
                        let abs_err = (formula - oracle).norm();
                        if !abs_err.is_finite() {
                            return Err(Error::InvalidModel(format!("non-finite oracle entry for pair ({i}, {k})")));
                        }
                        oracle_table.push(OracleRow {
                            u: model.names[i].clone(),
                            v: model.names[k].clone(),
                            formula: cx(formula),
                            oracle: cx(oracle),
                            abs_err,
                            rel_err: abs_err / (1.0 + formula.norm()),
                        });
                    }
                }
            }
            Err(e) => warnings.push(format!("oracle skipped: {e}")),
        }
        match check_realpart_with_oracle(coeffs, &derived, &s, &reg, &model.funcs) {
            Ok(r) => realpart = r,
            Err(e) => warnings.push(format!("real-part oracle skipped: {e}")),
        }
        match estimate_vertex_angle(coeffs, &model.funcs) {
            Ok(v) => vertex.form = Some(v),
            Err(e) => warnings.push(format!("vertex search skipped: {e}")),
        }
    }

    Ok(ReportFile {
        schema_version: SCHEMA_VERSION,
        grid: GridEntry::from_grid(coeffs.grid()),
        regular: CoefficientArrays::from_fields(&reg.reg),
        singular: CoefficientArrays::from_fields(&reg.sing),
        derived_residuals: derived.residuals(coeffs),
        identities: IdentitySummary {
            names: IDENTITY_NAMES.iter().map(|s| s.to_string()).collect(),
            max: ids.max,
            argmax: ids.argmax,
        },
        diagnostics,
        realpart,
        oracle_table,
        vertex,
        warnings,
    })
}
