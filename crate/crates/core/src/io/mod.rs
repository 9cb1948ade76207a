//! JSON model and report files.
//!
//! Complex numbers are written as `[re, im]` pairs. A model file is canonical
//! when it equals the output of [`ModelFile::to_json`]; canonical files survive
//! a parse/write round trip byte for byte.

mod model_file;
mod report;

pub use model_file::{
    cx, from_cx, matrix_entry, vector_entry, CoefficientArrays, Cx, FunctionSpec, GridEntry, IndicatorScale,
    LoadedModel, ModelFile, ProjectionEntry, SCHEMA_VERSION,
};
pub use report::{compute_report, IdentitySummary, OracleRow, ReportFile, VertexSummary};

use crate::diagnostics::{cantor_grid, generate_cantor_example, BUMP_COUNT, CANTOR_DOMAIN};
use crate::error::Result;

/// Model file for the fat-Cantor example, with `Q` given as indicator intervals
/// and the test functions as generator specs.
pub fn cantor_model_file(stage: u32, refine: usize) -> Result<ModelFile> {
    let grid = cantor_grid(stage, refine)?;
    let ex = generate_cantor_example(stage, &grid)?;
    let [lo, hi] = CANTOR_DOMAIN;
    let width = (hi - lo) / BUMP_COUNT as f64;
    let mut functions = vec![FunctionSpec::Plateau { name: Some("plateau".into()), core: vec![[0.0, 1.0]], ramp: 1.0 }];
    functions.extend((0..BUMP_COUNT).map(|k| FunctionSpec::Bump {
        name: Some(format!("bump{k}")),
        center: vec![lo + (k as f64 + 0.5) * width],
        radius: 0.5 * width,
    }));
    let q = ProjectionEntry::Indicator {
        set: ex.intervals.iter().map(|&iv| vec![iv]).collect(),
        scale: IndicatorScale::Identity,
    };
    Ok(ModelFile::new(&ex.coeffs, q, functions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::ProbeConfig;

    #[test]
    fn cantor_file_reproduces_generator() {
        let file = cantor_model_file(2, 1).unwrap();
        let loaded = ModelFile::from_json(&file.to_json().unwrap()).unwrap().load().unwrap();
        let ex = generate_cantor_example(2, &cantor_grid(2, 1).unwrap()).unwrap();
        assert_eq!(loaded.q, ex.q);
        assert_eq!(loaded.funcs.len(), ex.funcs.len());
        for (a, b) in loaded.funcs.iter().zip(&ex.funcs) {
            assert_eq!(a.node_values(), b.node_values());
        }
    }

    #[test]
    fn report_on_cantor_stage_two() {
        let loaded = cantor_model_file(2, 1).unwrap().load().unwrap();
        let r = compute_report(&loaded, &ProbeConfig::default()).unwrap();
        assert!(r.oracle_max_rel_err() < 1e-8);
        assert!(r.diagnostics.inconsistencies().is_empty());
        let text = r.to_json().unwrap();
        let back: ReportFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.oracle_table.len(), 49);
    }

    #[test]
    fn empty_function_list_warns() {
        let mut file = cantor_model_file(1, 1).unwrap();
        file.functions.clear();
        let r = compute_report(&file.load().unwrap(), &ProbeConfig::default()).unwrap();
        assert!(r.oracle_table.is_empty());
        assert!(r.warnings.iter().any(|w| w.contains("empty function list")));
    }
}
