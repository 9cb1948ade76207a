use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, FormCoefficients, GridSpec, TestFunction};
use crate::pointwise::{CMatrix, CVector, C64};
use crate::regular::indicator_projection;

pub const SCHEMA_VERSION: u32 = 1;

/// Complex number as `[re, im]`.
pub type Cx = [f64; 2];

pub fn cx(z: C64) -> Cx {
    [z.re, z.im]
}

pub fn from_cx(z: Cx) -> C64 {
    C64::new(z[0], z[1])
}

pub fn matrix_entry(m: &CMatrix) -> Vec<Vec<Cx>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| cx(m[(r, c)])).collect()).collect()
}

pub fn vector_entry(v: &CVector) -> Vec<Cx> {
    v.iter().map(|&z| cx(z)).collect()
}

fn matrix_from(rows: &[Vec<Cx>], d: usize, what: &str, cell: usize) -> Result<CMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidModel(format!("cell {cell}: {what} is not {d}x{d}")));
    }
    Ok(CMatrix::from_fn(d, d, |r, c| from_cx(rows[r][c])))
}

fn vector_from(v: &[Cx]) -> CVector {
    CVector(v.iter().map(|&z| from_cx(z)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub cells: Vec<usize>,
}

impl GridEntry {
    pub fn from_grid(g: &GridSpec) -> Self {
        Self { bounds: g.bounds().to_vec(), cells: g.cells_per_axis().to_vec() }
    }

    pub fn to_grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.bounds.clone(), self.cells.clone())
    }
}

/// Per-cell coefficient arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientArrays {
    pub c: Vec<Vec<Vec<Cx>>>,
    pub b: Vec<Vec<Cx>>,
    pub d: Vec<Vec<Cx>>,
    pub c0: Vec<Cx>,
}

impl CoefficientArrays {
    pub fn from_fields(f: &FormCoefficients) -> Self {
        Self {
            c: f.c.iter().map(matrix_entry).collect(),
            b: f.b.iter().map(vector_entry).collect(),
            d: f.d.iter().map(vector_entry).collect(),
            c0: f.c0.iter().map(|&z| cx(z)).collect(),
        }
    }

    pub fn to_fields(&self, grid: &GridSpec) -> Result<FormCoefficients> {
        let d = grid.dim();
        let c = self.c.iter().enumerate().map(|(k, m)| matrix_from(m, d, "C", k)).collect::<Result<Vec<_>>>()?;
        FormCoefficients::new(
            grid.clone(),
            c,
            self.b.iter().map(|v| vector_from(v)).collect(),
            self.d.iter().map(|v| vector_from(v)).collect(),
            self.c0.iter().map(|&z| from_cx(z)).collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorScale {
    Identity,
}

/// The projection field, dense or as `1_S · I` for a union of boxes `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProjectionEntry {
    Indicator { set: Vec<Vec<[f64; 2]>>, scale: IndicatorScale },
    Dense(Vec<Vec<Vec<Cx>>>),
}

impl ProjectionEntry {
    pub fn dense(q: &[CMatrix]) -> Self {
        ProjectionEntry::Dense(q.iter().map(matrix_entry).collect())
    }

    pub fn expand(&self, grid: &GridSpec) -> Result<Vec<CMatrix>> {
        match self {
            ProjectionEntry::Indicator { set, .. } => indicator_projection(grid, set),
            ProjectionEntry::Dense(cells) => {
                if cells.len() != grid.n_cells() {
                    return Err(Error::GridMismatch(format!(
                        "Q has {} cells, grid has {}",
                        cells.len(),
                        grid.n_cells()
                    )));
                }
                cells.iter().enumerate().map(|(k, m)| matrix_from(m, grid.dim(), "Q", k)).collect()
            }
        }
    }
}

/// A test function, sampled at the grid nodes or generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Samples {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        values: Vec<Cx>,
    },
    Plateau {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        core: Vec<[f64; 2]>,
        ramp: f64,
    },
    Bump {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        center: Vec<f64>,
        radius: f64,
    },
    PlaneWave {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        lambda: f64,
        xi: Vec<f64>,
        tau: Box<FunctionSpec>,
    },
}

impl FunctionSpec {
    pub fn samples(name: Option<String>, u: &TestFunction) -> Self {
        FunctionSpec::Samples { name, values: u.node_values().iter().map(|&z| cx(z)).collect() }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            FunctionSpec::Samples { name, .. }
            | FunctionSpec::Plateau { name, .. }
            | FunctionSpec::Bump { name, .. }
            | FunctionSpec::PlaneWave { name, .. } => name.as_deref(),
        }
    }

    pub fn build(&self, grid: &GridSpec) -> Result<TestFunction> {
        match self {
            FunctionSpec::Samples { values, .. } => {
                TestFunction::from_nodes(grid, values.iter().map(|&z| from_cx(z)).collect())
            }
            FunctionSpec::Plateau { core, ramp, .. } => TestFunction::plateau(grid, core, *ramp),
            FunctionSpec::Bump { center, radius, .. } => TestFunction::bump(grid, center, *radius),
            FunctionSpec::PlaneWave { lambda, xi, tau, .. } => TestFunction::plane_wave(&tau.build(grid)?, *lambda, xi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub grid: GridEntry,
    pub theta: f64,
    #[serde(rename = "K_bound")]
    pub k_bound: f64,
    pub coefficients: CoefficientArrays,
    #[serde(rename = "Q")]
    pub q: ProjectionEntry,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
}

/// A validated model with its projection field and test functions built.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub coeffs: CoefficientSet,
    pub q: Vec<CMatrix>,
    pub funcs: Vec<TestFunction>,
    pub names: Vec<String>,
}

impl ModelFile {
    pub fn new(coeffs: &CoefficientSet, q: ProjectionEntry, functions: Vec<FunctionSpec>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            grid: GridEntry::from_grid(coeffs.grid()),
            theta: coeffs.theta(),
            k_bound: coeffs.k_bound(),
            coefficients: CoefficientArrays::from_fields(coeffs.fields()),
            q,
            functions,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }

    /// Canonical text: pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Validates the coefficients and builds `Q` and the test functions.
    pub fn load(&self) -> Result<LoadedModel> {
        let grid = self.grid.to_grid()?;
        let fields = self.coefficients.to_fields(&grid)?;
        let coeffs = CoefficientSet::new(fields, self.theta, self.k_bound)?;
        let q = self.q.expand(&grid)?;
        let funcs = self.functions.iter().map(|f| f.build(&grid)).collect::<Result<Vec<_>>>()?;
        let names = self
            .functions
            .iter()
            .enumerate()
            .map(|(k, f)| f.name().map_or_else(|| format!("u{k}"), str::to_owned))
            .collect();
        Ok(LoadedModel { coeffs, q, funcs, names })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{cantor_grid, generate_cantor_example};

    fn small() -> ModelFile {
        let g = GridSpec::uniform_1d(0.0, 1.0, 2).unwrap();
        let mut f = FormCoefficients::zeros(&g);
        f.c = vec![CMatrix::identity(1); 2];
        let cs = CoefficientSet::new(f, 0.5, 1.0).unwrap();
        ModelFile::new(
            &cs,
            ProjectionEntry::Indicator { set: vec![vec![[0.0, 0.5]]], scale: IndicatorScale::Identity },
            vec![FunctionSpec::Bump { name: Some("b".into()), center: vec![0.5], radius: 0.4 }],
        )
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = small().to_json().unwrap();
        let again = ModelFile::from_json(&text).unwrap().to_json().unwrap();
        assert_eq!(text, again);
        let loaded = ModelFile::from_json(&text).unwrap().load().unwrap();
        assert_eq!(loaded.q[0], CMatrix::identity(1));
        assert_eq!(loaded.q[1], CMatrix::zeros(1, 1));
        assert_eq!(loaded.names, vec!["b".to_string()]);
    }

    #[test]
    fn dense_projection_is_read_back() {
        let g = cantor_grid(1, 1).unwrap();
        let ex = generate_cantor_example(1, &g).unwrap();
        let m = ModelFile::new(&ex.coeffs, ProjectionEntry::dense(&ex.q), vec![]);
        let back = ModelFile::from_json(&m.to_json().unwrap()).unwrap().load().unwrap();
        assert_eq!(back.q, ex.q);
        assert_eq!(back.coeffs.fields(), ex.coeffs.fields());
    }

    #[test]
    fn shape_errors_are_validation_and_syntax_errors_are_parse() {
        let mut m = small();
        m.coefficients.c0.pop();
        assert!(m.load().unwrap_err().is_validation());
        assert!(matches!(ModelFile::from_json("{"), Err(Error::Parse(_))));
        let mut v: serde_json::Value = serde_json::from_str(&small().to_json().unwrap()).unwrap();
        v["schema_version"] = 7.into();
        assert!(matches!(ModelFile::from_json(&v.to_string()), Err(Error::Parse(_))));
    }
}
