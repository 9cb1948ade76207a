//! Cell grids, coefficient fields, discrete test functions and form evaluation.

mod coefficients;
mod derived;
mod form;
mod grid;
mod test_function;
mod vertex;

pub use coefficients::{CoefficientSet, FormCoefficients};
pub use derived::{derive_fields, DerivedFields, DerivedResiduals, RECONSTRUCTION_TOL};
pub use form::{combine, eval_form, eval_form_factored, form_gram, l2_gram, FormParts, FormValue};
pub use grid::{GridSpec, MAX_CELLS, MAX_DIM};
pub use test_function::TestFunction;
pub use vertex::{
    estimate_vertex_angle, estimate_vertex_angle_fields, vertex_from_grams, VertexEstimate, ANGLE_TOL,
    GRAM_RATIO_TOL, TAN_CAP,
};
