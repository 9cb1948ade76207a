//! Regular and singular parts of the form: the projection structure `Q, P, W`,
//! the matrix identities behind the formula, and the coefficient assembly.

mod assemble;
mod identities;
mod structure;

pub use assemble::{
    assemble_regular, assemble_regular_commuting, assemble_regular_commuting_unchecked, observe_residual,
    pure_second_order_parts, regular_sector_tan, remark_residual, RegularizedCoefficients, COMMUTATOR_TOL,
};
pub use identities::{identity_residuals, identity_suite, IdentityReport, IDENTITY_NAMES};
pub use structure::{
    build_singular_structure, cell_structure, indicator_projection, orthonormalize, projection_from_span,
    range_basis, zero_projection_field, CellStructure, SingularStructure, W_TOL,
};
