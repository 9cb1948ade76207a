//! Regular and singular parts of sectorial sesquilinear forms that represent
//! second-order differential expressions with lower-order terms.
//!
//! The crate works on a cell grid over a box in ℝ^d. Coefficients `C, b, d, c₀`
//! are piecewise constant per cell; test functions are node samples with
//! cell gradients. From these it computes
//!
//! * the derived fields `A`, `A^{1/2}`, `g(A)`, `Z`, `X`, `Y` ([`model`]),
//! * the coefficient fields of the regular part `a_reg` and the singular part
//!   `a_s` from an explicit kernel formula ([`regular`]),
//! * an independent finite-dimensional realization of the abstract projection
//!   construction that evaluates `a_reg` without that formula ([`oracle`]),
//! * diagnostics for sectoriality of the singular part ([`diagnostics`]).
//!
//! Model and report files live in [`io`]; [`cli`] backs the `regpart` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod pointwise;
pub mod random;
pub mod regular;

pub use error::{Error, Result};
