//! Vertex and semi-angle of a form restricted to the span of a finite basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointwise::{herm_eig, CMatrix, CVector, SectorParams};

use super::coefficients::{CoefficientSet, FormCoefficients};
use super::form::{form_gram, l2_gram};
use super::test_function::TestFunction;

/// Largest `tanθ` the bisection will consider.
pub const TAN_CAP: f64 = 1e3;
/// Bisection stops once the bracket in `θ` is below this width.
pub const ANGLE_TOL: f64 = 1e-9;
/// Eigenvalue ratio of the `H`-Gram below which the basis counts as dependent.
pub const GRAM_RATIO_TOL: f64 = 1e-12;
const PSD_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexEstimate {
    pub params: SectorParams,
    /// Smallest generalized eigenvalue of `(Re B, M)`.
    pub spectral_bound: f64,
    /// Basis coefficients of a minimizer of the Rayleigh quotient of `Re a`.
    pub witness: CVector,
    /// Basis element with the smallest `Re a(u,u) / ‖u‖²`.
    pub witness_basis_index: usize,
    /// True if the vertex had to be moved below `spectral_bound` to admit a finite angle.
    pub shifted: bool,
}

/// Vertex/angle search for a validated coefficient set.
pub fn estimate_vertex_angle(coeffs: &CoefficientSet, basis: &[TestFunction]) -> Result<VertexEstimate> {
    estimate_vertex_angle_fields(coeffs.fields(), basis)
}

/// Same search for arbitrary coefficient fields, e.g. a singular part.
pub fn estimate_vertex_angle_fields(fields: &FormCoefficients, basis: &[TestFunction]) -> Result<VertexEstimate> {
    if basis.is_empty() {
        return Err(Error::DegenerateBasis("empty basis".into()));
    }
    let form = form_gram(fields, basis)?;
    vertex_from_grams(&form, &l2_gram(basis))
}

/// Works from the form matrix `F[j][i] = a(u_i, u_j)` and the `H`-Gram `M`.
pub fn vertex_from_grams(form: &CMatrix, gram: &CMatrix) -> Result<VertexEstimate> {
    let n = gram.rows();
    if n == 0 || form.rows() != n || form.cols() != n {
        return Err(Error::DegenerateBasis("Gram matrices are empty or of different sizes".into()));
    }
    let m_eig = herm_eig(&gram.hermitian_part())?;
    if !(m_eig.min() > GRAM_RATIO_TOL * m_eig.max()) {
        return Err(Error::DegenerateBasis(format!(
            "H-Gram eigenvalue ratio {:.3e} below {GRAM_RATIO_TOL:e}",
            m_eig.min() / m_eig.max()
        )));
    }
    let s = m_eig.apply_fn(|l| 1.0 / l.sqrt());
    let re = (&(&s * &form.hermitian_part()) * &s).hermitian_part();
    let im = (&(&s * &form.imaginary_part()) * &s).hermitian_part();
    let re_eig = herm_eig(&re)?;
    let gamma0 = re_eig.min();
    let witness = s.mul_vec(&re_eig.vectors.column(0));

    let witness_basis_index = (0..n)
        .map(|i| form[(i, i)].re / gram[(i, i)].re)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let scale = (re.frobenius_norm() + im.frobenius_norm()).max(1e-300);
    let feasible = |t: f64, gamma: f64| -> Result<bool> {
        let base = &re - &CMatrix::identity(n).scale_real(gamma);
        let tol = PSD_SLACK * scale * t.max(1.0);
        for sign in [1.0, -1.0] {
            let pencil = &base.scale_real(t) + &im.scale_real(sign);
            if herm_eig(&pencil.hermitian_part())?.min() < -tol {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut gamma = gamma0;
    let mut shifted = false;
    if im.frobenius_norm() <= 1e-14 * scale {
        return Ok(VertexEstimate {
            params: SectorParams::new(0.0, gamma)?,
            spectral_bound: gamma0,
            witness,
            witness_basis_index,
            shifted,
        });
    }
    if !feasible(TAN_CAP, gamma)? {
        let mut delta = 1e-6 * scale;
        loop {
            gamma = gamma0 - delta;
            if feasible(TAN_CAP, gamma)? {
                break;
            }
            delta *= 2.0;
            if !delta.is_finite() || delta > 1e12 * scale {
                return Err(Error::DegenerateBasis("no finite sector angle for any vertex shift".into()));
            }
        }
        shifted = true;
    }
    let (mut lo, mut hi) = (0.0f64, TAN_CAP.atan());
    if feasible(0.0, gamma)? {
        hi = 0.0;
    }
    while hi - lo > ANGLE_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid.tan(), gamma)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(VertexEstimate {
        params: SectorParams::new(hi, gamma)?,
        spectral_bound: gamma0,
        witness,
        witness_basis_index,
        shifted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;
    use crate::pointwise::c;

    fn basis(g: &GridSpec) -> Vec<TestFunction> {
        (0..3)
            .map(|k| TestFunction::bump(g, &[0.25 + 0.25 * k as f64], 0.2).unwrap())
            .collect()
    }

    #[test]
    fn laplacian_has_zero_angle() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 40).unwrap();
        let mut f = FormCoefficients::zeros(&g);
        f.c = vec![CMatrix::identity(1); 40];
        let cs = CoefficientSet::new(f, 0.0, 1.0).unwrap();
        let est = estimate_vertex_angle(&cs, &basis(&g)).unwrap();
        assert!(est.params.gamma() >= 0.0);
        assert_eq!(est.params.theta(), 0.0);
        assert!(!est.shifted);
    }

    #[test]
    fn scalar_multiple_of_identity_form() {
        // a = (1 + i)·⟨u, v⟩_H has vertex 1 after removing the real part, so
        // with γ = 1 the range is purely imaginary; the search must shift.
        let g = GridSpec::uniform_1d(0.0, 1.0, 40).unwrap();
        let mut f = FormCoefficients::zeros(&g);
        f.c0 = vec![c(1.0, 1.0); 40];
        let est = estimate_vertex_angle_fields(&f, &basis(&g)).unwrap();
        assert!(est.shifted);
        assert!((est.spectral_bound - 1.0).abs() < 1e-12);
        assert!(est.params.gamma() < 1.0);
        let t = est.params.tan_theta();
        let delta = 1.0 - est.params.gamma();
        assert!((t * delta - 1.0).abs() < 1e-6 * t.max(1.0));
    }

    #[test]
    fn dependent_basis_rejected() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 20).unwrap();
        let u = TestFunction::bump(&g, &[0.5], 0.3).unwrap();
        let f = FormCoefficients::zeros(&g);
        let b = vec![u.clone(), u.scaled(c(2.0, 0.0))];
        assert!(matches!(estimate_vertex_angle_fields(&f, &b), Err(Error::DegenerateBasis(_))));
    }
}
