use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, DerivedFields, GridSpec, TestFunction};
use crate::pointwise::{herm_eig, pairwise_sum, CMatrix, CVector, C64, I};

/// Smallest eigenvalue required of every per-cell block of `⟨·,·⟩_a`.
pub const MIN_CELL_EIGENVALUE: f64 = 1e-6;

/// Which form the oracle extends: the form itself, or its real part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    Full,
    RealPart,
}

/// Element of `H′ = H × H^d`: one scalar and one `d`-vector per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct HPrimeVec {
    pub u: Vec<C64>,
    pub w: Vec<CVector>,
}

impl HPrimeVec {
    pub fn zeros(n_cells: usize, d: usize) -> Self {
        Self { u: vec![C64::new(0.0, 0.0); n_cells], w: vec![CVector::zeros(d); n_cells] }
    }

    /// Unweighted `Σ_c |u_c|² + |w_c|²`.
    pub fn sum_sqr(&self) -> f64 {
        self.u.iter().map(|z| z.norm_sqr()).sum::<f64>() + self.w.iter().map(|w| w.norm_sqr()).sum::<f64>()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            u: self.u.iter().zip(&other.u).map(|(a, b)| a - b).collect(),
            w: self.w.iter().zip(&other.w).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Pointwise data of `H′` with the inner product
/// `⟨(u₁,w₁),(u₂,w₂)⟩_a = h̃((u₁,w₁),(u₂,w₂)) + (1 − γ)⟨u₁,u₂⟩`.
#[derive(Clone, Debug)]
pub struct AmbientSpace {
    pub grid: GridSpec,
    pub gamma: f64,
    pub a_sqrt: Vec<CMatrix>,
    pub z: Vec<CMatrix>,
    pub x: Vec<CVector>,
    pub y: Vec<CVector>,
    pub c0: Vec<C64>,
    /// `1 − γ + Re c₀` per cell.
    pub weight: Vec<f64>,
    /// Smallest eigenvalue over all per-cell Gram blocks.
    pub min_cell_eigenvalue: f64,
}

fn cell_gram(weight: f64, xy: &CVector) -> CMatrix {
    let d = xy.len();
    CMatrix::from_fn(d + 1, d + 1, |r, c| match (r, c) {
        (0, 0) => C64::new(weight, 0.0),
        (0, k) => 0.5 * xy[k - 1].conj(),
        (k, 0) => 0.5 * xy[k - 1],
        (r, c) if r == c => C64::new(1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    })
}

/// `γ = min(γ₀, min_c(1 + Re c₀ − ¼|X+Y|²) − ½)`, lowered further until every
/// per-cell block has smallest eigenvalue at least [`MIN_CELL_EIGENVALUE`].
pub fn build_ambient(coeffs: &CoefficientSet, derived: &DerivedFields, gamma0: f64) -> Result<AmbientSpace> {
    let f = coeffs.fields();
    if &derived.grid != coeffs.grid() {
        return Err(Error::GridMismatch("derived fields belong to a different grid".into()));
    }
    let n = derived.n_cells();
    let xy: Vec<CVector> = (0..n).map(|c| &derived.x[c] + &derived.y[c]).collect();
    let margin = (0..n)
        .map(|c| 1.0 + f.c0[c].re - 0.25 * xy[c].norm_sqr())
        .fold(f64::INFINITY, f64::min);
    let mut gamma = gamma0.min(margin - 0.5);
    let mut step = 0.5;
    let min_eig = loop {
        let mut m = f64::INFINITY;
        for c in 0..n {
            m = m.min(herm_eig(&cell_gram(1.0 - gamma + f.c0[c].re, &xy[c]))?.min());
        }
        if m >= MIN_CELL_EIGENVALUE || n == 0 {
            break m;
        }
        gamma -= step;
        step *= 2.0;
        if !gamma.is_finite() {
            return Err(Error::SingularGram("no admissible shift for the ambient inner product".into()));
        }
    };
    Ok(AmbientSpace {
        grid: derived.grid.clone(),
        gamma,
        a_sqrt: derived.a_sqrt.clone(),
        z: derived.z.clone(),
        x: derived.x.clone(),
        y: derived.y.clone(),
        c0: f.c0.clone(),
        weight: (0..n).map(|c| 1.0 - gamma + f.c0[c].re).collect(),
        min_cell_eigenvalue: min_eig,
    })
}

impl AmbientSpace {
    pub fn n_cells(&self) -> usize {
        self.a_sqrt.len()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn h(&self) -> f64 {
        self.grid.cell_volume()
    }

    /// `Φ(u) = (u, A^{1/2}∇u)`.
    pub fn phi(&self, u: &TestFunction) -> Result<HPrimeVec> {
        u.ensure_same_grid(&self.grid)?;
        Ok(HPrimeVec {
            u: u.cell_values().to_vec(),
            w: (0..self.n_cells()).map(|c| self.a_sqrt[c].mul_vec(&u.gradient()[c])).collect(),
        })
    }

    /// `(0, A^{1/2}∇u)`.
    pub fn gradient_part(&self, u: &TestFunction) -> Result<HPrimeVec> {
        let mut v = self.phi(u)?;
        v.u.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        Ok(v)
    }

    fn xy(&self, c: usize) -> CVector {
        &self.x[c] + &self.y[c]
    }

    /// Cell density of `⟨·,·⟩_a` (without the cell volume).
    pub fn ip_local(&self, c: usize, u1: C64, w1: &CVector, u2: C64, w2: &CVector) -> C64 {
        let xy = self.xy(c);
        w1.dot(w2) + 0.5 * w1.dot(&xy.scale(u2)) + 0.5 * xy.scale(u1).dot(w2) + self.weight[c] * u1 * u2.conj()
    }

    /// Cell density of `h̃`.
    pub fn ht_local(&self, c: usize, u1: C64, w1: &CVector, u2: C64, w2: &CVector) -> C64 {
        let xy = self.xy(c);
        w1.dot(w2) + 0.5 * w1.dot(&xy.scale(u2)) + 0.5 * xy.scale(u1).dot(w2) + self.c0[c].re * u1 * u2.conj()
    }

    /// Cell density of `ã`.
    pub fn at_local(&self, c: usize, u1: C64, w1: &CVector, u2: C64, w2: &CVector) -> C64 {
        let izw = &w1.clone() + &self.z[c].mul_vec(w1).scale(I);
        izw.dot(w2) + w1.dot(&self.x[c].scale(u2)) + self.y[c].scale(u1).dot(w2) + self.c0[c] * u1 * u2.conj()
    }

    /// Density of the extended form selected by `kind`.
    pub fn form_local(&self, kind: FormKind, c: usize, u1: C64, w1: &CVector, u2: C64, w2: &CVector) -> C64 {
        match kind {
            FormKind::Full => self.at_local(c, u1, w1, u2, w2),
            FormKind::RealPart => self.ht_local(c, u1, w1, u2, w2),
        }
    }

    /// `(f(x,y) − conj f(y,x)) / 2i` for the selected form.
    pub fn form_imag_local(&self, kind: FormKind, c: usize, u1: C64, w1: &CVector, u2: C64, w2: &CVector) -> C64 {
        let xy = self.form_local(kind, c, u1, w1, u2, w2);
        let yx = self.form_local(kind, c, u2, w2, u1, w1);
        (xy - yx.conj()) / (2.0 * I)
    }

    fn integrate(&self, x: &HPrimeVec, y: &HPrimeVec, f: impl Fn(usize, C64, &CVector, C64, &CVector) -> C64) -> C64 {
        let terms: Vec<C64> = (0..self.n_cells()).map(|c| f(c, x.u[c], &x.w[c], y.u[c], &y.w[c])).collect();
        pairwise_sum(&terms) * self.h()
    }

    pub fn ip(&self, x: &HPrimeVec, y: &HPrimeVec) -> C64 {
        self.integrate(x, y, |c, a, b, d, e| self.ip_local(c, a, b, d, e))
    }

    pub fn ht(&self, x: &HPrimeVec, y: &HPrimeVec) -> C64 {
        self.integrate(x, y, |c, a, b, d, e| self.ht_local(c, a, b, d, e))
    }

    pub fn form(&self, kind: FormKind, x: &HPrimeVec, y: &HPrimeVec) -> C64 {
        self.integrate(x, y, |c, a, b, d, e| self.form_local(kind, c, a, b, d, e))
    }

    /// Unweighted `L²(H′)` norm with the cell volume: `(h Σ |u|² + |w|²)^{1/2}`.
    pub fn plain_norm(&self, x: &HPrimeVec) -> f64 {
        (self.h() * x.sum_sqr()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_fields, FormCoefficients};
    use crate::pointwise::c;

    #[test]
    fn trivial_lower_order_keeps_gamma0() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 4).unwrap();
        let mut f = FormCoefficients::zeros(&g);
        f.c = vec![CMatrix::identity(1); 4];
        let cs = CoefficientSet::new(f, 0.0, 1.0).unwrap();
        let d = derive_fields(&cs, Default::default()).unwrap();
        let amb = build_ambient(&cs, &d, 0.0).unwrap();
        assert_eq!(amb.gamma, 0.0);
        assert!((amb.min_cell_eigenvalue - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ambient_form_matches_factored_form_on_phi() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 5).unwrap();
        let f = FormCoefficients::new(
            g.clone(),
            vec![CMatrix::identity(1).scale(c(1.0, 0.5)); 5],
            vec![CVector(vec![c(0.2, -0.1)]); 5],
            vec![CVector(vec![c(0.3, 0.4)]); 5],
            vec![c(0.1, 0.2); 5],
        )
        .unwrap();
        let cs = CoefficientSet::new(f, 0.6, 1.0).unwrap();
        let d = derive_fields(&cs, Default::default()).unwrap();
        let amb = build_ambient(&cs, &d, 0.0).unwrap();
        let u = TestFunction::bump(&g, &[0.5], 0.4).unwrap();
        let v = TestFunction::from_fn(&g, |x| c(x[0] * (1.0 - x[0]), x[0])).unwrap();
        let lhs = amb.form(FormKind::Full, &amb.phi(&u).unwrap(), &amb.phi(&v).unwrap());
        let rhs = crate::model::eval_form(cs.fields(), &u, &v).unwrap().value;
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
