use serde::{Deserialize, Serialize};

use crate::model::DerivedFields;
use crate::pointwise::{CMatrix, I};

use super::structure::{CellStructure, SingularStructure};

pub const IDENTITY_NAMES: [&str; 6] = [
    "WZQ = i(W - Q)",
    "2W*W = W* + W",
    "Q(I+iZ)(I-iWZ)P = 0",
    "P(I+iZW*)(I+iZ)(I-iWZ)P = P(I+iZ+ZWZ)P",
    "(-W*(I-iZ)(I-iWZ) + (I-iWZ))P = (I+iW*Z)P",
    "Q(I+iZ)W - Q = 0",
];

/// Frobenius residuals of the six matrix identities at one point.
pub fn identity_residuals(s: &CellStructure, z: &CMatrix) -> [f64; 6] {
    let d = z.rows();
    let id = CMatrix::identity(d);
    let (q, p, w) = (&s.q, &s.p, &s.w);
    let ws = w.adjoint();
    let iz = z.scale(I);
    let i_plus_iz = &id + &iz;
    let i_minus_iz = &id - &iz;
    let i_minus_iwz = &id - &(w * z).scale(I);

    let r1 = &(&(w * z) * q) - &(w - q).scale(I);
    let r2 = &(&ws * w).scale_real(2.0) - &(&ws + w);
    let r3 = &(&(q * &i_plus_iz) * &i_minus_iwz) * p;
    let lhs4 = &(&(&(p * &(&id + &(z * &ws).scale(I))) * &i_plus_iz) * &i_minus_iwz) * p;
    let rhs4 = &(p * &(&i_plus_iz + &(&(z * w) * z))) * p;
    let lhs5 = &(&i_minus_iwz - &(&(&ws * &i_minus_iz) * &i_minus_iwz)) * p;
    let rhs5 = &(&id + &(&ws * z).scale(I)) * p;
    let r6 = &(&(q * &i_plus_iz) * w) - q;

    [
        r1.frobenius_norm(),
        r2.frobenius_norm(),
        r3.frobenius_norm(),
        (&lhs4 - &rhs4).frobenius_norm(),
        (&lhs5 - &rhs5).frobenius_norm(),
        r6.frobenius_norm(),
    ]
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub per_cell: Vec<[f64; 6]>,
    pub max: [f64; 6],
    /// Cell attaining each maximum.
    pub argmax: [usize; 6],
}

impl IdentityReport {
    pub fn worst(&self) -> f64 {
        self.max.iter().copied().fold(0.0, f64::max)
    }

    pub fn merge(&mut self, r: &[f64; 6], cell: usize) {
        for k in 0..6 {
            if r[k] > self.max[k] {
                self.max[k] = r[k];
                self.argmax[k] = cell;
            }
        }
    }
}

pub fn identity_suite(s: &SingularStructure, derived: &DerivedFields) -> IdentityReport {
    let mut rep = IdentityReport::default();
    for cell in 0..s.n_cells() {
        let r = identity_residuals(&s.cell(cell), &derived.z[cell]);
        rep.merge(&r, cell);
        rep.per_cell.push(r);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regular::cell_structure;

    #[test]
    fn zero_z_is_exact() {
        let q = CMatrix::from_real_diag(&[1.0, 0.0]);
        let z = CMatrix::zeros(2, 2);
        let r = identity_residuals(&cell_structure(&q, &z).unwrap(), &z);
        assert_eq!(r, [0.0; 6]);
    }

    #[test]
    fn full_projection() {
        let z = CMatrix::from_real_rows(&[&[0.3, -1.2], &[-1.2, 2.0]]);
        let q = CMatrix::identity(2);
        let r = identity_residuals(&cell_structure(&q, &z).unwrap(), &z);
        assert!(r.iter().all(|&x| x < 1e-12), "{r:?}");
    }
}
