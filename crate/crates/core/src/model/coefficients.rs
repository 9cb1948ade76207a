use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointwise::{psd_violation, sector_check, CMatrix, CVector, RankTolerance, C64};

use super::grid::GridSpec;

/// Raw per-cell coefficient fields `C, b, d, c₀` of a form of the shape
///
/// `a(u,v) = ∫ ⟨C∇u, ∇v⟩ + ∫ (bᵗ∇u) v̄ + ∫ u ⟨d, ∇v⟩ + ∫ c₀ u v̄`,
///
/// where `⟨p, q⟩ = Σ_k p_k conj(q_k)`. No sectoriality is assumed, so the same
/// type carries regular and singular parts.
#[derive(Clone, Debug, PartialEq)]
pub struct FormCoefficients {
    pub grid: GridSpec,
    pub c: Vec<CMatrix>,
    pub b: Vec<CVector>,
    pub d: Vec<CVector>,
    pub c0: Vec<C64>,
}

impl FormCoefficients {
    pub fn new(
        grid: GridSpec,
        c: Vec<CMatrix>,
        b: Vec<CVector>,
        d: Vec<CVector>,
        c0: Vec<C64>,
    ) -> Result<Self> {
        let fc = Self { grid, c, b, d, c0 };
        fc.check_shapes()?;
        Ok(fc)
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        let n = grid.n_cells();
        let d = grid.dim();
        Self {
            grid: grid.clone(),
            c: vec![CMatrix::zeros(d, d); n],
            b: vec![CVector::zeros(d); n],
            d: vec![CVector::zeros(d); n],
            c0: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.grid.n_cells()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn check_shapes(&self) -> Result<()> {
        let n = self.grid.n_cells();
        let d = self.grid.dim();
        if self.c.len() != n || self.b.len() != n || self.d.len() != n || self.c0.len() != n {
            return Err(Error::GridMismatch(format!(
                "coefficient arrays have lengths C={}, b={}, d={}, c0={}; grid has {n} cells",
                self.c.len(),
                self.b.len(),
                self.d.len(),
                self.c0.len()
            )));
        }
        for cell in 0..n {
            if self.c[cell].rows() != d || self.c[cell].cols() != d {
                return Err(Error::InvalidModel(format!("cell {cell}: C is not {d}x{d}")));
            }
            if self.b[cell].len() != d || self.d[cell].len() != d {
                return Err(Error::InvalidModel(format!("cell {cell}: b or d has wrong length")));
            }
            let c0 = self.c0[cell];
            if !self.c[cell].is_finite()
                || !self.b[cell].is_finite()
                || !self.d[cell].is_finite()
                || !(c0.re.is_finite() && c0.im.is_finite())
            {
                return Err(Error::InvalidModel(format!("cell {cell}: non-finite coefficient")));
            }
        }
        Ok(())
    }

    /// Same second-order field, lower-order terms removed.
    pub fn principal_only(&self) -> Self {
        let z = Self::zeros(&self.grid);
        Self { c: self.c.clone(), ..z }
    }

    /// `self − other`, cell by cell.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("difference of fields on different grids".into()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect(),
            b: self.b.iter().zip(&other.b).map(|(a, b)| a - b).collect(),
            d: self.d.iter().zip(&other.d).map(|(a, b)| a - b).collect(),
            c0: self.c0.iter().zip(&other.c0).map(|(a, b)| a - b).collect(),
        })
    }

    /// Largest entrywise deviation between two coefficient sets.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for cell in 0..self.n_cells().min(other.n_cells()) {
            m = m.max((&self.c[cell] - &other.c[cell]).max_abs());
            m = m.max((&self.b[cell] - &other.b[cell]).iter().map(|z| z.norm()).fold(0.0, f64::max));
            m = m.max((&self.d[cell] - &other.d[cell]).iter().map(|z| z.norm()).fold(0.0, f64::max));
            m = m.max((self.c0[cell] - other.c0[cell]).norm());
        }
        m
    }

    /// Largest entry magnitude across all fields.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for cell in 0..self.n_cells() {
            m = m.max(self.c[cell].max_abs());
            m = m.max(self.b[cell].iter().chain(self.d[cell].iter()).map(|z| z.norm()).fold(0.0, f64::max));
            m = m.max(self.c0[cell].norm());
        }
        m
    }
}

/// Validated coefficients: sectorial principal part with semi-angle `theta`
/// and lower-order terms dominated by `A^{1/2}` with constant `k_bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    fields: FormCoefficients,
    theta: f64,
    k_bound: f64,
}

impl CoefficientSet {
    pub fn new(fields: FormCoefficients, theta: f64, k_bound: f64) -> Result<Self> {
        Self::with_tolerance(fields, theta, k_bound, RankTolerance::default())
    }

    pub fn with_tolerance(
        fields: FormCoefficients,
        theta: f64,
        k_bound: f64,
        tol: RankTolerance,
    ) -> Result<Self> {
        fields.check_shapes()?;
        if !(0.0..FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidModel(format!("theta {theta} outside [0, pi/2)")));
        }
        if !(k_bound > 0.0 && k_bound.is_finite()) {
            return Err(Error::InvalidModel(format!("K bound {k_bound} must be positive")));
        }
        let failures: Vec<Error> = (0..fields.n_cells())
            .into_par_iter()
            .filter_map(|cell| validate_cell(&fields, cell, theta, k_bound, tol).err())
            .collect();
        if let Some(e) = failures.into_iter().next() {
            return Err(e);
        }
        Ok(Self { fields, theta, k_bound })
    }

    pub fn fields(&self) -> &FormCoefficients {
        &self.fields
    }

    pub fn grid(&self) -> &GridSpec {
        &self.fields.grid
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    pub fn into_fields(self) -> FormCoefficients {
        self.fields
    }
}

fn validate_cell(f: &FormCoefficients, cell: usize, theta: f64, k: f64, tol: RankTolerance) -> Result<()> {
    let cm = &f.c[cell];
    let sc = sector_check(cm, theta, tol);
    if !sc.holds {
        return Err(Error::SectorViolation {
            cell,
            detail: format!("C xi . xi leaves the sector of semi-angle {theta}"),
            witness: sc.witness,
        });
    }
    let a = cm.hermitian_part();
    let k2a = a.scale_real(k * k);
    for (name, v) in [("conj(b)", f.b[cell].conj()), ("d", f.d[cell].clone())] {
        let pencil = &k2a - &CMatrix::outer(&v, &v);
        let scale = k2a.frobenius_norm() + v.norm_sqr();
        if psd_violation(&pencil, scale.max(f64::MIN_POSITIVE), tol.rel_eps())?.is_some() {
            return Err(Error::DominationViolation {
                cell,
                detail: format!("K^2 A - {name} {name}* is not psd for K = {k}"),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::c;

    fn one_cell(cm: CMatrix, b: CVector, d: CVector) -> FormCoefficients {
        let g = GridSpec::uniform_1d(0.0, 1.0, 1).unwrap();
        if cm.rows() == 1 {
            FormCoefficients::new(g, vec![cm], vec![b], vec![d], vec![c(0.0, 0.0)]).unwrap()
        } else {
            let g = GridSpec::new(vec![[0.0, 1.0]; cm.rows()], vec![1; cm.rows()]).unwrap();
            FormCoefficients::new(g, vec![cm], vec![b], vec![d], vec![c(0.0, 0.0)]).unwrap()
        }
    }

    #[test]
    fn accepts_identity() {
        let f = one_cell(CMatrix::identity(2), CVector::zeros(2), CVector::zeros(2));
        assert!(CoefficientSet::new(f, 0.0, 1.0).is_ok());
    }

    #[test]
    fn rejects_sector_violation_with_cell() {
        let f = one_cell(CMatrix::identity(1).scale(c(1.0, 2.0)), CVector::zeros(1), CVector::zeros(1));
        match CoefficientSet::new(f, 0.5, 1.0) {
            Err(Error::SectorViolation { cell, witness, .. }) => {
                assert_eq!(cell, 0);
                assert!(witness.is_some());
            }
            other => panic!("expected sector violation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_b_outside_range_of_a() {
        let f = one_cell(
            CMatrix::from_real_diag(&[1.0, 0.0]),
            CVector(vec![c(0.0, 0.0), c(1.0, 0.0)]),
            CVector::zeros(2),
        );
        assert!(matches!(CoefficientSet::new(f, 0.1, 10.0), Err(Error::DominationViolation { .. })));
    }

    #[test]
    fn domination_constant_is_checked() {
        // |b̄·ξ| ≤ K |A^{1/2} ξ| with A = 4, b = 3 needs K ≥ 1.5.
        let f = one_cell(CMatrix::from_real_diag(&[4.0]), CVector::from_real(&[3.0]), CVector::zeros(1));
        assert!(CoefficientSet::new(f.clone(), 0.0, 1.4).is_err());
        assert!(CoefficientSet::new(f, 0.0, 1.5).is_ok());
    }

    #[test]
    fn rejects_right_angle_and_nan() {
        let f = one_cell(CMatrix::identity(1), CVector::zeros(1), CVector::zeros(1));
        assert!(CoefficientSet::new(f.clone(), FRAC_PI_2, 1.0).is_err());
        let mut bad = f;
        bad.c0[0] = c(f64::NAN, 0.0);
        assert!(CoefficientSet::new(bad, 0.0, 1.0).is_err());
    }
}
