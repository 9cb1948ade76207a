//! Seeded random models for property tests and the `verify` command.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{CoefficientSet, FormCoefficients, GridSpec, TestFunction};
use crate::pointwise::{psd_sqrt, CMatrix, CVector, RankTolerance, C64, I};
use crate::regular::orthonormalize;

pub use rand::SeedableRng;
pub type ModelRng = ChaCha8Rng;

pub fn rng(seed: u64) -> ModelRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn vector(rng: &mut impl Rng, d: usize) -> CVector {
    CVector((0..d).map(|_| complex(rng)).collect())
}

pub fn matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| complex(rng))
}

/// Columns form a random unitary matrix.
pub fn unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    loop {
        let cols: Vec<CVector> = (0..d).map(|_| vector(rng, d)).collect();
        let on = orthonormalize(&cols);
        if on.len() == d {
            return CMatrix::from_columns(&on);
        }
    }
}

/// Hermitian matrix with spectral norm `norm`.
pub fn hermitian_with_norm(rng: &mut impl Rng, d: usize, norm: f64) -> CMatrix {
    let r = matrix(rng, d, d);
    let h = (&r + &r.adjoint()).scale_real(0.5);
    let rad = crate::pointwise::herm_eig(&h).map(|e| e.spectral_radius()).unwrap_or(0.0);
    if rad == 0.0 {
        return CMatrix::zeros(d, d);
    }
    h.scale_real(norm / rad)
}

/// `U diag(1,…,1,0,…,0) U*` with `rank` ones.
pub fn projection_in_basis(u: &CMatrix, rank: usize) -> CMatrix {
    let d = u.rows();
    let diag: Vec<f64> = (0..d).map(|k| if k < rank { 1.0 } else { 0.0 }).collect();
    &(u * &CMatrix::from_real_diag(&diag)) * &u.adjoint()
}

/// Random orthogonal projection of uniformly random rank in `0..=d`.
pub fn projection(rng: &mut impl Rng, d: usize) -> CMatrix {
    let u = unitary(rng, d);
    let rank = rng.gen_range(0..=d);
    projection_in_basis(&u, rank)
}

/// A random pair `(Q, Z)` with `‖Z‖₂ ≤ max_norm`.
pub fn projection_and_hermitian(rng: &mut impl Rng, d: usize, max_norm: f64) -> (CMatrix, CMatrix) {
    let q = projection(rng, d);
    let norm = rng.gen_range(0.0..=max_norm);
    (q, hermitian_with_norm(rng, d, norm))
}

/// Cells per axis used for random models of dimension `d`.
pub fn default_grid(d: usize) -> GridSpec {
    let n = match d {
        1 => 24,
        2 => 6,
        3 => 4,
        _ => 2,
    };
    GridSpec::new(vec![[0.0, 1.0]; d], vec![n; d]).expect("valid default grid")
}

#[derive(Clone, Debug)]
pub struct ModelOptions {
    pub dim: usize,
    /// Build `Q` and `Z` so that `QZ = ZQ` in every cell.
    pub commuting: bool,
    /// Every `rank_deficient_every`-th cell gets a singular `A`.
    pub rank_deficient_every: usize,
    pub tan_theta: f64,
    pub max_funcs: usize,
}

impl ModelOptions {
    pub fn new(dim: usize, commuting: bool) -> Self {
        Self { dim, commuting, rank_deficient_every: 3, tan_theta: 1.5, max_funcs: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct RandomModel {
    pub coeffs: CoefficientSet,
    pub q: Vec<CMatrix>,
    pub funcs: Vec<TestFunction>,
    pub rank_deficient_cells: usize,
}

pub fn random_model(rng: &mut impl Rng, opts: &ModelOptions) -> Result<RandomModel> {
    random_model_on(rng, opts, default_grid(opts.dim))
}

pub fn random_model_on(rng: &mut impl Rng, opts: &ModelOptions, grid: GridSpec) -> Result<RandomModel> {
    let d = opts.dim;
    let n = grid.n_cells();
    let zmax = 0.95 * opts.tan_theta;
    let mut c = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut dv = Vec::with_capacity(n);
    let mut c0 = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut kmax: f64 = 0.0;
    let mut deficient = 0;
    for cell in 0..n {
        let singular = opts.rank_deficient_every > 0 && cell % opts.rank_deficient_every == 0;
        let rank = if singular { rng.gen_range(0..d) } else { d };
        deficient += usize::from(singular);
        let u = unitary(rng, d);
        let qrank = rng.gen_range(0..=d);
        let (a, qc, z0) = if opts.commuting {
            // A, Q and Z share the eigenbasis blocks of Q, so QZ = ZQ survives
            // the restriction of Z to range(A).
            let mut diag: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..2.0)).collect();
            let mut idx: Vec<usize> = (0..d).collect();
            for k in (1..d).rev() {
                idx.swap(k, rng.gen_range(0..=k));
            }
            for &k in idx.iter().take(d - rank) {
                diag[k] = 0.0;
            }
            let a = &(&u * &CMatrix::from_real_diag(&diag)) * &u.adjoint();
            let (n1, n2) = (rng.gen_range(0.0..=zmax), rng.gen_range(0.0..=zmax));
            let z1 = hermitian_with_norm(rng, qrank, n1);
            let z2 = hermitian_with_norm(rng, d - qrank, n2);
            let zb = CMatrix::from_fn(d, d, |i, j| {
                if i < qrank && j < qrank {
                    z1[(i, j)]
                } else if i >= qrank && j >= qrank {
                    z2[(i - qrank, j - qrank)]
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let z0 = &(&u * &zb) * &u.adjoint();
            (a, projection_in_basis(&u, qrank), z0)
        } else {
            let bm = matrix(rng, d, rank);
            let a = (&bm * &bm.adjoint()).hermitian_part();
            let zn = rng.gen_range(0.0..=zmax);
            let z0 = hermitian_with_norm(rng, d, zn);
            (a, projection_in_basis(&unitary(rng, d), qrank), z0)
        };
        let s = psd_sqrt(&a, RankTolerance::default())?;
        let cm = &(&s * &(&CMatrix::identity(d) + &z0.scale(I))) * &s;
        let x0 = vector(rng, d);
        let y0 = vector(rng, d);
        kmax = kmax.max(x0.norm()).max(y0.norm());
        c.push(cm);
        b.push(s.mul_vec(&x0).conj());
        dv.push(s.mul_vec(&y0));
        c0.push(complex(rng));
        q.push(qc);
    }
    let fields = FormCoefficients::new(grid.clone(), c, b, dv, c0)?;
    let coeffs = CoefficientSet::new(fields, opts.tan_theta.atan(), kmax * 1.01 + 0.01)?;
    let n_funcs = rng.gen_range(1..=opts.max_funcs.max(1));
    let funcs = (0..n_funcs).map(|_| random_function(rng, &grid)).collect::<Result<Vec<_>>>()?;
    Ok(RandomModel { coeffs, q, funcs, rank_deficient_cells: deficient })
}

/// Random complex node values, zero on the boundary.
pub fn random_function(rng: &mut impl Rng, grid: &GridSpec) -> Result<TestFunction> {
    let values = (0..grid.n_nodes())
        .map(|n| if grid.node_on_boundary(n) { C64::new(0.0, 0.0) } else { complex(rng) })
        .collect();
    TestFunction::from_nodes(grid, values)
}
