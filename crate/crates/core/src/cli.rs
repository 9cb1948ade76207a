//! Command-line front end: `regpart compute|verify|example|probe`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 validation failure, 3 parse failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{run_probe, ProbeConfig};
use crate::error::{Error, Result};
use crate::io::{cantor_model_file, compute_report, ModelFile};
use crate::model::derive_fields;
use crate::oracle::{FormKind, Oracle};
use crate::pointwise::{c, inverse, CMatrix, I};
use crate::random::{projection_and_hermitian, random_model, rng, ModelOptions};
use crate::regular::{
    assemble_regular, build_singular_structure, cell_structure, identity_residuals, CellStructure, IDENTITY_NAMES,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

/// Thresholds used by `verify`.
pub const IDENTITY_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-8;
pub const MULTIPLICATION_TOL: f64 = 1e-9;
pub const XY_SOLVE_TOL: f64 = 1e-12;
pub const K_BOUND_SLACK: f64 = 1e-9;

/// Largest dimension for which `verify` also builds random models and runs the oracle.
pub const MAX_MODEL_DIM: usize = 3;
/// Largest dimension accepted by `verify`.
pub const MAX_VERIFY_DIM: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "regpart", version, about = "Regular and singular parts of sectorial forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    Cantor,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regular/singular parts, diagnostics and oracle comparison for a model file.
    Compute {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        lambda_list: Option<Vec<f64>>,
    },
    /// Randomized identity, oracle and derived-field checks.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        dims: Vec<usize>,
        /// Corrupt Q in the identity draws (negative control).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Writes a model file for a built-in example.
    Example {
        name: ExampleName,
        #[arg(long, default_value_t = 5)]
        stage: u32,
        #[arg(long)]
        out: PathBuf,
        /// Extra cells per finest removed interval.
        #[arg(long, default_value_t = 1)]
        refine: usize,
    },
    /// Plane-wave growth probe of the singular structure.
    Probe {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        lambda_list: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_PARSE
    }
}

fn probe_config(lambdas: Option<Vec<f64>>) -> Result<ProbeConfig> {
    let mut cfg = ProbeConfig::default();
    if let Some(l) = lambdas {
        if l.is_empty() || l.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidModel("lambda list must hold positive finite values".into()));
        }
        cfg.lambdas = l;
    }
    Ok(cfg)
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Compute { model, out: path, lambda_list } => cmd_compute(&model, &path, lambda_list, out, err),
        Command::Verify { seed, trials, dims, inject_fault } => cmd_verify(seed, trials, &dims, inject_fault, out, err),
        Command::Example { name: ExampleName::Cantor, stage, out: path, refine } => {
            cmd_example(stage, refine, &path, out)
        }
        Command::Probe { model, lambda_list, out: path } => cmd_probe(&model, lambda_list, path.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_compute(
    model: &std::path::Path,
    path: &std::path::Path,
    lambdas: Option<Vec<f64>>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let cfg = probe_config(lambdas)?;
    let loaded = ModelFile::read(model)?.load()?;
    let report = compute_report(&loaded, &cfg)?;
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    report.write(path)?;
    let d = &report.diagnostics;
    let _ = writeln!(out, "cells: {}", loaded.coeffs.grid().n_cells());
    let _ = writeln!(out, "commutator max: {:.3e}", d.commutator_max);
    for (name, v) in d.verdicts.as_array() {
        let _ = writeln!(out, "({name}) {v:?}");
    }
    if !report.oracle_table.is_empty() {
        let _ = writeln!(out, "oracle max rel err: {:.3e}", report.oracle_max_rel_err());
    }
    let _ = writeln!(out, "report written to {}", path.display());
    Ok(EXIT_OK)
}

fn cmd_example(stage: u32, refine: usize, path: &std::path::Path, out: &mut dyn Write) -> Result<i32> {
    let file = cantor_model_file(stage, refine)?;
    file.write(path)?;
    let _ = writeln!(
        out,
        "cantor stage {stage}: {} cells, |K| = {}",
        file.grid.cells.iter().product::<usize>(),
        crate::diagnostics::cantor_measure(stage)
    );
    Ok(EXIT_OK)
}

fn cmd_probe(
    model: &std::path::Path,
    lambdas: Option<Vec<f64>>,
    path: Option<&std::path::Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let cfg = probe_config(lambdas)?;
    let loaded = ModelFile::read(model)?.load()?;
    let derived = derive_fields(&loaded.coeffs, Default::default())?;
    let outcomes = run_probe(&loaded.coeffs, &derived, &loaded.q, &cfg)?;
    for o in &outcomes {
        let r = &o.report;
        let _ = writeln!(
            out,
            "xi={:?} refine={} slope={:.6e} intercept={:.6e} integral={:.6e} growing={}",
            o.direction,
            o.refinement,
            r.gradient_slope,
            r.gradient_intercept,
            r.integral_estimate,
            o.is_growing()
        );
    }
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(&outcomes)? + "\n")?;
    }
    Ok(EXIT_OK)
}

/// A threshold breach found by [`verify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyFailure {
    pub seed: u64,
    pub dim: usize,
    pub check: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub identity_max: [f64; 6],
    pub oracle_max: f64,
    pub multiplication_max: f64,
    pub xy_solve_max: f64,
    /// Largest `max(‖X‖, ‖Y‖) − K` seen.
    pub k_excess_max: f64,
    pub models: usize,
    pub identity_draws: usize,
    pub failures: Vec<VerifyFailure>,
}

fn faulty_structure(q: &CMatrix, z: &CMatrix) -> CellStructure {
    let d = q.rows();
    let mut qf = q.clone();
    qf[(0, d - 1)] += c(1e-3, 0.0);
    let id = CMatrix::identity(d);
    let m = &id + &(&(&qf * z) * &qf).scale(I);
    let w = &(&qf * &inverse(&m).unwrap_or_else(|| id.clone())) * &qf;
    CellStructure { p: &id - &qf, q: qf, w }
}

fn trial_seed(seed: u64, t: usize, d: usize) -> u64 {
    seed.wrapping_add(t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ d as u64
}

/// Runs `trials` rounds per dimension. Trial `t` of dimension `d` depends only on
/// `(seed + t, d)`, so `--seed <seed+t> --trials 1 --dims <d>` reproduces it.
pub fn verify(seed: u64, trials: usize, dims: &[usize], inject_fault: bool) -> Result<VerifySummary> {
    if let Some(&d) = dims.iter().find(|&&d| d == 0 || d > MAX_VERIFY_DIM) {
        return Err(Error::InvalidModel(format!("dimension {d} outside 1..={MAX_VERIFY_DIM}")));
    }
    let mut s = VerifySummary::default();
    for t in 0..trials {
        let ts = seed.wrapping_add(t as u64);
        for &d in dims {
            let mut r = rng(trial_seed(seed, t, d));
            let fail = |s: &mut VerifySummary, check: &str, value: f64| {
                s.failures.push(VerifyFailure { seed: ts, dim: d, check: check.into(), value })
            };
            let zmax = r.gen_range(0.0..3.0);
            let (q, z) = projection_and_hermitian(&mut r, d, zmax);
            let cs = if inject_fault { faulty_structure(&q, &z) } else { cell_structure(&q, &z)? };
            let res = identity_residuals(&cs, &z);
            s.identity_draws += 1;
            for k in 0..6 {
                s.identity_max[k] = s.identity_max[k].max(res[k]);
                if !(res[k] < IDENTITY_TOL) {
                    fail(&mut s, IDENTITY_NAMES[k], res[k]);
                }
            }
            if d > MAX_MODEL_DIM {
                continue;
            }
            let commuting = d == 1 || r.gen_bool(0.5);
            if let Err(e) = verify_model(&mut r, d, commuting, &mut s, ts) {
                fail(&mut s, &format!("model pipeline ({e})"), f64::NAN);
            }
        }
    }
    Ok(s)
}

/// Random model checks for one trial; breaches are pushed onto `s.failures`.
fn verify_model(r: &mut impl Rng, d: usize, commuting: bool, s: &mut VerifySummary, ts: u64) -> Result<()> {
    let fail = |s: &mut VerifySummary, check: &str, value: f64| {
        s.failures.push(VerifyFailure { seed: ts, dim: d, check: check.into(), value })
    };
    let m = random_model(r, &ModelOptions::new(d, commuting))?;
    let der = derive_fields(&m.coeffs, Default::default())?;
    let dr = der.residuals(&m.coeffs);
    let xy = dr.x_solve.max(dr.y_solve);
    let excess = dr.x_norm_max.max(dr.y_norm_max) - m.coeffs.k_bound();
    s.xy_solve_max = s.xy_solve_max.max(xy);
    s.k_excess_max = if s.models == 0 { excess } else { s.k_excess_max.max(excess) };
    if !(xy < XY_SOLVE_TOL) {
        fail(s, "X/Y solve", xy);
    }
    if !(excess <= K_BOUND_SLACK) {
        fail(s, "X/Y bound", excess);
    }
    let st = build_singular_structure(m.q.clone(), &der)?;
    let reg = assemble_regular(&m.coeffs, &der, &st)?;
    let oracle = Oracle::new(&m.coeffs, &der, &m.q, &m.funcs, 0.0, FormKind::Full)?;
    let om = oracle.matrix()?;
    for (i, u) in m.funcs.iter().enumerate() {
        for (k, v) in m.funcs.iter().enumerate() {
            let f = crate::model::eval_form(&reg.reg, u, v)?.value;
            let e = (f - om[(k, i)]).norm() / (1.0 + f.norm());
            s.oracle_max = s.oracle_max.max(e);
            if !(e <= ORACLE_TOL) {
                fail(s, "oracle vs formula", e);
            }
        }
    }
    let mr = oracle.multiplication_residuals(&m.q);
    let mm = mr.pi1.max(mr.t);
    s.multiplication_max = s.multiplication_max.max(mm);
    if !(mm < MULTIPLICATION_TOL) {
        fail(s, "multiplication operators", mm);
    }
    s.models += 1;
    Ok(())
}

fn cmd_verify(
    seed: u64,
    trials: usize,
    dims: &[usize],
    inject_fault: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    if trials == 0 {
        let _ = writeln!(err, "warning: --trials 0, nothing to verify");
        return Ok(EXIT_OK);
    }
    let s = verify(seed, trials, dims, inject_fault)?;
    for (name, v) in IDENTITY_NAMES.iter().zip(s.identity_max) {
        let _ = writeln!(out, "identity {name}: worst {v:.3e}");
    }
    let _ = writeln!(out, "oracle vs formula: worst {:.3e} over {} models", s.oracle_max, s.models);
    let _ = writeln!(out, "multiplication operators: worst {:.3e}", s.multiplication_max);
    let _ = writeln!(out, "X/Y solve: worst {:.3e}", s.xy_solve_max);
    if s.failures.is_empty() {
        let _ = writeln!(out, "ok: {} identity draws, {} models", s.identity_draws, s.models);
        return Ok(EXIT_OK);
    }
    let first = &s.failures[0];
    let _ = writeln!(
        err,
        "FAILED: {} breaches; first: {} = {:.3e}; reproduce with --seed {} --trials 1 --dims {}",
        s.failures.len(),
        first.check,
        first.value,
        first.seed,
        first.dim
    );
    Ok(EXIT_VERIFY)
}
