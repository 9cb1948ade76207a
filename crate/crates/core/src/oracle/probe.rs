use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::TestFunction;

use super::ambient::AmbientSpace;
use super::operators::V1Operators;
use super::subspace::V1Basis;

pub const DEFAULT_LAMBDAS: [f64; 5] = [5.0, 10.0, 20.0, 40.0, 80.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub lambda: f64,
    /// `‖Tπ₂Φ(u_λ)‖²_h̃ / ‖u_λ‖²_H`.
    pub ratio: f64,
    /// `‖Tπ₂(0, A^{1/2}∇u_λ)‖²_h̃ / ‖u_λ‖²_H`, the part that can grow with `λ`.
    pub gradient_ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// True when `τ` vanishes, so no ratio is defined.
    pub skipped: bool,
    pub points: Vec<ProbePoint>,
    /// Least-squares slope of `ratio` against `λ²`.
    pub slope: f64,
    pub intercept: f64,
    /// Least-squares slope of `gradient_ratio` against `λ²`.
    pub gradient_slope: f64,
    pub gradient_intercept: f64,
    /// `gradient_slope · ‖τ‖²_H`, an estimate of `∫|QZ(I−Q)A^{1/2}ξ|²|τ|²`.
    pub integral_estimate: f64,
}

/// Fits `y ≈ a + b x`; returns `(b, a)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.len() < 2 {
        return (0.0, y.first().copied().unwrap_or(0.0));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Growth of `Tπ₂Φ(u_λ)` for `u_λ = e^{iλx·ξ}τ` over the given `λ` values.
pub fn t_pi2_probe(
    ambient: &AmbientSpace,
    v1: &V1Basis,
    ops: &V1Operators,
    tau: &TestFunction,
    xi: &[f64],
    lambdas: &[f64],
) -> Result<ProbeReport> {
    let tau_norm = tau.l2_norm_sqr();
    if tau_norm == 0.0 {
        return Ok(ProbeReport { skipped: true, ..Default::default() });
    }
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let u = TestFunction::plane_wave(tau, lambda, xi)?;
        let nu = u.l2_norm_sqr();
        if nu == 0.0 {
            continue;
        }
        let full = ops.t_pi2(ambient, v1, &ambient.phi(&u)?);
        let grad = ops.t_pi2(ambient, v1, &ambient.gradient_part(&u)?);
        points.push(ProbePoint {
            lambda,
            ratio: ops.ht_norm_sqr(v1, &full) / nu,
            gradient_ratio: ops.ht_norm_sqr(v1, &grad) / nu,
        });
    }
    if points.is_empty() {
        return Ok(ProbeReport { skipped: true, ..Default::default() });
    }
    let x: Vec<f64> = points.iter().map(|p| p.lambda * p.lambda).collect();
    let (slope, intercept) = linear_fit(&x, &points.iter().map(|p| p.ratio).collect::<Vec<_>>());
    let (gradient_slope, gradient_intercept) =
        linear_fit(&x, &points.iter().map(|p| p.gradient_ratio).collect::<Vec<_>>());
    Ok(ProbeReport {
        skipped: false,
        points,
        slope,
        intercept,
        gradient_slope,
        gradient_intercept,
        integral_estimate: gradient_slope * tau_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let x = [25.0, 100.0, 400.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 + 0.5 * v).collect();
        let (b, a) = linear_fit(&x, &y);
        assert!((b - 0.5).abs() < 1e-14 && (a - 3.0).abs() < 1e-12);
    }
}
