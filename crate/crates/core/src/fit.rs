//! Windowed least-squares fits of generalized power series near `y = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of `u ≈ a + c2 y² + b y^e + …` near the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub a: f64,
    pub c2: f64,
    pub b: f64,
    /// Singular exponent `e` multiplying `b`.
    pub exponent: f64,
    /// Max deviation on the window, relative to `max(|a|, |b|)`.
    pub residual: f64,
}

impl ExpansionFit {
    /// `lim y^{1-e} ∂_y u = e·b`.
    pub fn weighted_limit(&self) -> f64 {
        self.exponent * self.b
    }
}

/// Window and basis size for [`fit_expansion`], in the scaled variable
/// `z = λy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub z_min: f64,
    pub z_max: f64,
    /// Number of terms in each of the two Frobenius series.
    pub terms: usize,
    pub residual_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { z_min: 1e-4, z_max: 0.5, terms: 6, residual_tol: 1e-8 }
    }
}

impl FitOptions {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }
}

/// Least-squares coefficients of `values ≈ Σ c_i x^{p_i}`.
///
/// Columns are scaled to unit max before the SVD solve. Returns the
/// coefficients and the max absolute deviation.
pub fn fit_powers(x: &[f64], values: &[f64], powers: &[f64]) -> Result<(Vec<f64>, f64)> {
    if x.len() != values.len() {
        return Err(Error::GridMismatch(format!("{} abscissae vs {} values", x.len(), values.len())));
    }
    if x.len() < powers.len() {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot determine {} coefficients",
            x.len(),
            powers.len()
        )));
    }
    let mut a = DMatrix::<f64>::zeros(x.len(), powers.len());
    let mut scale = vec![0.0_f64; powers.len()];
    for (j, &p) in powers.iter().enumerate() {
        for (i, &xi) in x.iter().enumerate() {
            let v = xi.powf(p);
            a[(i, j)] = v;
            scale[j] = scale[j].max(v.abs());
        }
    }
    for (j, s) in scale.iter().enumerate() {
        if *s > 0.0 {
            a.column_mut(j).scale_mut(1.0 / s);
        }
    }
    let rhs = DVector::from_column_slice(values);
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-15 * svd.singular_values.max())
        .map_err(|e| Error::LinearSolve(e.to_string()))?;
    let resid = (&a * &sol - &rhs).amax();
    let coeffs = sol.iter().zip(&scale).map(|(c, s)| if *s > 0.0 { c / s } else { 0.0 }).collect();
    Ok((coeffs, resid))
}

/// Fits `u(y) ≈ Σ_j α_j z^{2j} + Σ_j β_j z^{e+2j}` with `z = λy` on the
/// window of `opts`, and converts the three leading coefficients back to `y`.
///
/// For `λ = 0` the window is read directly in `y`.
pub fn fit_expansion(y: &[f64], u: &[f64], lambda: f64, e: f64, opts: &FitOptions) -> Result<ExpansionFit> {
    if y.len() != u.len() {
        return Err(Error::GridMismatch(format!("{} nodes vs {} values", y.len(), u.len())));
    }
    if (e / 2.0 - (e / 2.0).round()).abs() < 1e-6 {
        return Err(Error::InvalidParameter(format!("singular exponent {e} collides with the regular series")));
    }
    let scale = if lambda > 0.0 { lambda } else { 1.0 };
    let (zs, us): (Vec<f64>, Vec<f64>) = y
        .iter()
        .zip(u)
        .map(|(&yi, &ui)| (yi * scale, ui))
        .filter(|(z, _)| *z >= opts.z_min && *z <= opts.z_max)
        .unzip();
    let mut powers = Vec::with_capacity(2 * opts.terms);
    for j in 0..opts.terms {
        powers.push(2.0 * j as f64);
    }
    for j in 0..opts.terms {
        powers.push(e + 2.0 * j as f64);
    }
    let (c, resid) = fit_powers(&zs, &us, &powers)?;
    let a = c[0];
    let c2 = if opts.terms > 1 { c[1] * scale * scale } else { 0.0 };
    let b = c[opts.terms] * scale.powf(e);
    let norm = a.abs().max(c[opts.terms].abs()).max(1e-300);
    let residual = resid / norm;
    if residual > opts.residual_tol {
        return Err(Error::FitResidual { residual, tolerance: opts.residual_tol });
    }
    Ok(ExpansionFit { a, c2, b, exponent: e, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_known_series() {
        let y: Vec<f64> = (1..=2000).map(|i| 2.0 * (f64::from(i) / 2000.0).powi(2)).collect();
        let e = 0.7;
        let lambda = 3.0;
        let u: Vec<f64> = y.iter().map(|t| 2.0 - 0.25 * t * t + 1.5 * t.powf(e) + 0.1 * t.powf(e + 2.0)).collect();
        let fit = fit_expansion(&y, &u, lambda, e, &FitOptions::default()).unwrap();
        assert_relative_eq!(fit.a, 2.0, max_relative = 1e-10);
        assert_relative_eq!(fit.c2, -0.25, max_relative = 1e-7);
        assert_relative_eq!(fit.b, 1.5, max_relative = 1e-9);
        assert_relative_eq!(fit.weighted_limit(), 1.05, max_relative = 1e-9);
    }

    #[test]
    fn rejects_colliding_exponent() {
        let y = [0.1, 0.2, 0.3];
        assert!(fit_expansion(&y, &y, 1.0, 2.0, &FitOptions::default()).is_err());
    }

    #[test]
    fn residual_guard() {
        let y: Vec<f64> = (1..=500).map(|i| f64::from(i) / 1000.0).collect();
        let u: Vec<f64> = y.iter().map(|t| (40.0 * t).sin()).collect();
        let opts = FitOptions { terms: 2, ..FitOptions::default() };
        assert!(matches!(fit_expansion(&y, &u, 1.0, 0.5, &opts), Err(Error::FitResidual { .. })));
    }
}
