use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bessel_k_scaled, gamma_fn, scaled_k_power};

/// `u(y) = coeff · z^nu K_|nu|(z)` with `z = λy`.
///
/// Solves `u'' + ((1 - 2nu)/y) u' - λ² u = 0` for any real `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselForm {
    pub coeff: f64,
    pub nu: f64,
}

impl BesselForm {
    pub fn value(&self, z: f64) -> Result<f64> {
        scaled_k_power(self.coeff, self.nu, z)
    }

    /// `d/dz [z^ν K_ν(z)] = -z^ν K_{ν-1}(z)`.
    pub fn dz(&self, z: f64) -> Result<f64> {
        if self.coeff == 0.0 {
            return Ok(0.0);
        }
        let (ks, _) = bessel_k_scaled((self.nu - 1.0).abs(), z)?;
        let ln = self.coeff.abs().ln() + self.nu * z.ln() + ks.ln() - z;
        Ok(-self.coeff.signum() * ln.exp())
    }

    /// Limit at `z → 0`, finite only for `nu > 0`.
    pub fn origin_value(&self) -> Option<f64> {
        if self.nu > 0.0 {
            gamma_fn(self.nu).ok().map(|g| self.coeff * 2f64.powf(self.nu - 1.0) * g)
        } else {
            None
        }
    }
}

/// One Fourier mode of a function on the half-space, sampled in `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub lambda: f64,
    /// Weight exponent of the equation `u'' + (m/y) u' - λ² u = 0` the
    /// profile solves.
    pub m: f64,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    /// `lim_{y→0} u`, when finite and known.
    pub boundary_value: Option<f64>,
    /// Closed form carried alongside the samples when available.
    pub analytic: Option<BesselForm>,
}

impl ModeProfile {
    pub fn from_bessel(lambda: f64, form: BesselForm, y: Vec<f64>) -> Result<Self> {
        let u = y.iter().map(|&t| form.value(lambda * t)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambda,
            m: 1.0 - 2.0 * form.nu,
            y,
            u,
            boundary_value: form.origin_value(),
            analytic: Some(form),
        })
    }

    pub fn constant(m: f64, y: Vec<f64>) -> Self {
        let u = vec![1.0; y.len()];
        Self { lambda: 0.0, m, y, u, boundary_value: Some(1.0), analytic: None }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Drops the closed form so that downstream operators work on samples.
    pub fn sampled(mut self) -> Self {
        self.analytic = None;
        self
    }

    pub fn y_max(&self) -> f64 {
        self.y.last().copied().unwrap_or(0.0)
    }

    /// `∂_y u` at the nodes (exact for closed forms, otherwise 5-point
    /// nonuniform differences with one-sided stencils at the ends).
    pub fn derivative(&self) -> Result<Vec<f64>> {
        if let Some(form) = self.analytic {
            return self.y.iter().map(|&t| Ok(self.lambda * form.dz(self.lambda * t)?)).collect();
        }
        let n = self.len();
        if n < 5 {
            return Err(Error::InvalidParameter("derivative needs at least 5 samples".into()));
        }
        Ok((0..n)
            .map(|i| {
                let lo = i.saturating_sub(2).min(n - 5);
                let w = fornberg(self.y[i], &self.y[lo..lo + 5], 1);
                (0..5).map(|k| w[1][k] * (self.u[lo + k] - self.u[i])).sum()
            })
            .collect())
    }

    /// CSV with columns `y,u,residual`.
    pub fn write_csv<W: Write>(&self, out: W, residual: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["y", "u", "residual"])?;
        for (i, (y, u)) in self.y.iter().zip(&self.u).enumerate() {
            let r = residual.get(i).map(|r| format!("{r:e}")).unwrap_or_default();
            w.write_record([format!("{y:e}"), format!("{u:e}"), r])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Finite-difference weights for derivatives `0..=order` at `x0` from the
/// stencil `xs` (Fornberg's recursion). Returns `w[d][k]`.
pub fn fornberg(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fornberg_reproduces_quartics() {
        let xs = [0.1, 0.25, 0.3, 0.7, 1.1];
        let w = fornberg(0.3, &xs, 2);
        let f = |x: f64| 1.0 - 2.0 * x + 3.0 * x.powi(3) - x.powi(4);
        let d1: f64 = xs.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let d2: f64 = xs.iter().zip(&w[2]).map(|(x, c)| c * f(*x)).sum();
        assert_relative_eq!(d1, -2.0 + 9.0 * 0.09 - 4.0 * 0.027, max_relative = 1e-11);
        assert_relative_eq!(d2, 18.0 * 0.3 - 12.0 * 0.09, max_relative = 1e-11);
    }

    #[test]
    fn bessel_form_derivative_matches_samples() {
        let y: Vec<f64> = (1..=4000).map(|i| 10.0 * (f64::from(i) / 4000.0).powi(2)).collect();
        let p = ModeProfile::from_bessel(1.3, BesselForm { coeff: 0.8, nu: 0.35 }, y).unwrap();
        let exact = p.derivative().unwrap();
        let numeric = p.clone().sampled().derivative().unwrap();
        for i in (200..3900).step_by(97) {
            assert_relative_eq!(numeric[i], exact[i], max_relative = 1e-6);
        }
        assert!(p.boundary_value.is_some());
    }
}
