//! Scattering route: per-mode solutions of `-Δ_{g+} u - s(n-s) u = 0` on
//! hyperbolic half-space and the splitting `u = F y^{n-s} + G y^s`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_powers, FitOptions};
use crate::mesh::{default_extent, graded_mesh, mode_mesh, DEFAULT_GRADING, DEFAULT_POINTS};
use crate::mode::{sampled_fit_options, solve_mode_extension, SolveMethod, FD_FIT_TOLERANCE};
use crate::params::FracParams;
use crate::profile::ModeProfile;
use crate::report::VerificationReport;
use crate::special::{bessel_k_scaled, ln_gamma};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSolution {
    pub lambda: f64,
    pub s: f64,
    pub n: u32,
    /// Samples of `u` itself (not divided by `y^{n-s}`).
    pub u: ModeProfile,
    /// Coefficient of `y^{n-s}`.
    pub f0: f64,
    /// Coefficient of `y^{n-s+2}`.
    pub f2: f64,
    /// Coefficient of `y^s`.
    pub g0: f64,
    pub residual: f64,
}

impl ScatterSolution {
    /// `G0/F0`, the scattering matrix entry at this frequency.
    pub fn ratio(&self) -> f64 {
        self.g0 / self.f0
    }
}

/// Decaying solution with `F0 = 1`.
///
/// The semi-analytic path evaluates `u = c y^{n/2} K_γ(λy)` directly. The
/// finite-difference path solves for `U = y^{s-n} u`, which satisfies the
/// weighted extension equation with `m = 1 - 2γ`, and multiplies back.
pub fn solve_poisson_mode(lambda: f64, params: &FracParams, method: SolveMethod) -> Result<ScatterSolution> {
    let n = params.n;
    let nf = f64::from(n);
    let s = params.s;
    let g = params.gamma;
    let mesh = mode_mesh(lambda);
    let low = nf - s;
    if lambda == 0.0 {
        let u: Vec<f64> = mesh.iter().map(|y| y.powf(low)).collect();
        let u = ModeProfile { lambda, m: params.m0(), y: mesh, u, boundary_value: None, analytic: None };
        return Ok(ScatterSolution { lambda, s, n, u, f0: 1.0, f2: 0.0, g0: 0.0, residual: 0.0 });
    }
    let values = match method {
        SolveMethod::SemiAnalytic => {
            // ln c = γ ln λ + (1-γ) ln 2 - ln Γ(γ)
            let ln_c = g * lambda.ln() + (1.0 - g) * std::f64::consts::LN_2 - ln_gamma(g);
            mesh.iter()
                .map(|&y| {
                    let z = lambda * y;
                    let (ks, _) = bessel_k_scaled(g, z)?;
                    Ok((ln_c + 0.5 * nf * y.ln() + ks.ln() - z).exp())
                })
                .collect::<Result<Vec<_>>>()?
        }
        SolveMethod::FiniteDifference if params.k == 0 => {
            let p = solve_mode_extension(lambda, params.m0(), &mesh, method)?;
            p.y.iter().zip(&p.u).map(|(y, v)| y.powf(low) * v).collect()
        }
        SolveMethod::FiniteDifference => {
            let y_max = default_extent(lambda);
            let at = |points: usize| -> Result<(ModeProfile, (f64, f64, f64, f64))> {
                let mesh = graded_mesh(y_max, points, DEFAULT_GRADING)?;
                let p = solve_mode_extension(lambda, params.m0(), &mesh, method)?;
                let values = p.y.iter().zip(&p.u).map(|(y, v)| y.powf(low) * v).collect();
                let u = ModeProfile { lambda, m: params.m0(), y: mesh, u: values, boundary_value: None, analytic: None };
                let fg = split_fg(&u, low, s, &sampled_fit_options())?;
                Ok((u, fg))
            };
            let (_, c) = at(DEFAULT_POINTS)?;
            let (fine, f) = at(2 * DEFAULT_POINTS)?;
            // Every other node of the fine mesh is a node of the default one.
            let keep = |v: &[f64]| v.iter().skip(1).step_by(2).copied().collect::<Vec<_>>();
            let u = ModeProfile { y: keep(&fine.y), u: keep(&fine.u), ..fine };
            let rich = |a: f64, b: f64| (4.0 * b - a) / 3.0;
            return Ok(ScatterSolution {
                lambda,
                s,
                n,
                u,
                f0: rich(c.0, f.0),
                f2: rich(c.1, f.1),
                g0: rich(c.2, f.2),
                residual: f.3,
            });
        }
    };
    let u = ModeProfile { lambda, m: params.m0(), y: mesh, u: values, boundary_value: None, analytic: None };
    let opts = match method {
        SolveMethod::SemiAnalytic => FitOptions::default().with_tolerance(1e-8),
        SolveMethod::FiniteDifference => FitOptions::default().with_tolerance(FD_FIT_TOLERANCE),
    };
    let (f0, f2, g0, residual) = split_fg(&u, low, s, &opts)?;
    Ok(ScatterSolution { lambda, s, n, u, f0, f2, g0, residual })
}

/// Fits `u ≈ Σ_j F_j y^{n-s+2j} + Σ_j G_j y^{s+2j}` near `y = 0`.
///
/// Rows are weighted by `y^{s-n}` so that the least-squares residual is
/// relative across the window.
fn split_fg(u: &ModeProfile, low: f64, high: f64, opts: &FitOptions) -> Result<(f64, f64, f64, f64)> {
    let tol = opts.residual_tol;
    let lambda = u.lambda;
    let (z, v): (Vec<f64>, Vec<f64>) = u
        .y
        .iter()
        .zip(&u.u)
        .map(|(y, v)| (lambda * y, *v))
        .filter(|(z, _)| *z >= opts.z_min && *z <= opts.z_max)
        .map(|(z, v)| (z, v / z.powf(low)))
        .unzip();
    let powers: Vec<f64> = (0..opts.terms)
        .map(|j| 2.0 * j as f64)
        .chain((0..opts.terms).map(|j| high - low + 2.0 * j as f64))
        .collect();
    let (c, resid) = fit_powers(&z, &v, &powers)?;
    let residual = resid / c[0].abs().max(1e-300);
    if residual > tol {
        return Err(Error::FitResidual { residual, tolerance: tol });
    }
    let f0 = c[0] * lambda.powf(low);
    let f2 = c[1] * lambda.powf(low + 2.0);
    let g0 = c[opts.terms] * lambda.powf(high);
    Ok((f0, f2, g0, residual))
}

/// `d_γ G0/F0` at frequency `lambda`.
pub fn scattering_multiplier(lambda: f64, params: &FracParams, method: SolveMethod) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(params.d_gamma * solve_poisson_mode(lambda, params, method)?.ratio())
}

/// `P_{2γ} f = d_γ S(n/2 + γ) f` mode by mode.
pub fn scattering_apply(f: &SpectralField, params: &FracParams, method: SolveMethod) -> Result<SpectralField> {
    if !(params.gamma < f64::from(params.n) / 2.0) {
        return Err(Error::InvalidParameter("scattering route needs gamma < n/2".into()));
    }
    f.map_radial(|xi| scattering_multiplier(xi, params, method))
}

/// `Q_{2γ} = (2/(n - 2γ)) P_{2γ}(1)` on the flat torus.
pub fn q_curvature_flat(params: &FracParams) -> Result<f64> {
    let one = SpectralField::torus(1, 4, |_| 1.0)?;
    let p1 = scattering_apply(&one, params, SolveMethod::SemiAnalytic)?;
    let nf = f64::from(params.n);
    Ok(2.0 / (nf - 2.0 * params.gamma) * p1.values[0])
}

/// Fitted `y²` coefficient of `F` against `-λ²/(4(γ-1))`.
pub fn f2_consistency(params: &FracParams, lambda: f64, method: SolveMethod, tolerance: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    let sol = solve_poisson_mode(lambda, params, method)?;
    let expected = -lambda * lambda / (4.0 * (params.gamma - 1.0));
    let measured = sol.f2 / sol.f0;
    let label = format!("f2-consistency gamma={} lambda={lambda}", params.gamma);
    Ok(VerificationReport::compare(label, expected, measured, tolerance).with_runtime(start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{fractional_multiplier_apply, random_field};
    use approx::assert_relative_eq;

    #[test]
    fn zero_frequency_is_pure_power() {
        let params = FracParams::new(3, 0.4).unwrap();
        let sol = solve_poisson_mode(0.0, &params, SolveMethod::SemiAnalytic).unwrap();
        assert_eq!(sol.g0, 0.0);
        for (y, u) in sol.u.y.iter().zip(&sol.u.u) {
            assert_relative_eq!(*u, y.powf(3.0 - params.s), max_relative = 1e-15);
        }
    }

    #[test]
    fn half_order_scattering_coefficient() {
        let params = FracParams::new(2, 0.5).unwrap();
        for method in [SolveMethod::SemiAnalytic, SolveMethod::FiniteDifference] {
            let sol = solve_poisson_mode(1.0, &params, method).unwrap();
            assert_relative_eq!(sol.f0, 1.0, max_relative = 1e-6);
            assert_relative_eq!(sol.g0, -1.0, max_relative = 1e-5);
        }
    }

    #[test]
    fn finite_difference_above_order_two() {
        for (n, g) in [(4, 1.5), (6, 2.5)] {
            let params = FracParams::new(n, g).unwrap();
            let v = scattering_multiplier(1.0, &params, SolveMethod::FiniteDifference).unwrap();
            assert_relative_eq!(v, 1.0, max_relative = 1e-4);
        }
    }

    #[test]
    fn correspondence_with_extension_profile() {
        for &g in &[0.3, 1.25, 1.75] {
            let params = FracParams::new(4, g).unwrap();
            let lambda = 1.7;
            let mesh = mode_mesh(lambda);
            let sol = solve_poisson_mode(lambda, &params, SolveMethod::SemiAnalytic).unwrap();
            let ext = solve_mode_extension(lambda, params.m0(), &mesh, SolveMethod::SemiAnalytic).unwrap();
            let low = 4.0 - params.s;
            for ((y, u), e) in sol.u.y.iter().zip(&sol.u.u).zip(&ext.u) {
                let ratio = u / y.powf(low);
                assert!((ratio - e).abs() <= 1e-10 * e.abs().max(1e-300), "y {y}: {ratio} vs {e}");
            }
            let fd = solve_poisson_mode(lambda, &params, SolveMethod::FiniteDifference).unwrap();
            for ((y, u), v) in fd.u.y.iter().zip(&fd.u.u).zip(&sol.u.u).step_by(7) {
                let scale = y.powf(low);
                assert!((u - v).abs() / scale <= 1e-4, "y {y}");
            }
        }
    }

    #[test]
    fn ratio_is_independent_of_normalization() {
        let params = FracParams::new(3, 0.75).unwrap();
        let sol = solve_poisson_mode(2.0, &params, SolveMethod::SemiAnalytic).unwrap();
        let mut scaled = sol.u.clone();
        scaled.u.iter_mut().for_each(|v| *v *= -3.5);
        let (f0, _, g0, _) = split_fg(&scaled, 3.0 - params.s, params.s, &FitOptions::default().with_tolerance(1e-8)).unwrap();
        assert_relative_eq!(g0 / f0, sol.ratio(), max_relative = 1e-12);
    }

    #[test]
    fn flat_q_vanishes() {
        for &g in &[0.3, 0.75, 1.5] {
            assert_eq!(q_curvature_flat(&FracParams::new(4, g).unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn f2_examples() {
        let cases = [(1.5, 1.0, 4), (0.25, 2.0, 2), (1.75, 1.3, 4), (0.6, 0.0, 2)];
        for &(g, lambda, n) in &cases {
            let params = FracParams::new(n, g).unwrap();
            let r = f2_consistency(&params, lambda, SolveMethod::SemiAnalytic, 1e-4).unwrap();
            assert!(r.pass, "{}", r.line());
        }
        let r = f2_consistency(&FracParams::new(2, 0.25).unwrap(), 2.0, SolveMethod::SemiAnalytic, 1e-4).unwrap();
        assert_relative_eq!(r.lhs, 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn route_matches_fourier_oracle() {
        let f = random_field(2, 16, 5, 11).unwrap();
        for &g in &[0.3, 0.75, 1.25] {
            let params = FracParams::new(3, g).unwrap();
            let a = scattering_apply(&f, &params, SolveMethod::SemiAnalytic).unwrap();
            let b = fractional_multiplier_apply(&f, g).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() <= 1e-6 * f.sup_norm());
        }
    }

    #[test]
    fn self_adjoint() {
        let params = FracParams::new(3, 0.75).unwrap();
        let f = random_field(2, 8, 4, 1).unwrap();
        let g = random_field(2, 8, 4, 2).unwrap();
        let pf = scattering_apply(&f, &params, SolveMethod::SemiAnalytic).unwrap();
        let pg = scattering_apply(&g, &params, SolveMethod::SemiAnalytic).unwrap();
        let lhs = pf.pairing(&g).unwrap();
        let rhs = f.pairing(&pg).unwrap();
        assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1.0));
    }
}
