//! Weighted extension problems for a single Fourier mode on the flat
//! half-space, and extraction of the boundary operator at every order.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_expansion, ExpansionFit, FitOptions};
use crate::mesh::{default_extent, graded_mesh, mode_mesh, power_moment, DEFAULT_GRADING, DEFAULT_POINTS};
use crate::params::FracParams;
use crate::profile::{fornberg, BesselForm, ModeProfile};
use crate::report::VerificationReport;
use crate::special::{gamma_fn, k_profile_normalization};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    SemiAnalytic,
    FiniteDifference,
}

/// Condition imposed at the truncation point `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FarBoundary {
    /// `u'(Y) = -λ u(Y)`.
    #[default]
    Robin,
    /// `u(Y) = 0`.
    Dirichlet,
}

/// Residual tolerance used when fitting finite-difference samples.
pub const FD_FIT_TOLERANCE: f64 = 1e-5;

/// Fit options appropriate to a solve method.
pub fn fit_options(method: SolveMethod) -> FitOptions {
    match method {
        SolveMethod::SemiAnalytic => FitOptions::default(),
        SolveMethod::FiniteDifference => FitOptions::default().with_tolerance(FD_FIT_TOLERANCE),
    }
}

/// Decaying solution of `u'' + (m/y) u' - λ² u = 0` with `u(0+) = 1`.
///
/// Any `m < 1` is accepted: the order-`2γ` extension uses `m = 1 - 2γ`,
/// which is below `-1` once `γ > 1`.
pub fn solve_mode_extension(lambda: f64, m: f64, mesh: &[f64], method: SolveMethod) -> Result<ModeProfile> {
    solve_mode_extension_with(lambda, m, mesh, method, FarBoundary::Robin)
}

pub fn solve_mode_extension_with(
    lambda: f64,
    m: f64,
    mesh: &[f64],
    method: SolveMethod,
    far: FarBoundary,
) -> Result<ModeProfile> {
    if !(lambda >= 0.0) || !(m < 1.0) {
        return Err(Error::InvalidParameter(format!("need lambda >= 0 and m < 1 (got {lambda}, {m})")));
    }
    if mesh.len() < 5 || mesh[0] <= 0.0 || mesh.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("mesh must be positive and strictly increasing".into()));
    }
    if lambda == 0.0 {
        return Ok(ModeProfile::constant(m, mesh.to_vec()));
    }
    match method {
        SolveMethod::SemiAnalytic => {
            let nu = (1.0 - m) / 2.0;
            let form = BesselForm { coeff: k_profile_normalization(nu)?, nu };
            ModeProfile::from_bessel(lambda, form, mesh.to_vec())
        }
        SolveMethod::FiniteDifference => solve_fd(lambda, m, mesh, far),
    }
}

/// `b^q - a^q` without cancellation for `0 ≤ a < b`.
fn power_diff(a: f64, b: f64, q: f64) -> f64 {
    if a > 0.0 {
        a.powf(q) * (q * (b / a).ln()).exp_m1()
    } else {
        b.powf(q)
    }
}

/// Face weights of the conservative flux `y^m u'`, exact on `{1, y^{1-m}}`.
fn face_weights(nodes: &[f64], m: f64) -> Vec<f64> {
    let q = 1.0 - m;
    nodes.windows(2).map(|w| q / power_diff(w[0], w[1], q)).collect()
}

fn solve_fd(lambda: f64, m: f64, mesh: &[f64], far: FarBoundary) -> Result<ModeProfile> {
    let n = mesh.len();
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(0.0);
    nodes.extend_from_slice(mesh);
    let wf = face_weights(&nodes, m);
    let l2 = lambda * lambda;
    // Unknowns u_1..u_N, stored at index i-1.
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..=n {
        let left = 0.5 * (nodes[i - 1] + nodes[i]);
        let r = i - 1;
        if i < n {
            let right = 0.5 * (nodes[i] + nodes[i + 1]);
            let cell = power_moment(left, right, m);
            sub[r] = -wf[i - 1];
            sup[r] = -wf[i];
            diag[r] = wf[i - 1] + wf[i] + l2 * cell;
        } else {
            match far {
                FarBoundary::Robin => {
                    let cell = power_moment(left, nodes[n], m);
                    sub[r] = -wf[n - 1];
                    diag[r] = wf[n - 1] + lambda * nodes[n].powf(m) + l2 * cell;
                }
                FarBoundary::Dirichlet => {
                    sub[r] = 0.0;
                    diag[r] = 1.0;
                }
            }
        }
    }
    // Dirichlet data u_0 = 1 moves to the first row.
    rhs[0] = wf[0];
    sub[0] = 0.0;
    let u = thomas(&sub, &diag, &sup, &rhs)?;
    Ok(ModeProfile { lambda, m, y: mesh.to_vec(), u, boundary_value: Some(1.0), analytic: None })
}

/// Tridiagonal solve; `sub[0]` and `sup[n-1]` are ignored.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::LinearSolve("zero pivot at row 0".into()));
    }
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::LinearSolve(format!("bad pivot at row {i}")));
        }
        c[i] = if i + 1 < n { sup[i] / beta } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Frobenius fit `u ≈ a + c2 y² + b y^{1-m}` of a profile.
pub fn expansion(p: &ModeProfile, opts: &FitOptions) -> Result<ExpansionFit> {
    fit_expansion(&p.y, &p.u, p.lambda, 1.0 - p.m, opts)
}

/// `lim_{y→0} y^m ∂_y u` via the fitted coefficient of `y^{1-m}`.
pub fn extract_weighted_neumann(p: &ModeProfile, opts: &FitOptions) -> Result<f64> {
    if p.lambda == 0.0 {
        let spread = p.u.iter().fold(0.0_f64, |acc, v| acc.max((v - p.u[0]).abs()));
        if spread == 0.0 {
            return Ok(0.0);
        }
    }
    Ok(expansion(p, opts)?.weighted_limit())
}

/// Values of `u'' + (m_op/y) u' - λ² u` as a profile.
///
/// The result solves the mode equation with weight `p.m + 2`. Sampled
/// profiles lose two nodes at each end to the 5-point stencils.
pub fn apply_weighted_operator(p: &ModeProfile, m_op: f64) -> Result<ModeProfile> {
    let l2 = p.lambda * p.lambda;
    if let Some(form) = p.analytic {
        // (m_op - m) u'/y with u' = -λ c z^ν K_{ν-1}
        let next = BesselForm { coeff: -(m_op - p.m) * l2 * form.coeff, nu: form.nu - 1.0 };
        return ModeProfile::from_bessel(p.lambda, next, p.y.clone());
    }
    let n = p.len();
    if n < 7 {
        return Err(Error::InvalidParameter("operator needs at least 7 samples".into()));
    }
    let mut y = Vec::with_capacity(n - 4);
    let mut v = Vec::with_capacity(n - 4);
    for i in 2..n - 2 {
        let w = fornberg(p.y[i], &p.y[i - 2..=i + 2], 2);
        let (mut d1, mut d2) = (0.0, 0.0);
        for k in 0..5 {
            let du = p.u[i - 2 + k] - p.u[i];
            d1 += w[1][k] * du;
            d2 += w[2][k] * du;
        }
        y.push(p.y[i]);
        v.push(d2 + m_op / p.y[i] * d1 - l2 * p.u[i]);
    }
    Ok(ModeProfile { lambda: p.lambda, m: p.m + 2.0, y, u: v, boundary_value: None, analytic: None })
}

/// `u'' + (m_op/y) u' - λ² u` evaluated through the equation the profile
/// already solves, which leaves `(m_op - m) u'/y` and needs one derivative.
pub fn apply_weighted_operator_reduced(p: &ModeProfile, m_op: f64) -> Result<ModeProfile> {
    let mut out = apply_inverse_y_derivative(p)?;
    let scale = m_op - p.m;
    if let Some(f) = out.analytic.as_mut() {
        f.coeff *= scale;
    }
    out.u.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// `y^{-1} ∂_y u` as a profile (weight shifts by 2 as for the operator).
pub fn apply_inverse_y_derivative(p: &ModeProfile) -> Result<ModeProfile> {
    if let Some(form) = p.analytic {
        let next = BesselForm { coeff: -p.lambda * p.lambda * form.coeff, nu: form.nu - 1.0 };
        return ModeProfile::from_bessel(p.lambda, next, p.y.clone());
    }
    let du = p.derivative()?;
    let n = p.len();
    let y = p.y[2..n - 2].to_vec();
    let u = (2..n - 2).map(|i| du[i] / p.y[i]).collect();
    Ok(ModeProfile { lambda: p.lambda, m: p.m + 2.0, y, u, boundary_value: None, analytic: None })
}

/// Weights of the factors of `L_{2k}` with weight `m_k`, innermost first.
pub fn factor_weights(params: &FracParams) -> Vec<f64> {
    let k = params.k;
    (1..=k).map(|j| params.m_k - 2.0 * f64::from(k) + 4.0 * f64::from(j) - 2.0).collect()
}

/// `L_{2k} u` through its second-order factors, innermost first.
///
/// Each factor is `L_2^w = -(∂² + (w/y)∂ - λ²)` on the flat model and is
/// evaluated by [`apply_weighted_operator_reduced`], which relies on every
/// intermediate profile solving its own mode equation.
pub fn apply_gjms(p: &ModeProfile, params: &FracParams) -> Result<ModeProfile> {
    compose_factors(p, params, apply_weighted_operator_reduced)
}

/// As [`apply_gjms`], but with the explicit second-derivative operator.
pub fn apply_gjms_direct(p: &ModeProfile, params: &FracParams) -> Result<ModeProfile> {
    compose_factors(p, params, apply_weighted_operator)
}

fn compose_factors(
    p: &ModeProfile,
    params: &FracParams,
    op: fn(&ModeProfile, f64) -> Result<ModeProfile>,
) -> Result<ModeProfile> {
    let mut cur = p.clone();
    for w in factor_weights(params) {
        cur = op(&cur, w)?;
        cur.u.iter_mut().for_each(|v| *v = -*v);
        if let Some(f) = cur.analytic.as_mut() {
            f.coeff = -f.coeff;
        }
    }
    Ok(cur)
}

/// `Γ(γ-k)/Γ(γ+1) · (-1)^k d_γ / (2^{2k+1} k!)`.
pub fn order_k_constant(params: &FracParams) -> Result<f64> {
    let k = params.k;
    let g = params.gamma;
    let kf = f64::from(k);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let fact = gamma_fn(kf + 1.0)?;
    Ok(gamma_fn(g - kf)? / gamma_fn(g + 1.0)? * sign * params.d_gamma / (2f64.powf(2.0 * kf + 1.0) * fact))
}

/// Boundary multiplier carried by an order-`2γ` extension profile.
pub fn extract_order_k(p: &ModeProfile, params: &FracParams, opts: &FitOptions) -> Result<f64> {
    if p.lambda == 0.0 {
        return Ok(0.0);
    }
    if (p.m - params.m0()).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "profile weight {} is not the order-2γ weight {}",
            p.m,
            params.m0()
        )));
    }
    let top = apply_gjms(p, params)?;
    let fit = fit_expansion(&top.y, &top.u, top.lambda, 1.0 - params.m_k, opts)?;
    Ok(order_k_constant(params)? * fit.weighted_limit())
}

/// Fit window for profiles obtained by numerically differentiating samples.
///
/// Stencil error is relative to `h/y`, which is large near `y = 0` on an
/// algebraically graded mesh, so the window sits further out and carries
/// more terms.
pub fn sampled_fit_options() -> FitOptions {
    FitOptions { z_min: 0.2, z_max: 4.0, terms: 14, residual_tol: 1e-4 }
}

/// Extension-route value of the boundary multiplier at frequency `lambda`.
///
/// For `k ≥ 1` the finite-difference value is Richardson-extrapolated from
/// `N` and `2N` points: the small `y^{2γ}` coefficient sits below the `O(h²)`
/// error of a single solve once `γ > 1`.
pub fn extension_multiplier(lambda: f64, params: &FracParams, method: SolveMethod) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    match method {
        SolveMethod::SemiAnalytic => {
            let p = solve_mode_extension(lambda, params.m0(), &mode_mesh(lambda), method)?;
            extract_order_k(&p, params, &FitOptions::default())
        }
        SolveMethod::FiniteDifference if params.k == 0 => {
            let p = solve_mode_extension(lambda, params.m0(), &mode_mesh(lambda), method)?;
            extract_order_k(&p, params, &fit_options(method))
        }
        SolveMethod::FiniteDifference => {
            let y_max = default_extent(lambda);
            let at = |n: usize| -> Result<f64> {
                let mesh = graded_mesh(y_max, n, DEFAULT_GRADING)?;
                let p = solve_mode_extension(lambda, params.m0(), &mesh, method)?;
                extract_order_k(&p, params, &sampled_fit_options())
            };
            let coarse = at(DEFAULT_POINTS)?;
            let fine = at(2 * DEFAULT_POINTS)?;
            Ok((4.0 * fine - coarse) / 3.0)
        }
    }
}

/// Extension route applied to a whole field, one solve per distinct `|ξ|`.
pub fn extension_apply(f: &SpectralField, params: &FracParams, method: SolveMethod) -> Result<SpectralField> {
    f.map_radial(|xi| extension_multiplier(xi, params, method))
}

/// Compares the `y^{2γ-2k}` coefficients of `L_{2k} u` and of
/// `(-2)^k k! (y^{-1}∂_y)^k u`.
pub fn check_induction(p: &ModeProfile, params: &FracParams, k: u32, tolerance: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    let sub = FracParams { k, m_k: 2.0 * f64::from(k) + 1.0 - 2.0 * params.gamma, ..*params };
    let e = 2.0 * params.gamma - 2.0 * f64::from(k);
    let opts = if p.analytic.is_some() { FitOptions::default() } else { sampled_fit_options() };
    let lhs_profile = apply_gjms_direct(p, &sub)?;
    let mut rhs_profile = p.clone();
    for _ in 0..k {
        rhs_profile = apply_inverse_y_derivative(&rhs_profile)?;
    }
    let lhs = fit_expansion(&lhs_profile.y, &lhs_profile.u, p.lambda, e, &opts)?.b;
    let factor = (-2f64).powi(k as i32) * gamma_fn(f64::from(k) + 1.0)?;
    let rhs = factor * fit_expansion(&rhs_profile.y, &rhs_profile.u, p.lambda, e, &opts)?.b;
    let report = VerificationReport::compare(format!("induction-ratio k={k} gamma={}", params.gamma), lhs, rhs, tolerance);
    let ratio = lhs / rhs;
    Ok(report.with_runtime(start.elapsed().as_secs_f64()).with_detail(format!("ratio={ratio:.12}")))
}

/// Discrete residual of the mode equation at interior nodes (zeros at the
/// dropped ends), for export.
pub fn mode_residual(p: &ModeProfile) -> Result<Vec<f64>> {
    let sampled = p.clone().sampled();
    let r = apply_weighted_operator(&sampled, p.m)?;
    let mut out = vec![0.0; p.len()];
    out[2..p.len() - 2].copy_from_slice(&r.u);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sup_rel(a: &ModeProfile, b: &ModeProfile, y_hi: f64) -> f64 {
        a.y.iter()
            .zip(a.u.iter().zip(&b.u))
            .filter(|(y, _)| **y <= y_hi)
            .map(|(_, (x, z))| (x - z).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn half_order_is_exponential_both_ways() {
        let mesh = mode_mesh(1.0);
        for method in [SolveMethod::SemiAnalytic, SolveMethod::FiniteDifference] {
            let p = solve_mode_extension(1.0, 0.0, &mesh, method).unwrap();
            for (y, u) in p.y.iter().zip(&p.u).step_by(50) {
                assert!((u - (-y).exp()).abs() < 1e-5, "{method:?} y={y} u={u}");
            }
        }
    }

    #[test]
    fn constant_mode() {
        let mesh = mode_mesh(0.0);
        let p = solve_mode_extension(0.0, 0.3, &mesh, SolveMethod::FiniteDifference).unwrap();
        assert!(p.u.iter().all(|&u| u == 1.0));
        assert_eq!(extract_weighted_neumann(&p, &FitOptions::default()).unwrap(), 0.0);
        let applied = apply_weighted_operator(&p, 0.3).unwrap();
        assert!(applied.u.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn methods_agree_on_mesh() {
        for &(lambda, m) in &[(1.0, 0.4), (3.0, -0.5), (0.5, -2.0)] {
            let mesh = mode_mesh(lambda);
            let a = solve_mode_extension(lambda, m, &mesh, SolveMethod::SemiAnalytic).unwrap();
            let f = solve_mode_extension(lambda, m, &mesh, SolveMethod::FiniteDifference).unwrap();
            let err = sup_rel(&a, &f, a.y_max() / 2.0);
            assert!(err <= 1e-6, "lambda {lambda} m {m} err {err:e}");
            assert!(f.u.last().unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn fd_converges_under_refinement() {
        let err = |n: usize| {
            let mesh = crate::mesh::graded_mesh(40.0, n, 2.0).unwrap();
            let a = solve_mode_extension(1.0, 0.2, &mesh, SolveMethod::SemiAnalytic).unwrap();
            let f = solve_mode_extension(1.0, 0.2, &mesh, SolveMethod::FiniteDifference).unwrap();
            sup_rel(&a, &f, 20.0)
        };
        let (e1, e2) = (err(1024), err(2048));
        assert!(e1 / e2 >= 3.0, "{e1:e} {e2:e}");
    }

    #[test]
    fn weighted_neumann_of_exponential() {
        let mesh = mode_mesh(1.0);
        let p = solve_mode_extension(1.0, 0.0, &mesh, SolveMethod::SemiAnalytic).unwrap();
        assert_relative_eq!(extract_weighted_neumann(&p, &FitOptions::default()).unwrap(), -1.0, max_relative = 1e-9);
    }

    #[test]
    fn weighted_operator_on_closed_form() {
        let mesh = mode_mesh(1.0);
        let p = solve_mode_extension(1.0, -2.0, &mesh, SolveMethod::SemiAnalytic).unwrap();
        for prof in [p.clone(), p.sampled()] {
            let r = apply_weighted_operator(&prof, 0.0).unwrap();
            for (y, v) in r.y.iter().zip(&r.u).skip(100).step_by(100) {
                assert!((v + 2.0 * (-y).exp()).abs() < 1e-7, "y {y} v {v}");
            }
        }
        let e = solve_mode_extension(1.0, 0.0, &mesh, SolveMethod::SemiAnalytic).unwrap();
        let r = apply_weighted_operator(&e, 0.0).unwrap();
        assert!(r.u.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn fourth_order_chain() {
        let params = FracParams::new(4, 1.5).unwrap();
        assert_eq!(factor_weights(&params), vec![0.0]);
        assert_relative_eq!(order_k_constant(&params).unwrap(), -0.5, max_relative = 1e-14);
        for method in [SolveMethod::SemiAnalytic, SolveMethod::FiniteDifference] {
            let v = extension_multiplier(1.0, &params, method).unwrap();
            assert_relative_eq!(v, 1.0, max_relative = 1e-3);
        }
    }

    #[test]
    fn oracle_equivalence_grid() {
        for &g in &[0.3, 0.5, 0.75, 1.25, 1.5, 1.75, 2.5] {
            let params = FracParams::new(6, g).unwrap();
            for &lambda in &[1.0, 2.0, std::f64::consts::SQRT_2] {
                let exact = lambda.powf(2.0 * g);
                let sa = extension_multiplier(lambda, &params, SolveMethod::SemiAnalytic).unwrap();
                let fd = extension_multiplier(lambda, &params, SolveMethod::FiniteDifference).unwrap();
                assert!((sa / exact - 1.0).abs() <= 1e-6, "SA gamma {g} lambda {lambda}: {sa} vs {exact}");
                assert!((fd / exact - 1.0).abs() <= 1e-3, "FD gamma {g} lambda {lambda}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn f2_coefficient_from_fit() {
        let mesh = mode_mesh(1.0);
        let p = solve_mode_extension(1.0, -2.0, &mesh, SolveMethod::SemiAnalytic).unwrap();
        let fit = expansion(&p, &FitOptions::default()).unwrap();
        assert_relative_eq!(fit.a, 1.0, max_relative = 1e-9);
        assert_relative_eq!(fit.c2, -0.5, max_relative = 1e-6);
    }

    #[test]
    fn induction_ratios() {
        let cases = [(0.75, 1), (1.5, 1), (2.5, 2), (2.5, 1)];
        for &(g, k) in &cases {
            let params = FracParams::unchecked_range(6, g).unwrap();
            let mesh = mode_mesh(1.0);
            let p = solve_mode_extension(1.0, params.m0(), &mesh, SolveMethod::SemiAnalytic).unwrap();
            let r = check_induction(&p, &params, k, 1e-4).unwrap();
            assert!(r.pass, "{}", r.line());
            if k == 1 {
                // two stacked second differences amplify rounding beyond the fit tolerance
                let r = check_induction(&p.sampled(), &params, k, 1e-3).unwrap();
                assert!(r.pass, "sampled {}", r.line());
            }
        }
    }
}
