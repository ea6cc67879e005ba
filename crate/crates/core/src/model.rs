//! The homogeneous Poincaré–Einstein example over a Ricci flat fiber.
//!
//! In the chart `16x = r^{2n}` the weighted conformal Laplacian with weight
//! `m0 = 1 - 2γ` becomes the hypergeometric equation with
//! `a = (n-2γ)/(2n)`, `b = 1/2`, `c = (n-γ)/n`. Since `c = a + b`, the point
//! `x = 1` is a logarithmic singularity and the regular solution there is
//! `₂F₁(a, b; 1; 1-x)`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_powers;
use crate::params::FracParams;
use crate::report::VerificationReport;
use crate::special::{gamma_fn, hyp2f1_series};

/// Offset from `x = 1` where the regular branch seeds the integration.
pub const SHOOTING_DELTA: f64 = 1e-6;
/// Matching point of the two Frobenius bases.
pub const MATCH_X: f64 = 0.5;
const RK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub n: u32,
    pub gamma: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub u_r: Vec<f64>,
    pub u_rr: Vec<f64>,
    /// Coefficient of `r^0`, equal to 1 after normalization.
    pub a: f64,
    /// Coefficient of `r^{2γ}`.
    pub b: f64,
}

impl ModelProfile {
    pub fn r_max(n: u32) -> f64 {
        2f64.powf(2.0 / f64::from(n))
    }
}

#[derive(Debug, Clone, Copy)]
struct Hyp {
    a: f64,
    b: f64,
    c: f64,
}

impl Hyp {
    fn new(n: u32, gamma: f64) -> Self {
        let nf = f64::from(n);
        Self { a: (nf - 2.0 * gamma) / (2.0 * nf), b: 0.5, c: (nf - gamma) / nf }
    }

    /// `x(1-x)U'' + (c - (a+b+1)x)U' - abU`.
    fn residual(&self, x: f64, u: (f64, f64, f64)) -> f64 {
        x * (1.0 - x) * u.2 + (self.c - (self.a + self.b + 1.0) * x) * u.1 - self.a * self.b * u.0
    }

    /// Regular branch at `x = 0` and its derivatives.
    fn first(&self, x: f64) -> Result<(f64, f64, f64)> {
        hyp2f1_series(self.a, self.b, self.c, x)
    }

    /// `x^{1-c} ₂F₁(a-c+1, b-c+1; 2-c; x)` and its derivatives.
    fn second(&self, x: f64) -> Result<(f64, f64, f64)> {
        let e = 1.0 - self.c;
        let (g, g1, g2) = hyp2f1_series(self.a - self.c + 1.0, self.b - self.c + 1.0, 2.0 - self.c, x)?;
        let p = x.powf(e);
        Ok((
            p * g,
            p * (e * g / x + g1),
            p * (e * (e - 1.0) * g / (x * x) + 2.0 * e * g1 / x + g2),
        ))
    }

    /// Branch regular at `x = 1`, in the `x` variable.
    fn regular_at_one(&self, x: f64) -> Result<(f64, f64, f64)> {
        let (w, w1, w2) = hyp2f1_series(self.a, self.b, 1.0, 1.0 - x)?;
        Ok((w, -w1, w2))
    }
}

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(t, y)` from `t0` to
/// `t1`, with mixed absolute/relative tolerance `tol`.
pub fn dormand_prince<F>(f: F, t0: f64, t1: f64, y0: [f64; 2], h0: f64, tol: f64) -> Result<[f64; 2]>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    const MAX_STEPS: usize = 1_000_000;

    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = h0.abs() * dir;
    for _ in 0..MAX_STEPS {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0_f64;
        for i in 0..2 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let scale = tol * (1.0 + y[i].abs().max(y5[i].abs()));
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(Error::NonConvergence { what: "Dormand-Prince integration", terms: MAX_STEPS })
}

/// `(α, β)` with `W = α F1 + β F2` at `x = 1/2`, where `W` is the regular
/// branch at `x = 1` integrated from `1 - δ`.
fn match_branches(h: &Hyp) -> Result<(f64, f64)> {
    let (w0, w1, _) = h.regular_at_one(1.0 - SHOOTING_DELTA)?;
    // Integrate in t = 1 - x: t(1-t)W_tt = ((a+b+1)t - 1)W_t + abW.
    let ab = h.a * h.b;
    let apb1 = h.a + h.b + 1.0;
    let rhs = |t: f64, y: &[f64; 2]| [y[1], ((apb1 * t - 1.0) * y[1] + ab * y[0]) / (t * (1.0 - t))];
    let tm = 1.0 - MATCH_X;
    let end = dormand_prince(rhs, SHOOTING_DELTA, tm, [w0, -w1], SHOOTING_DELTA * 1e-2, RK_TOL)?;
    let (w, wx) = (end[0], -end[1]);
    let f1 = h.first(MATCH_X)?;
    let f2 = h.second(MATCH_X)?;
    let det = f1.0 * f2.1 - f1.1 * f2.0;
    let scale = (f1.0 * f2.1).abs().max((f1.1 * f2.0).abs());
    if det.abs() <= 1e-12 * scale {
        return Err(Error::MatchingSingular(det));
    }
    Ok(((w * f2.1 - wx * f2.0) / det, (f1.0 * wx - f1.1 * w) / det))
}

/// `r^{2γ}` coefficient `B` of the normalized solution (`A = 1`).
pub fn model_b_coefficient(n: u32, gamma: f64) -> Result<f64> {
    check_model_range(n, gamma)?;
    let h = Hyp::new(n, gamma);
    let (alpha, beta) = match_branches(&h)?;
    // x^{1-c} = r^{2γ} 16^{-γ/n}
    Ok(beta / alpha * 16f64.powf(-gamma / f64::from(n)))
}

fn check_model_range(n: u32, gamma: f64) -> Result<()> {
    let nf = f64::from(n);
    if n < 2 || !(gamma > 0.0 && gamma < nf) {
        return Err(Error::InvalidParameter(format!("model needs n >= 2 and 0 < gamma < n, got n={n} gamma={gamma}")));
    }
    if (gamma - gamma.round()).abs() < 1e-9 {
        return Err(Error::IntegerGamma(gamma));
    }
    Ok(())
}

/// `U(r)` with `U(0) = 1`, regular at `r = r_max`, sampled at `points`
/// interior nodes of `(0, r_max)`.
pub fn solve_model_profile(n: u32, gamma: f64, points: usize) -> Result<ModelProfile> {
    check_model_range(n, gamma)?;
    let h = Hyp::new(n, gamma);
    let (alpha, beta) = match_branches(&h)?;
    let beta = beta / alpha;
    let nf = f64::from(n);
    let r_max = ModelProfile::r_max(n);
    let mut prof = ModelProfile {
        n,
        gamma,
        r: Vec::with_capacity(points),
        u: Vec::with_capacity(points),
        u_r: Vec::with_capacity(points),
        u_rr: Vec::with_capacity(points),
        a: 1.0,
        b: beta * 16f64.powf(-gamma / nf),
    };
    for j in 1..=points {
        let r = r_max * j as f64 / (points + 1) as f64;
        let x = r.powf(2.0 * nf) / 16.0;
        let (u, ux, uxx) = if x <= MATCH_X {
            let f1 = h.first(x)?;
            let f2 = h.second(x)?;
            (f1.0 + beta * f2.0, f1.1 + beta * f2.1, f1.2 + beta * f2.2)
        } else {
            let w = h.regular_at_one(x)?;
            (w.0 / alpha, w.1 / alpha, w.2 / alpha)
        };
        // dx/dr = 2n x / r
        let dx = 2.0 * nf * x / r;
        prof.r.push(r);
        prof.u.push(u);
        prof.u_r.push(ux * dx);
        prof.u_rr.push(uxx * dx * dx + ux * 2.0 * nf * (2.0 * nf - 1.0) * x / (r * r));
    }
    if prof.u.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter(format!("model solution is not positive for n={n} gamma={gamma}")));
    }
    Ok(prof)
}

/// The radial weighted conformal Laplacian
/// `-U_rr - (16m0 - (m0+2n) r^{2n}) / (r(16 - r^{2n})) U_r + n(m0+n-1) r^{2n-2} / (16 - r^{2n}) U`.
pub fn model_operator(n: u32, gamma: f64, r: f64, u: f64, u_r: f64, u_rr: f64) -> f64 {
    let nf = f64::from(n);
    let m0 = 1.0 - 2.0 * gamma;
    let r2n = r.powf(2.0 * nf);
    -u_rr - (16.0 * m0 - (m0 + 2.0 * nf) * r2n) / (r * (16.0 - r2n)) * u_r
        + nf * (m0 + nf - 1.0) * r.powf(2.0 * nf - 2.0) / (16.0 - r2n) * u
}

/// Operator values over the profile, each divided by the size of its
/// largest term so that the result is a relative residual.
pub fn model_operator_residual(p: &ModelProfile) -> Vec<f64> {
    let nf = f64::from(p.n);
    let m0 = 1.0 - 2.0 * p.gamma;
    (0..p.r.len())
        .map(|i| {
            let (r, u, ur, urr) = (p.r[i], p.u[i], p.u_r[i], p.u_rr[i]);
            let r2n = r.powf(2.0 * nf);
            let terms = [
                urr.abs(),
                ((16.0 * m0 - (m0 + 2.0 * nf) * r2n) / (r * (16.0 - r2n)) * ur).abs(),
                (nf * (m0 + nf - 1.0) * r.powf(2.0 * nf - 2.0) / (16.0 - r2n) * u).abs(),
            ];
            let scale = terms.iter().cloned().fold(1e-300, f64::max);
            model_operator(p.n, p.gamma, r, u, ur, urr) / scale
        })
        .collect()
}

/// Residual of the hypergeometric form at `x`, for the normalized solution.
pub fn hypergeometric_residual(n: u32, gamma: f64, x: f64) -> Result<f64> {
    let h = Hyp::new(n, gamma);
    let b = model_b_coefficient(n, gamma)? * 16f64.powf(gamma / f64::from(n));
    let f1 = h.first(x)?;
    let f2 = h.second(x)?;
    Ok(h.residual(x, (f1.0 + b * f2.0, f1.1 + b * f2.1, f1.2 + b * f2.2)))
}

/// Closed-form fractional Q-curvature of the Ricci flat boundary metric.
pub fn q2gamma_closed(n: u32, gamma: f64) -> Result<f64> {
    let nf = f64::from(n);
    if !(gamma > 0.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need gamma > 0 and n > 0, got {gamma}, {n}")));
    }
    let num = gamma_fn(gamma)? * gamma_fn(-gamma / nf)? * gamma_fn((nf + 2.0 * gamma) / (2.0 * nf))?;
    let den = nf * gamma_fn(-gamma)? * gamma_fn(gamma / nf)? * gamma_fn((3.0 * nf - 2.0 * gamma) / (2.0 * nf))?;
    Ok(2f64.powf(2.0 * (nf - 2.0) * gamma / nf) * num / den)
}

/// `Q_{2γ} = (2/(n-2γ)) d_γ B` from the matched hypergeometric solution.
///
/// Takes the parameter bundle so that its `d_gamma` is the one used.
pub fn q2gamma_numeric(params: &FracParams) -> Result<f64> {
    let nf = f64::from(params.n);
    let b = model_b_coefficient(params.n, params.gamma)?;
    Ok(2.0 / (nf - 2.0 * params.gamma) * params.d_gamma * b)
}

/// The adapted defining function `y = r U^{2/(n-2γ)}` with its derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedFunction {
    pub r: Vec<f64>,
    pub y: Vec<f64>,
    pub y_r: Vec<f64>,
    /// Fitted `r^{1+2γ}` coefficient of `y`.
    pub coefficient: f64,
    /// Fitted `r^1` coefficient of `y`.
    pub leading: f64,
}

fn check_adapted(params: &FracParams) -> Result<()> {
    if !(params.gamma < f64::from(params.n) / 2.0) {
        return Err(Error::InvalidParameter("adapted function needs gamma < n/2".into()));
    }
    Ok(())
}

/// Builds `y` and fits `y/r ≈ Σ c_{ij} r^{2γi + 2nj}` on small `r`.
pub fn adapted_function(params: &FracParams, points: usize) -> Result<AdaptedFunction> {
    check_adapted(params)?;
    let (n, g) = (params.n, params.gamma);
    let nf = f64::from(n);
    let p = 2.0 / (nf - 2.0 * g);
    let prof = solve_model_profile(n, g, points)?;
    let y: Vec<f64> = prof.r.iter().zip(&prof.u).map(|(r, u)| r * u.powf(p)).collect();
    let y_r: Vec<f64> = (0..prof.r.len())
        .map(|i| y[i] / prof.r[i] * (1.0 + p * prof.r[i] * prof.u_r[i] / prof.u[i]))
        .collect();

    let r_max = ModelProfile::r_max(n);
    let mut powers = vec![0.0];
    for i in 0..=6 {
        for j in 0..=3 {
            let e = 2.0 * g * f64::from(i) + 2.0 * nf * f64::from(j);
            if e > 0.0 && e < 14.0 && powers.iter().all(|q: &f64| (q - e).abs() > 1e-3) {
                powers.push(e);
            }
        }
    }
    powers.sort_by(f64::total_cmp);
    let (rs, vs): (Vec<f64>, Vec<f64>) = prof
        .r
        .iter()
        .zip(&y)
        .filter(|(r, _)| **r <= 0.5 * r_max)
        .map(|(r, yv)| (*r, yv / r))
        .unzip();
    let (c, _) = fit_powers(&rs, &vs, &powers)?;
    let idx = powers.iter().position(|e| (e - 2.0 * g).abs() < 1e-12).expect("2γ is in the basis");
    Ok(AdaptedFunction { r: prof.r, y, y_r, coefficient: c[idx], leading: c[0] })
}

/// Radial scalar data of the adapted metric `y² g_+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedCurvature {
    pub r: Vec<f64>,
    /// `y^{-2} - |d y^{-1}|²_{g_+}`.
    pub w: Vec<f64>,
    /// `R = n(2s - n - 1) W`.
    pub scalar: Vec<f64>,
    /// `J = (2γ-1)/2 · W`.
    pub j: Vec<f64>,
}

impl AdaptedCurvature {
    pub fn min_scalar(&self) -> f64 {
        self.scalar.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest relative deviation of `R` from `2nJ`.
    pub fn trace_defect(&self, n: u32) -> f64 {
        self.scalar
            .iter()
            .zip(&self.j)
            .map(|(r, j)| (r - 2.0 * f64::from(n) * j).abs() / r.abs().max(1e-300))
            .fold(0.0, f64::max)
    }
}

/// `W = -y^{-2} ε(2+ε)` with `ε = (2/(n-2γ)) r U_r / U`, using
/// `|d y^{-1}|²_{g_+} = r² (∂_r y^{-1})²` on the model chart.
pub fn adapted_scalar_curvature(params: &FracParams, points: usize) -> Result<AdaptedCurvature> {
    check_adapted(params)?;
    let (n, g) = (params.n, params.gamma);
    let nf = f64::from(n);
    let p = 2.0 / (nf - 2.0 * g);
    let prof = solve_model_profile(n, g, points)?;
    let mut out = AdaptedCurvature { r: prof.r.clone(), w: vec![], scalar: vec![], j: vec![] };
    for i in 0..prof.r.len() {
        let r = prof.r[i];
        let y = r * prof.u[i].powf(p);
        let eps = p * r * prof.u_r[i] / prof.u[i];
        let w = -eps * (2.0 + eps) / (y * y);
        out.w.push(w);
        out.scalar.push(nf * (2.0 * params.s - nf - 1.0) * w);
        out.j.push((2.0 * g - 1.0) / 2.0 * w);
    }
    Ok(out)
}

/// Closed form against the matched ODE solution.
pub fn check_model_q(params: &FracParams, tolerance: f64) -> Result<VerificationReport> {
    let start = Instant::now();
    let closed = q2gamma_closed(params.n, params.gamma)?;
    let numeric = q2gamma_numeric(params)?;
    Ok(VerificationReport::compare(format!("model-q n={} gamma={}", params.n, params.gamma), closed, numeric, tolerance)
        .with_runtime(start.elapsed().as_secs_f64()))
}
