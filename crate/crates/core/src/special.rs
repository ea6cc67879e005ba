//! Scalar special functions: Γ, ψ, the scattering constant `d_γ`, exact
//! Pochhammer symbols, the Gauss hypergeometric function and the modified
//! Bessel function of the second kind.

use std::f64::consts::{LN_2, PI};

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::profile::{BesselForm, ModeProfile};

/// Distance from a pole below which Γ and ψ refuse to evaluate.
pub const POLE_TOL: f64 = 1e-9;

/// Term cap for the hypergeometric series.
pub const HYP2F1_MAX_TERMS: usize = 100_000;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn check_pole(x: f64) -> Result<()> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() <= POLE_TOL {
        return Err(Error::PoleProximity { x, pole: r, tol: POLE_TOL });
    }
    Ok(())
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Γ(x) for real `x` away from the nonpositive integers.
///
/// Positive arguments go through [`ln_gamma`]; negative ones through the
/// reflection formula `Γ(x) Γ(1-x) = π / sin(πx)`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    check_pole(x)?;
    if x >= 0.5 {
        if x == x.round() && x <= 171.0 {
            // exact factorials
            let mut acc = 1.0;
            let mut i = 2.0;
            while i < x {
                acc *= i;
                i += 1.0;
            }
            return Ok(acc);
        }
        Ok(ln_gamma(x).exp())
    } else {
        Ok(PI / ((PI * x).sin() * gamma_fn(1.0 - x)?))
    }
}

/// Digamma ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    check_pole(x)?;
    if x < 0.5 {
        return Ok(digamma(1.0 - x)? - PI / (PI * x).tan());
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let tail = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    Ok(acc + x.ln() - 0.5 / x - tail)
}

/// The scattering normalization `d_γ = 2^{2γ} Γ(γ) / Γ(-γ)`.
pub fn d_gamma(gamma: f64) -> Result<f64> {
    if (gamma - gamma.round()).abs() <= POLE_TOL {
        return Err(Error::IntegerGamma(gamma));
    }
    Ok((2.0 * gamma * LN_2).exp() * gamma_fn(gamma)? / gamma_fn(-gamma)?)
}

/// Exact rising factorial `(a)_k = a (a+1) ... (a+k-1) = Γ(a+k)/Γ(a)`.
pub fn pochhammer(a: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut factor = a.clone();
    for _ in 0..k {
        acc *= &factor;
        factor += BigRational::one();
    }
    acc
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gauss hypergeometric `₂F₁(a, b; c; x)` for `x ∈ [0, 1)`.
///
/// The power series is used up to `x = 1/2`. Beyond that the logarithmic
/// connection formula handles `c = a + b`, the standard `1 - x`
/// transformation handles non-integer `c - a - b`, and any remaining case is
/// refused with [`Error::NeedsOdeRoute`].
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::InvalidParameter(format!("c = {c} is a nonpositive integer")));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("x = {x} outside [0, 1)")));
    }
    if x <= 0.5 || is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return hyp2f1_series(a, b, c, x).map(|(f, _, _)| f);
    }
    let excess = c - a - b;
    if excess.abs() < 1e-12 {
        return hyp2f1_log_case(a, b, x).map(|(f, _, _)| f);
    }
    if (excess - excess.round()).abs() > 1e-6 {
        let t = 1.0 - x;
        let g1 = gamma_fn(c)? * gamma_fn(excess)? / (gamma_fn(c - a)? * gamma_fn(c - b)?);
        let g2 = gamma_fn(c)? * gamma_fn(-excess)? / (gamma_fn(a)? * gamma_fn(b)?);
        let f1 = hyp2f1_series(a, b, 1.0 - excess, t)?.0;
        let f2 = hyp2f1_series(c - a, c - b, 1.0 + excess, t)?.0;
        return Ok(g1 * f1 + t.powf(excess) * g2 * f2);
    }
    Err(Error::NeedsOdeRoute(x))
}

/// Power series of `₂F₁` with its first two derivatives in `x`.
///
/// Valid for `|x| < 1`; intended for `|x| ≤ 1/2` where convergence is fast.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, x: f64) -> Result<(f64, f64, f64)> {
    if is_nonpositive_integer(c) {
        return Err(Error::InvalidParameter(format!("c = {c} is a nonpositive integer")));
    }
    if x.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!("|x| = {} >= 1", x.abs())));
    }
    // coef_n = (a)_n (b)_n / ((c)_n n!)
    let mut coef = 1.0;
    let mut f = 0.0;
    let mut df = 0.0;
    let mut d2f = 0.0;
    let mut xn = 1.0; // x^n
    let mut xn1 = 0.0; // x^(n-1)
    let mut xn2 = 0.0; // x^(n-2)
    for n in 0..HYP2F1_MAX_TERMS {
        let nf = n as f64;
        let term = coef * xn;
        f += term;
        df += coef * nf * xn1;
        d2f += coef * nf * (nf - 1.0) * xn2;
        if coef == 0.0 {
            return Ok((f, df, d2f));
        }
        let small = |t: f64, s: f64| t.abs() <= 1e-17 * s.abs().max(1e-300);
        if n > 2 && small(term, f) && small(coef * nf * xn1, df) && small(coef * nf * nf * xn2, d2f) {
            return Ok((f, df, d2f));
        }
        coef *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0));
        xn2 = xn1;
        xn1 = xn;
        xn *= x;
        if n == 0 {
            xn1 = 1.0;
            xn2 = 0.0;
        } else if n == 1 {
            xn2 = 1.0;
        }
    }
    Err(Error::NonConvergence { what: "hypergeometric series", terms: HYP2F1_MAX_TERMS })
}

/// `₂F₁(a, b; a + b; x)` and its first two `x`-derivatives through the
/// logarithmic expansion about `x = 1`.
pub fn hyp2f1_log_case(a: f64, b: f64, x: f64) -> Result<(f64, f64, f64)> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!("x = {x} outside (0, 1)")));
    }
    let t = 1.0 - x;
    let ln_t = t.ln();
    let prefactor = gamma_fn(a + b)? / (gamma_fn(a)? * gamma_fn(b)?);
    let mut w = 1.0; // (a)_n (b)_n / (n!)^2
    let mut psi1 = -EULER_GAMMA; // ψ(n+1)
    let mut psia = digamma(a)?;
    let mut psib = digamma(b)?;
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    let mut tn = 1.0; // t^n
    for n in 0..HYP2F1_MAX_TERMS {
        let nf = n as f64;
        let cn = 2.0 * psi1 - psia - psib - ln_t;
        let v0 = w * cn * tn;
        // d/dt and d²/dt² of (C_n - ln t) t^n
        let v1 = w * (nf * cn - 1.0) * tn / t;
        let v2 = w * (nf * (nf - 1.0) * cn - (2.0 * nf - 1.0)) * tn / (t * t);
        s0 += v0;
        s1 += v1;
        s2 += v2;
        if n > 2 && v0.abs() <= 1e-17 * s0.abs() && v1.abs() <= 1e-17 * s1.abs() && v2.abs() <= 1e-17 * s2.abs()
        {
            return Ok((prefactor * s0, -prefactor * s1, prefactor * s2));
        }
        w *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + 1.0));
        psi1 += 1.0 / (nf + 1.0);
        psia += 1.0 / (a + nf);
        psib += 1.0 / (b + nf);
        tn *= t;
    }
    Err(Error::NonConvergence { what: "logarithmic hypergeometric series", terms: HYP2F1_MAX_TERMS })
}

// ---------------------------------------------------------------------------
// Modified Bessel function K_ν
// ---------------------------------------------------------------------------

fn is_half_integer(nu: f64) -> bool {
    let f = nu - nu.floor();
    (f - 0.5).abs() < 1e-15
}

/// `e^x K_ν(x)` for half-integer `ν ≥ 0` from the terminating closed form.
fn bessel_k_half_scaled(nu: f64, x: f64) -> f64 {
    let l = (nu - 0.5).round() as u32;
    // sum_{j=0}^{l} (l+j)! / (j! (l-j)!) (2x)^{-j}
    let mut sum = 0.0;
    let mut c = 1.0; // (l+j)!/(j!(l-j)!)
    let mut p = 1.0;
    for j in 0..=l {
        sum += c * p;
        let jf = f64::from(j);
        let lf = f64::from(l);
        c *= (lf + jf + 1.0) * (lf - jf) / (jf + 1.0);
        p /= 2.0 * x;
    }
    (PI / (2.0 * x)).sqrt() * sum
}

fn temme_gammas(mu: f64) -> Result<(f64, f64, f64, f64)> {
    // Returns (Γ1, Γ2, 1/Γ(1+μ), 1/Γ(1-μ)).
    if mu.abs() < 1e-3 {
        let m2 = mu * mu;
        let g1 = -(EULER_GAMMA - 0.042_002_635_034_095_2 * m2 - 0.042_197_734_555_544_3 * m2 * m2);
        let g2 = 1.0 - 0.655_878_071_520_253_8 * m2 + 0.166_538_611_382_291_5 * m2 * m2;
        Ok((g1, g2, g2 - mu * g1, g2 + mu * g1))
    } else {
        let gampl = 1.0 / gamma_fn(1.0 + mu)?;
        let gammi = 1.0 / gamma_fn(1.0 - mu)?;
        Ok(((gammi - gampl) / (2.0 * mu), (gammi + gampl) / 2.0, gampl, gammi))
    }
}

/// Returns `(e^x K_ν(x), e^x K_{ν+1}(x))` for `ν ≥ 0`, `x > 0`.
///
/// Temme's series below `x = 2`, Steed's continued fraction above, each for
/// `|μ| ≤ 1/2` followed by upward recurrence in the order.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("Bessel K argument {x} must be positive")));
    }
    if nu < 0.0 {
        return Err(Error::InvalidParameter(format!("order {nu} must be nonnegative")));
    }
    if is_half_integer(nu) {
        return Ok((bessel_k_half_scaled(nu, x), bessel_k_half_scaled(nu + 1.0, x)));
    }
    const EPS: f64 = 1e-17;
    const MAXIT: usize = 100_000;
    let nl = (nu + 0.5).floor() as i64;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut kmu, mut k1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < 1e-12 { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < 1e-12 { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu)?;
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS && del1.abs() < sum1.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { what: "Temme series for K", terms: MAXIT });
        }
        let scale = x.exp();
        kmu = sum * scale;
        k1 = sum1 * xi2 * scale;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            a -= 2.0 * fi;
            c = -a * c / (fi + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { what: "Steed continued fraction for K", terms: MAXIT });
        }
        h *= a1;
        kmu = (PI / (2.0 * x)).sqrt() / s;
        k1 = kmu * (mu + x + 0.5 - h) * xi;
    }
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    Ok((kmu, k1))
}

/// `K_ν(x)` for real `ν` (even in `ν`) and `x > 0`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let (k, _) = bessel_k_scaled(nu.abs(), x)?;
    Ok(k * (-x).exp())
}

/// Evaluates `c · z^ν K_|ν|(z)` in log space, so that neither the small-`z`
/// blow-up of `K` nor the large-`z` decay overflows.
pub(crate) fn scaled_k_power(coeff: f64, nu: f64, z: f64) -> Result<f64> {
    if coeff == 0.0 {
        return Ok(0.0);
    }
    let (ks, _) = bessel_k_scaled(nu.abs(), z)?;
    let ln = coeff.abs().ln() + nu * z.ln() + ks.ln() - z;
    Ok(coeff.signum() * ln.exp())
}

/// Normalization `2^{1-ν}/Γ(ν)` that makes `z^ν K_ν(z) → 1` as `z → 0`.
pub fn k_profile_normalization(nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("profile order {nu} must be positive")));
    }
    Ok(((1.0 - nu) * LN_2 - ln_gamma(nu)).exp())
}

/// Largest `λ · y_max` accepted by [`bessel_k_profile`].
pub const BESSEL_ARG_GUARD: f64 = 700.0;

/// Samples `φ(y) = [2^{1-ν}/Γ(ν)] (λy)^ν K_ν(λy)` on a positive grid.
///
/// `φ(0+) = 1` and `φ` is the decaying solution of
/// `φ'' + ((1 - 2ν)/y) φ' - λ² φ = 0`.
pub fn bessel_k_profile(nu: f64, lambda: f64, y_grid: &[f64]) -> Result<ModeProfile> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    if y_grid.is_empty() || y_grid[0] <= 0.0 || y_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("grid must be strictly increasing and positive".into()));
    }
    let y_max = *y_grid.last().unwrap();
    if lambda * y_max > BESSEL_ARG_GUARD {
        return Err(Error::Overflow(lambda * y_max));
    }
    let form = BesselForm { coeff: k_profile_normalization(nu)?, nu };
    ModeProfile::from_bessel(lambda, form, y_grid.to_vec())
}
