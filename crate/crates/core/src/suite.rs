//! The full verification suite: every identity the crate checks, grouped into
//! numbered acceptance criteria.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{default_epsilons, divergence_report, energy_order1, energy_order2, renormalized_energy};
use crate::error::{Error, Result};
use crate::mesh::mode_mesh;
use crate::mode::{
    apply_weighted_operator, check_induction, extension_apply, extension_multiplier, order_k_constant,
    solve_mode_extension, SolveMethod,
};
use crate::model::{adapted_scalar_curvature, check_model_q, q2gamma_closed};
use crate::params::FracParams;
use crate::recursion::verify_recursion;
use crate::report::VerificationReport;
use crate::scattering::{f2_consistency, scattering_apply};
use crate::spectral::{fractional_multiplier_apply, random_field, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Multiplies every `d_γ`; anything but 1 is a fault injection.
    pub d_gamma_scale: f64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { d_gamma_scale: 1.0, threads: None, seed: 0 }
    }
}

/// One row of the suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub criterion: u32,
    pub report: VerificationReport,
}

/// Short description of each criterion, indexed from 1.
pub const CRITERIA: [&str; 9] = [
    "extension route recovers |xi|^{2gamma} for 0 < gamma < 1",
    "fourth-order extraction chain",
    "general-order extraction",
    "exact recursion, closed form and factorization",
    "model Q-curvature, signs and adapted scalar curvature",
    "order-one and order-two energy identities",
    "renormalized energy and divergence rate",
    "scattering, Fourier and extension routes agree",
    "operator properties",
];

struct Ctx {
    scale: f64,
    seed: u64,
}

impl Ctx {
    fn params(&self, n: u32, gamma: f64) -> Result<FracParams> {
        let mut p = FracParams::unchecked_range(n, gamma)?;
        p.d_gamma *= self.scale;
        Ok(p)
    }
}

fn guarded(identity: &str, f: impl FnOnce() -> Result<VerificationReport>) -> VerificationReport {
    f().unwrap_or_else(|e| VerificationReport::exact(identity, false, e.to_string()))
}

fn guarded_many(identity: &str, f: impl FnOnce() -> Result<Vec<VerificationReport>>) -> Vec<VerificationReport> {
    f().unwrap_or_else(|e| vec![VerificationReport::exact(identity, false, e.to_string())])
}

/// `max |a - b| / max |b|`.
fn field_error(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    Ok(a.max_abs_diff(b)? / b.sup_norm().max(1e-300))
}

fn timed(identity: String, tol: f64, f: impl FnOnce() -> Result<f64>) -> VerificationReport {
    let start = Instant::now();
    let label = identity.clone();
    guarded(&label, || {
        Ok(VerificationReport::from_error(identity, f()?, tol).with_runtime(start.elapsed().as_secs_f64()))
    })
}

fn criterion1(ctx: &Ctx) -> Vec<VerificationReport> {
    let f = match SpectralField::torus(2, 64, |x| x[0].cos() + (2.0 * x[1]).cos()) {
        Ok(f) => f,
        Err(e) => return vec![VerificationReport::exact("extension-multiplier", false, e.to_string())],
    };
    let mut out = vec![];
    for g in [0.3, 0.5, 0.75] {
        let start = Instant::now();
        let mut rows = vec![];
        for (method, tol, tag) in [(SolveMethod::SemiAnalytic, 1e-6, "sa"), (SolveMethod::FiniteDifference, 1e-3, "fd")] {
            rows.push(timed(format!("extension-multiplier-{tag} gamma={g}"), tol, || {
                let p = ctx.params(2, g)?;
                field_error(&extension_apply(&f, &p, method)?, &fractional_multiplier_apply(&f, g)?)
            }));
        }
        let elapsed = start.elapsed().as_secs_f64();
        out.extend(rows);
        out.push(
            VerificationReport::exact(format!("extension-runtime gamma={g}"), elapsed <= 10.0, format!("{elapsed:.3}s of 10s"))
                .with_runtime(elapsed),
        );
    }
    out
}

fn criterion2(ctx: &Ctx) -> Vec<VerificationReport> {
    let mut out = vec![];
    let g = 1.5;
    out.extend(guarded_many("fourth-order chain", || {
        let p = ctx.params(2, g)?;
        let mesh = mode_mesh(1.0);
        let u = solve_mode_extension(1.0, p.m0(), &mesh, SolveMethod::SemiAnalytic)?;
        let profile_err = u
            .y
            .iter()
            .zip(&u.u)
            .map(|(y, v)| (v - (1.0 + y) * (-y).exp()).abs())
            .fold(0.0, f64::max);
        let lap = apply_weighted_operator(&u.clone().sampled(), p.m_k)?;
        let lap_err = lap
            .y
            .iter()
            .zip(&lap.u)
            .filter(|(y, _)| **y <= 10.0)
            .map(|(y, v)| (v + 2.0 * (-y).exp()).abs())
            .fold(0.0, f64::max);
        let mut rows = vec![
            VerificationReport::from_error("profile (1+y)e^{-y}", profile_err, 1e-4),
            VerificationReport::from_error("weighted laplacian -2e^{-y}", lap_err, 1e-4),
            VerificationReport::compare("extraction constant 1/2", 0.5, -order_k_constant(&p)?, 1e-4),
        ];
        for (method, tag) in [(SolveMethod::SemiAnalytic, "sa"), (SolveMethod::FiniteDifference, "fd")] {
            rows.push(VerificationReport::compare(
                format!("fourth-order product {tag}"),
                1.0,
                extension_multiplier(1.0, &p, method)?,
                1e-4,
            ));
        }
        Ok(rows)
    }));
    for g in [1.25, 1.75] {
        for (method, tag) in [(SolveMethod::SemiAnalytic, "sa"), (SolveMethod::FiniteDifference, "fd")] {
            for lambda in [1.0f64, 2.0] {
                let id = format!("fourth-order-{tag} gamma={g} lambda={lambda}");
                out.push(guarded(&id.clone(), || {
                    let start = Instant::now();
                    let p = ctx.params(4, g)?;
                    let v = extension_multiplier(lambda, &p, method)?;
                    Ok(VerificationReport::compare(id, lambda.powf(2.0 * g), v, 1e-3)
                        .with_runtime(start.elapsed().as_secs_f64()))
                }));
            }
        }
    }
    out
}

fn criterion3(ctx: &Ctx) -> Vec<VerificationReport> {
    let g = 2.5;
    let mut out = vec![];
    for (method, tag) in [(SolveMethod::SemiAnalytic, "sa"), (SolveMethod::FiniteDifference, "fd")] {
        for lambda in [1.0f64, 2.0] {
            let id = format!("general-order-{tag} gamma={g} lambda={lambda}");
            out.push(guarded(&id.clone(), || {
                let start = Instant::now();
                let p = ctx.params(6, g)?;
                let v = extension_multiplier(lambda, &p, method)?;
                Ok(VerificationReport::compare(id, lambda.powf(2.0 * g), v, 1e-3)
                    .with_runtime(start.elapsed().as_secs_f64()))
            }));
        }
    }
    out
}

fn criterion4(ctx: &Ctx) -> Vec<VerificationReport> {
    let r = guarded("recursion-exactness", || Ok(verify_recursion(8, 20, ctx.seed)?.to_verification()));
    let runtime = r.runtime;
    let mut t = VerificationReport::exact("recursion-runtime", runtime <= 5.0, format!("{runtime:.3}s of 5s"));
    t.runtime = runtime;
    vec![r, t]
}

/// `γ` grid strictly inside `(1, 2)`.
pub fn sign_scan_gammas() -> Vec<f64> {
    (1..10).map(|i| 1.0 + f64::from(i) / 10.0).collect()
}

fn criterion5(ctx: &Ctx) -> Vec<VerificationReport> {
    let mut out = vec![];
    for (n, g) in [(2, 0.5), (3, 1.25), (4, 1.5), (5, 1.75)] {
        out.push(guarded("model-q", || check_model_q(&ctx.params(n, g)?, 1e-5)));
    }
    out.push(guarded("q-sign-scan", || {
        let mut worst = f64::NEG_INFINITY;
        for n in 3..=5 {
            for g in sign_scan_gammas() {
                worst = worst.max(q2gamma_closed(n, g)?);
            }
        }
        Ok(VerificationReport::exact("q-sign-scan", worst < 0.0, format!("max Q = {worst:.6e}")))
    }));
    out.push(guarded("adapted-scalar-curvature", || {
        let mut worst = f64::INFINITY;
        for n in 3..=5 {
            for g in sign_scan_gammas().into_iter().filter(|g| *g < f64::from(n) / 2.0) {
                let c = adapted_scalar_curvature(&ctx.params(n, g)?, 400)?;
                worst = worst.min(c.min_scalar());
            }
        }
        Ok(VerificationReport::exact("adapted-scalar-curvature", worst > 0.0, format!("min R = {worst:.6e}")))
    }));
    out
}

fn two_mode_field() -> Result<SpectralField> {
    SpectralField::torus(2, 16, |x| 0.7 * x[0].cos() - 0.4 * (x[0] + 2.0 * x[1]).sin())
}

fn criterion6(ctx: &Ctx) -> Vec<VerificationReport> {
    let mut out = vec![];
    for g in [0.3, 0.75] {
        out.push(guarded("energy-order1", || {
            Ok(energy_order1(&two_mode_field()?, &ctx.params(2, g)?, SolveMethod::SemiAnalytic)?.to_verification())
        }));
    }
    for g in [1.25, 1.75] {
        out.push(guarded("energy-order2", || {
            Ok(energy_order2(&two_mode_field()?, &ctx.params(4, g)?, SolveMethod::SemiAnalytic)?.to_verification())
        }));
    }
    out.extend(guarded_many("energy spot value", || {
        let f = SpectralField::torus(2, 8, |x| x[0].cos())?;
        let r = energy_order2(&f, &ctx.params(2, 1.5)?, SolveMethod::SemiAnalytic)?;
        let target = 4.0 * PI * PI;
        Ok(vec![
            VerificationReport::compare("energy spot lhs 4pi^2", target, r.lhs, 1e-3),
            VerificationReport::compare("energy spot rhs 4pi^2", target, r.rhs, 1e-3),
        ])
    }));
    out
}

fn criterion7(ctx: &Ctx) -> Vec<VerificationReport> {
    let mut out = vec![];
    for g in [1.25, 1.5, 1.75] {
        out.extend(guarded_many("renormalized-energy", || {
            let p = ctx.params(4, g)?;
            let r = renormalized_energy(&two_mode_field()?, &p, &default_epsilons())?;
            Ok(vec![r.to_verification(), divergence_report(&r, &p, 0.05)])
        }));
    }
    out
}

fn criterion8(ctx: &Ctx) -> Vec<VerificationReport> {
    let mut out = vec![];
    for (i, g) in [0.3, 0.75, 1.25, 1.75].into_iter().enumerate() {
        out.extend(guarded_many("route-agreement", || {
            let p = ctx.params(4, g)?;
            let f = random_field(2, 16, 5, ctx.seed + i as u64)?;
            let fourier = fractional_multiplier_apply(&f, g)?;
            let scatter = scattering_apply(&f, &p, SolveMethod::SemiAnalytic)?;
            let ext = extension_apply(&f, &p, SolveMethod::SemiAnalytic)?;
            Ok(vec![
                VerificationReport::from_error(format!("scattering~fourier gamma={g}"), field_error(&scatter, &fourier)?, 1e-6),
                VerificationReport::from_error(format!("extension~fourier gamma={g}"), field_error(&ext, &fourier)?, 1e-6),
                VerificationReport::from_error(format!("scattering~extension gamma={g}"), field_error(&scatter, &ext)?, 1e-6),
            ])
        }));
    }
    out
}

fn criterion9(ctx: &Ctx) -> Vec<VerificationReport> {
    let mut out = vec![];
    out.push(timed("semigroup".into(), 1e-12, || {
        let f = random_field(3, 8, 4, ctx.seed)?;
        let a = fractional_multiplier_apply(&fractional_multiplier_apply(&f, 0.4)?, 0.85)?;
        field_error(&a, &fractional_multiplier_apply(&f, 1.25)?)
    }));
    out.push(guarded("self-adjointness", || {
        let p = ctx.params(3, 0.75)?;
        let f = random_field(2, 8, 4, ctx.seed + 1)?;
        let h = random_field(2, 8, 4, ctx.seed + 2)?;
        let lhs = scattering_apply(&f, &p, SolveMethod::SemiAnalytic)?.pairing(&h)?;
        let rhs = f.pairing(&scattering_apply(&h, &p, SolveMethod::SemiAnalytic)?)?;
        Ok(VerificationReport::compare("self-adjointness", lhs, rhs, 1e-8))
    }));
    out.push(timed("hermitian-preservation".into(), 1e-12, || {
        let p = ctx.params(4, 1.25)?;
        let f = random_field(2, 16, 5, ctx.seed + 3)?;
        let pf = extension_apply(&f, &p, SolveMethod::SemiAnalytic)?;
        let scale = pf.coeffs.iter().fold(1e-300_f64, |m, c| m.max(c.norm()));
        Ok(pf.hermitian_defect() / scale)
    }));
    for (g, lambda, n) in [(1.5, 1.0, 4), (0.25, 2.0, 2), (1.75, 1.3, 4)] {
        out.push(guarded("f2-consistency", || {
            f2_consistency(&ctx.params(n, g)?, lambda, SolveMethod::SemiAnalytic, 1e-4)
        }));
    }
    for (g, k) in [(1.5, 1), (2.5, 2)] {
        out.push(guarded("induction-ratio", || {
            let p = ctx.params(6, g)?;
            let u = solve_mode_extension(1.0, p.m0(), &mode_mesh(1.0), SolveMethod::SemiAnalytic)?;
            check_induction(&u, &p, k, 1e-4)
        }));
    }
    out
}

fn run_rows(ctx: &Ctx) -> Vec<SuiteRow> {
    let groups: [fn(&Ctx) -> Vec<VerificationReport>; 8] =
        [criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7, criterion8];
    let mut all: Vec<(u32, Vec<VerificationReport>)> = groups
        .par_iter()
        .enumerate()
        .map(|(i, f)| (i as u32 + 1, f(ctx)))
        .collect();
    all.push((9, criterion9(ctx)));
    all.into_iter()
        .flat_map(|(c, rows)| rows.into_iter().map(move |report| SuiteRow { criterion: c, report }))
        .collect()
}

/// Runs criteria 1 to 9. Criterion 9 carries no mutation row; see
/// [`mutation_check`].
pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<SuiteRow>> {
    if !(opts.d_gamma_scale.is_finite() && opts.d_gamma_scale != 0.0) {
        return Err(Error::InvalidParameter(format!("d_gamma_scale = {} must be finite and nonzero", opts.d_gamma_scale)));
    }
    let ctx = Ctx { scale: opts.d_gamma_scale, seed: opts.seed };
    match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(|| run_rows(&ctx)))
        }
        None => Ok(run_rows(&ctx)),
    }
}

/// Criteria whose rows do not all pass.
pub fn failing_criteria(rows: &[SuiteRow]) -> Vec<u32> {
    let mut out: Vec<u32> = rows.iter().filter(|r| !r.report.pass).map(|r| r.criterion).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Reruns the suite with `d_γ` scaled by `scale` and reports whether at least
/// `min_failures` criteria break.
pub fn mutation_check(opts: &SuiteOptions, scale: f64, min_failures: usize) -> Result<VerificationReport> {
    let start = Instant::now();
    let rows = run_suite(&SuiteOptions { d_gamma_scale: scale, ..*opts })?;
    let failing = failing_criteria(&rows);
    Ok(VerificationReport::exact(
        format!("mutation d_gamma*{scale}"),
        failing.len() >= min_failures,
        format!("failing criteria {failing:?}"),
    )
    .with_runtime(start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_scale() {
        assert!(run_suite(&SuiteOptions { d_gamma_scale: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn failing_criteria_dedups() {
        let row = |c, pass| SuiteRow { criterion: c, report: VerificationReport::exact("x", pass, "") };
        let rows = [row(3, false), row(1, true), row(3, false), row(2, false)];
        assert_eq!(failing_criteria(&rows), vec![2, 3]);
    }
}
