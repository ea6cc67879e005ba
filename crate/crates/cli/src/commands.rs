//! Subcommands and their implementations.

use std::fs::File;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fraclab_core::energy::{
    default_epsilons, divergence_report, energy_order1, energy_order2, order1_mode_integral, order2_mode_integral,
    renormalized_energy,
};
use fraclab_core::mesh::mode_mesh;
use fraclab_core::mode::{
    extension_apply, extension_multiplier, extract_order_k, fit_options, mode_residual, solve_mode_extension_with,
    FarBoundary,
};
use fraclab_core::model::{adapted_scalar_curvature, check_model_q, q2gamma_closed, q2gamma_numeric};
use fraclab_core::recursion::verify_recursion;
use fraclab_core::scattering::{f2_consistency, scattering_apply, scattering_multiplier, solve_poisson_mode};
use fraclab_core::spectral::{fractional_multiplier_apply, random_field};
use fraclab_core::suite::{mutation_check, run_suite, SuiteOptions};
use fraclab_core::{FracParams, SolveMethod, SpectralField, VerificationReport};
use serde_json::{json, Value};

use crate::config::read_config;
use crate::error::CliError;
use crate::output::{num, OutArgs, Outcome, Row, Table};

#[derive(Debug, Parser)]
#[command(name = "fraclab", version, about = "Verification runs for fractional GJMS operators")]
pub struct Cli {
    /// Print each subcommand with the identities it checks.
    #[arg(long)]
    pub list: bool,
    /// Worker threads for the parallel mode loops (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the operator to a periodic field by one route.
    Apply(ApplyArgs),
    /// Solve one extension mode and export its profile.
    Extend(ExtendArgs),
    /// Solve one scattering mode on hyperbolic space.
    Scatter(ScatterArgs),
    /// Weighted energy identity of order one or two.
    Energy(EnergyArgs),
    /// Renormalized energy for 1 < gamma < 2.
    Renorm(RenormArgs),
    /// Q-curvature of the homogeneous model against the ODE solution.
    ModelQ(ModelQArgs),
    /// Exact check of the Taylor recursion and the factorization.
    VerifyRecursion(RecursionArgs),
    /// Aggregate the built-in suite and any number of config files.
    ReportAll(ReportArgs),
    /// Run a key = value config file.
    Run { config: PathBuf },
}

/// Identities checked by each subcommand, for `--list`.
pub const LISTING: &[(&str, &str)] = &[
    ("apply", "Fourier multiplier |xi|^{2gamma}; extension and scattering routes agree with it on the torus"),
    ("extend", "weighted extension mode: boundary extraction gives lambda^{2gamma}"),
    ("scatter", "Poisson operator expansion: d_gamma S(s) gives lambda^{2gamma}; y^2 coefficient of F"),
    ("energy", "order-one and order-two weighted energy equals the boundary pairing"),
    ("renorm", "renormalized energy limit and the eps^{2-2gamma} divergence rate"),
    ("model-q", "model Q-curvature closed form against the shooting solution; sign for 1 < gamma < 2; adapted scalar curvature"),
    ("verify-recursion", "Taylor recursion equals the closed form; 2^k q_k equals the product of order-two factors"),
    ("report-all", "all of the above as the acceptance suite, plus fault injection in d_gamma"),
];

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    /// Closed-form Bessel profile.
    Sa,
    /// Finite differences on a graded mesh.
    Fd,
}

impl Method {
    fn solve(self) -> SolveMethod {
        match self {
            Method::Sa => SolveMethod::SemiAnalytic,
            Method::Fd => SolveMethod::FiniteDifference,
        }
    }

    fn default_tolerance(self) -> f64 {
        match self {
            Method::Sa => 1e-6,
            Method::Fd => 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Route {
    Fourier,
    Extension,
    Scattering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Far {
    Robin,
    Dirichlet,
}

/// Input field: a CSV file, or a random field with a few low modes.
#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// CSV with index columns and a `value` column.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    #[arg(long, default_value_t = 5)]
    pub modes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl FieldArgs {
    fn load(&self) -> Result<SpectralField, CliError> {
        match &self.input {
            Some(path) => {
                let f = File::open(path)
                    .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
                Ok(SpectralField::read_csv(f, None)?)
            }
            None => Ok(random_field(self.dim, self.grid, self.modes, self.seed)?),
        }
    }
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long, value_enum)]
    pub route: Route,
    #[arg(long, value_enum, default_value = "sa")]
    pub method: Method,
    #[arg(long)]
    pub gamma: f64,
    /// Dimension of the hyperbolic model (scattering route).
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    /// Relative sup-norm tolerance against the Fourier route.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "sa")]
    pub method: Method,
    /// Condition at the truncation point.
    #[arg(long, value_enum, default_value = "robin")]
    pub far: Far,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "sa")]
    pub method: Method,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Tolerance on the y^2 coefficient of F.
    #[arg(long, default_value_t = 1e-4)]
    pub f2_tolerance: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    /// 1 for 0 < gamma < 1, 2 for 1 < gamma < 2.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub order: u32,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "sa")]
    pub method: Method,
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RenormArgs {
    #[arg(long)]
    pub gamma: f64,
    /// Comma-separated decreasing cutoffs (default 2^-3 .. 2^-10).
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Relative tolerance on the divergence exponent.
    #[arg(long, default_value_t = 0.05)]
    pub divergence_tolerance: f64,
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ModelQArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, conflicts_with = "scan", required_unless_present = "scan")]
    pub gamma: Option<f64>,
    /// `lo:hi:count`, inclusive.
    #[arg(long)]
    pub scan: Option<String>,
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
    /// Samples of the adapted curvature.
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RecursionArgs {
    #[arg(long, default_value_t = 8)]
    pub kmax: u32,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Config files whose rows are added to the table.
    pub configs: Vec<PathBuf>,
    /// More config files, comma-separated (the form usable inside a config).
    #[arg(long = "config", value_delimiter = ',')]
    pub config_list: Vec<PathBuf>,
    /// Include the built-in acceptance suite.
    #[arg(long)]
    pub suite: bool,
    /// Multiply d_gamma by this factor in the suite (fault injection).
    #[arg(long)]
    pub fault_dgamma: Option<f64>,
    /// Add a row that reruns the suite with d_gamma scaled by this factor
    /// and expects at least three criteria to fail.
    #[arg(long)]
    pub mutation: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

impl Command {
    pub fn out(&self) -> Option<&OutArgs> {
        Some(match self {
            Command::Apply(a) => &a.out,
            Command::Extend(a) => &a.out,
            Command::Scatter(a) => &a.out,
            Command::Energy(a) => &a.out,
            Command::Renorm(a) => &a.out,
            Command::ModelQ(a) => &a.out,
            Command::VerifyRecursion(a) => &a.out,
            Command::ReportAll(a) => &a.out,
            Command::Run { .. } => return None,
        })
    }
}

/// Parses arguments that came from a config file; returns the `threads`
/// setting alongside the command.
pub fn parse_config(path: &std::path::Path) -> Result<(Option<usize>, Command), CliError> {
    let args = read_config(path)?;
    let cli = Cli::try_parse_from(std::iter::once("fraclab".to_string()).chain(args))
        .map_err(|e| CliError::Invalid(format!("{}: {}", path.display(), e.render().to_string().trim())))?;
    match cli.command {
        Some(Command::Run { .. }) | None => {
            Err(CliError::Invalid(format!("{}: `command` must name a computing subcommand", path.display())))
        }
        Some(c) => Ok((cli.threads, c)),
    }
}

/// Runs one command and writes its artifacts.
pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    let Some(out) = cmd.out() else {
        return Err(CliError::Invalid("`run` must be resolved before execution".into()));
    };
    out.check()?;
    let outcome = match cmd {
        Command::Apply(a) => apply(a)?,
        Command::Extend(a) => extend(a)?,
        Command::Scatter(a) => scatter(a)?,
        Command::Energy(a) => energy(a)?,
        Command::Renorm(a) => renorm(a)?,
        Command::ModelQ(a) => model_q(a)?,
        Command::VerifyRecursion(a) => recursion(a)?,
        Command::ReportAll(a) => report_all(a)?,
        Command::Run { .. } => unreachable!(),
    };
    out.write(&outcome)?;
    Ok(outcome)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Invalid(format!("{name} = {v} must be positive")))
    }
}

fn field_error(a: &SpectralField, b: &SpectralField) -> Result<f64, CliError> {
    Ok(a.max_abs_diff(b)? / b.sup_norm().max(1e-300))
}

fn field_table(f: &SpectralField) -> Result<Table, CliError> {
    let mut buf = Vec::new();
    f.write_csv(&mut buf)?;
    let mut r = csv::Reader::from_reader(buf.as_slice());
    let mut t = Table::new(&r.headers().map_err(fraclab_core::Error::from)?.iter().collect::<Vec<_>>());
    for rec in r.records() {
        t.push(rec.map_err(fraclab_core::Error::from)?.iter().map(String::from).collect());
    }
    Ok(t)
}

/// Distinct `|ξ|` carried by the field, ascending.
fn frequencies(f: &SpectralField) -> Vec<f64> {
    let scale = f.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    let mut xs: Vec<f64> = (0..f.len())
        .filter(|&i| f.coeffs[i].norm() > 1e-12 * scale)
        .map(|i| f.xi_squared(i).sqrt())
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    xs
}

fn apply(a: &ApplyArgs) -> Result<Outcome, CliError> {
    let params = match a.route {
        Route::Scattering => FracParams::new(a.n, a.gamma)?,
        _ => FracParams::unchecked_range(a.n, a.gamma)?,
    };
    let f = a.field.load()?;
    let method = a.method.solve();
    let tol = a.tolerance.unwrap_or(a.method.default_tolerance());
    let fourier = fractional_multiplier_apply(&f, a.gamma)?;
    let mut o = Outcome::new("apply");
    let result = match a.route {
        Route::Fourier => {
            let scale = fourier.coeffs.iter().fold(1e-300_f64, |m, c| m.max(c.norm()));
            o.push(VerificationReport::from_error(
                format!("hermitian-preservation gamma={}", a.gamma),
                fourier.hermitian_defect() / scale,
                1e-12,
            ));
            fourier
        }
        Route::Extension => {
            let r = extension_apply(&f, &params, method)?;
            o.push(VerificationReport::from_error(
                format!("extension~fourier gamma={}", a.gamma),
                field_error(&r, &fourier)?,
                tol,
            ));
            r
        }
        Route::Scattering => {
            let r = scattering_apply(&f, &params, method)?;
            o.push(VerificationReport::from_error(
                format!("scattering~fourier gamma={} n={}", a.gamma, a.n),
                field_error(&r, &fourier)?,
                tol,
            ));
            r
        }
    };
    o.csv = Some(field_table(&result)?);
    Ok(o)
}

fn extend(a: &ExtendArgs) -> Result<Outcome, CliError> {
    let params = FracParams::unchecked_range(2, a.gamma)?;
    let lambda = positive("lambda", a.lambda)?;
    let method = a.method.solve();
    let far = match a.far {
        Far::Robin => FarBoundary::Robin,
        Far::Dirichlet => FarBoundary::Dirichlet,
    };
    let p = solve_mode_extension_with(lambda, params.m0(), &mode_mesh(lambda), method, far)?;
    let residual = mode_residual(&p)?;
    let value = match a.far {
        Far::Robin => extension_multiplier(lambda, &params, method)?,
        Far::Dirichlet => extract_order_k(&p, &params, &fit_options(method))?,
    };
    let mut o = Outcome::new("extend");
    o.push(VerificationReport::compare(
        format!("extension-multiplier gamma={} lambda={lambda}", a.gamma),
        lambda.powf(2.0 * a.gamma),
        value,
        a.tolerance.unwrap_or(a.method.default_tolerance()),
    ));
    let mut t = Table::new(&["y", "u", "residual"]);
    for ((y, u), r) in p.y.iter().zip(&p.u).zip(&residual) {
        t.push(vec![num(*y), num(*u), num(*r)]);
    }
    o.csv = Some(t);
    o.extra.insert("multiplier".into(), json!(value));
    Ok(o)
}

fn scatter(a: &ScatterArgs) -> Result<Outcome, CliError> {
    let params = FracParams::new(a.n, a.gamma)?;
    let lambda = positive("lambda", a.lambda)?;
    let method = a.method.solve();
    let sol = solve_poisson_mode(lambda, &params, method)?;
    let mut o = Outcome::new("scatter");
    o.push(VerificationReport::compare(
        format!("scattering-multiplier gamma={} n={} lambda={lambda}", a.gamma, a.n),
        lambda.powf(2.0 * a.gamma),
        scattering_multiplier(lambda, &params, method)?,
        a.tolerance.unwrap_or(a.method.default_tolerance()),
    ));
    o.push(f2_consistency(&params, lambda, method, a.f2_tolerance)?);
    let mut t = Table::new(&["y", "u"]);
    for (y, u) in sol.u.y.iter().zip(&sol.u.u) {
        t.push(vec![num(*y), num(*u)]);
    }
    o.csv = Some(t);
    o.extra.insert("f0".into(), json!(sol.f0));
    o.extra.insert("f2".into(), json!(sol.f2));
    o.extra.insert("g0".into(), json!(sol.g0));
    o.extra.insert("d_gamma".into(), json!(params.d_gamma));
    Ok(o)
}

fn energy(a: &EnergyArgs) -> Result<Outcome, CliError> {
    let params = FracParams::unchecked_range(4, a.gamma)?;
    if params.k + 1 != a.order {
        return Err(CliError::Invalid(format!(
            "order {} needs {} < gamma < {}",
            a.order,
            a.order - 1,
            a.order
        )));
    }
    let f = a.field.load()?;
    let method = a.method.solve();
    let report = match a.order {
        1 => energy_order1(&f, &params, method)?,
        _ => energy_order2(&f, &params, method)?,
    };
    let mut o = Outcome::new("energy");
    o.push(report.to_verification());
    let mut t = Table::new(&["xi", "symbol", "interior"]);
    for xi in frequencies(&f).into_iter().filter(|x| *x > 0.0) {
        let interior = match a.order {
            1 => order1_mode_integral(xi, &params, method)?,
            _ => order2_mode_integral(xi, &params, method)?,
        };
        t.push(vec![num(xi), num(xi.powf(2.0 * a.gamma)), num(interior)]);
    }
    o.csv = Some(t);
    Ok(o)
}

fn renorm(a: &RenormArgs) -> Result<Outcome, CliError> {
    let params = FracParams::unchecked_range(4, a.gamma)?;
    let eps = a.eps.clone().unwrap_or_else(default_epsilons);
    let f = a.field.load()?;
    let r = renormalized_energy(&f, &params, &eps)?;
    let mut o = Outcome::new("renorm");
    o.push(r.to_verification());
    o.push(divergence_report(&r, &params, a.divergence_tolerance));
    let mut t = Table::new(&["eps", "bracket"]);
    for (e, b) in r.epsilons.iter().zip(&r.brackets) {
        t.push(vec![num(*e), num(*b)]);
    }
    o.csv = Some(t);
    if let Some(w) = &r.warning {
        o.extra.insert("warning".into(), json!(w));
    }
    Ok(o)
}

/// `lo:hi:count`, evenly spaced and inclusive.
pub fn parse_scan(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Invalid(format!("scan {spec:?} must be lo:hi:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 || !(lo <= hi) || (count == 1 && lo != hi) {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
}

fn model_q(a: &ModelQArgs) -> Result<Outcome, CliError> {
    let gammas = match (&a.scan, a.gamma) {
        (Some(s), _) => parse_scan(s)?,
        (None, Some(g)) => vec![g],
        (None, None) => return Err(CliError::Invalid("model-q needs gamma or scan".into())),
    };
    // Validate the whole scan before computing anything.
    let params = gammas
        .iter()
        .map(|&g| {
            let p = FracParams::unchecked_range(a.n, g)?;
            q2gamma_closed(a.n, g)?;
            Ok(p)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let nf = f64::from(a.n);
    let mut o = Outcome::new("model-q");
    let mut t = Table::new(&["gamma", "Q_closed", "Q_numeric", "rel_err", "min_R"]);
    for p in &params {
        let g = p.gamma;
        let closed = q2gamma_closed(a.n, g)?;
        let numeric = q2gamma_numeric(p)?;
        let check = check_model_q(p, a.tolerance)?;
        let min_r = if g < nf / 2.0 { Some(adapted_scalar_curvature(p, a.points)?.min_scalar()) } else { None };
        t.push(vec![num(g), num(closed), num(numeric), num(check.rel_err), min_r.map(num).unwrap_or_default()]);
        o.push(check);
        if g > 1.0 && g < 2.0 {
            o.push(VerificationReport::exact(format!("q-sign n={} gamma={g}", a.n), closed < 0.0, format!("Q = {closed:e}")));
            if let Some(r) = min_r {
                o.push(VerificationReport::exact(
                    format!("adapted-scalar-curvature n={} gamma={g}", a.n),
                    r > 0.0,
                    format!("min R = {r:e}"),
                ));
            }
        }
    }
    o.csv = Some(t);
    Ok(o)
}

fn recursion(a: &RecursionArgs) -> Result<Outcome, CliError> {
    let r = verify_recursion(a.kmax, a.trials, a.seed)?;
    let mut o = Outcome::new("verify-recursion");
    o.push(r.to_verification());
    o.extra.insert("recursion".into(), serde_json::to_value(&r).expect("report serializes"));
    Ok(o)
}

fn report_all(a: &ReportArgs) -> Result<Outcome, CliError> {
    // Parse every config before running any of them.
    let commands = a
        .configs
        .iter()
        .chain(&a.config_list)
        .map(|path| {
            let (_, cmd) = parse_config(path)?;
            if matches!(cmd, Command::ReportAll(_)) {
                return Err(CliError::Invalid(format!("{}: report-all cannot be nested", path.display())));
            }
            Ok((path, cmd))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    for (_, cmd) in &commands {
        cmd.out().expect("computing subcommand").check()?;
    }
    let scale = a.fault_dgamma.unwrap_or(1.0);
    if !(scale.is_finite() && scale != 0.0) {
        return Err(CliError::Invalid(format!("fault-dgamma = {scale} must be finite and nonzero")));
    }

    let mut o = Outcome::new("report-all");
    for (path, cmd) in &commands {
        let group = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match execute(cmd) {
            Ok(sub) => o.rows.extend(sub.rows.into_iter().map(|r| Row { group: group.clone(), report: r.report })),
            Err(CliError::Compute(e)) => o.rows.push(Row {
                group,
                report: VerificationReport::exact(sub_name(cmd), false, e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    let opts = SuiteOptions { d_gamma_scale: scale, threads: None, seed: a.seed };
    if a.suite {
        for row in run_suite(&opts)? {
            o.rows.push(Row { group: format!("criterion {}", row.criterion), report: row.report });
        }
    }
    if let Some(m) = a.mutation {
        o.rows.push(Row { group: "mutation".into(), report: mutation_check(&opts, m, 3)? });
    }
    if scale != 1.0 {
        o.extra.insert("fault_dgamma".into(), Value::from(scale));
    }
    let mut t = Table::new(&["group", "identity", "rel_err", "tolerance", "pass"]);
    for r in &o.rows {
        t.push(vec![
            r.group.clone(),
            r.report.identity.clone(),
            num(r.report.rel_err),
            num(r.report.tolerance),
            r.report.pass.to_string(),
        ]);
    }
    o.csv = Some(t);
    Ok(o)
}

fn sub_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Apply(_) => "apply",
        Command::Extend(_) => "extend",
        Command::Scatter(_) => "scatter",
        Command::Energy(_) => "energy",
        Command::Renorm(_) => "renorm",
        Command::ModelQ(_) => "model-q",
        Command::VerifyRecursion(_) => "verify-recursion",
        Command::ReportAll(_) => "report-all",
        Command::Run { .. } => "run",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_is_inclusive() {
        assert_eq!(parse_scan("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_scan("0.5:0.5:1").unwrap(), vec![0.5]);
        assert!(parse_scan("1:2").is_err());
        assert!(parse_scan("2:1:3").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn listing_covers_every_subcommand() {
        use clap::CommandFactory;
        let cmd = Cli::command();
        for sub in cmd.get_subcommands().map(|s| s.get_name()).filter(|n| *n != "run" && *n != "help") {
            assert!(LISTING.iter().any(|(name, _)| *name == sub), "{sub}");
        }
    }
}
