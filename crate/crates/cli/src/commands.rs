//! Pipelines behind each command.

use std::f64::consts::PI;
use std::fmt;

use bosegas::bogoliubov::{dispersion_table, energy_prediction, universal_spectrum, EnergyPrediction};
use bosegas::fock::{build_sector, ed_report, verify_many_body_identity};
use bosegas::twobody::{Preconditioner, SolverConfig, TwoBodyContext};
use bosegas::{LatticeSpec, LowCutoff, Potential};
use clap::ValueEnum;
use rayon::prelude::*;

use crate::config::{Command, ConfigError, KPolicy, RunConfig};
use crate::output::{fmt17, Cell, Table};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(bosegas::Error),
    Io(std::io::Error),
}

impl CliError {
    /// 2 invalid input, 3 no convergence, 4 outside the domain of validity, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                bosegas::Error::Invalid(_) => 2,
                bosegas::Error::Convergence { .. } => 3,
                bosegas::Error::Domain(_) | bosegas::Error::Stability { .. } => 4,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "invalid configuration: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<bosegas::Error> for CliError {
    fn from(e: bosegas::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub struct Outcome {
    pub summary: String,
    pub table: Table,
    /// Process status on success; `verify` reports 1 when the check fails.
    pub status: i32,
}

pub fn run(cfg: &RunConfig, command: Command) -> CliResult<Outcome> {
    match command {
        Command::Scattering => scattering(cfg),
        Command::Twobody => twobody(cfg),
        Command::Dispersion => dispersion(cfg),
        Command::Lhy => lhy(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Ed => ed(cfg),
        Command::Verify => verify(cfg),
    }
}

fn solver(cfg: &RunConfig) -> CliResult<SolverConfig> {
    Ok(SolverConfig::new(cfg.tol, cfg.max_iter, Preconditioner::default())?)
}

/// Two-body context at `L = scale_for(n)` with the configured cutoffs.
fn context(cfg: &RunConfig, potential: &Potential, n: usize) -> CliResult<TwoBodyContext> {
    let scale = cfg.scale_for(n);
    let q_max = cfg.q_max.unwrap_or_else(|| TwoBodyContext::default_q_max(potential, scale));
    let spec = LatticeSpec::new(q_max, cfg.low_cutoff(n, q_max))?;
    let ctx = TwoBodyContext::new(potential.clone(), scale, spec, solver(cfg)?)?;
    Ok(match &cfg.cache_dir {
        Some(dir) => ctx.with_cache_dir(dir)?,
        None => ctx,
    })
}

/// Exact diagonalization runs on a small lattice: `q_max = 2π` (7 modes) unless set.
fn ed_spec(cfg: &RunConfig, n: usize) -> CliResult<LatticeSpec> {
    let q_max = cfg.q_max.unwrap_or(2.0 * PI);
    Ok(LatticeSpec::new(q_max, cfg.low_cutoff(n, q_max))?)
}

fn cutoff_comment(k: LowCutoff) -> String {
    match k {
        LowCutoff::Infinite => "inf".into(),
        LowCutoff::Finite(k) => fmt17(k),
    }
}

fn scattering(cfg: &RunConfig) -> CliResult<Outcome> {
    let pot = cfg.potential()?;
    let sol = pot.scattering_length()?;
    let mut table = Table::new(&["kind", "V0", "R", "a", "eight_pi_a", "integral_v_phi", "steps"]);
    table.push(vec![
        pot.kind_name().into(),
        pot.strength().into(),
        pot.range().into(),
        sol.a.into(),
        (8.0 * PI * sol.a).into(),
        sol.integral_v_phi.into(),
        sol.steps.into(),
    ]);
    Ok(Outcome {
        summary: format!("a = {}", fmt17(sol.a)),
        table,
        status: 0,
    })
}

fn twobody(cfg: &RunConfig) -> CliResult<Outcome> {
    let n = cfg.single_n()?;
    let pot = cfg.potential()?;
    let ctx = context(cfg, &pot, n)?;
    let co = ctx.coefficients(n, cfg.kappa, &[])?;
    ctx.persist()?;
    let mut table = Table::new(&["kx", "ky", "kz", "w", "sigma"]);
    table.comments = vec![
        "k = 2π·(kx, ky, kz)".into(),
        format!("a_L = {}", fmt17(co.a_l)),
        format!("L = {}", fmt17(co.scale)),
        format!("q_max = {}", fmt17(co.spec.q_max())),
        format!("K = {}", cutoff_comment(co.spec.low_cutoff())),
        format!("sigma_0 = {}", fmt17(co.sigma.sigma0)),
        format!("fingerprint = {}", co.fingerprint),
    ];
    for (k, w) in &co.w {
        let sigma = co.sigma.by_mode.get(k).map_or(Cell::Empty, |&s| s.into());
        table.push(vec![k.0[0].into(), k.0[1].into(), k.0[2].into(), (*w).into(), sigma]);
    }
    Ok(Outcome {
        summary: format!("a_L = {} with {} modes", fmt17(co.a_l), co.w.len()),
        table,
        status: 0,
    })
}

fn dispersion(cfg: &RunConfig) -> CliResult<Outcome> {
    let n = cfg.single_n()?;
    let pot = cfg.potential()?;
    let ctx = context(cfg, &pot, n)?;
    let co = ctx.coefficients(n, cfg.kappa, &[])?;
    ctx.persist()?;
    let t = dispersion_table(&co, cfg.epsilon)?;
    let mut table = Table::new(&["kx", "ky", "kz", "mu", "A", "B", "C", "e", "alpha", "gamma", "nu"]);
    let negative = t.negative_summands().len();
    table.comments = vec![
        "k = 2π·(kx, ky, kz)".into(),
        format!("epsilon = {}", fmt17(t.epsilon)),
        format!("negative LHY summands = {negative}"),
    ];
    for r in &t.records {
        let mut row: Vec<Cell> = r.k.0.iter().map(|&c| c.into()).collect();
        row.extend([r.mu, r.a, r.b, r.c, r.e, r.alpha, r.gamma, r.nu].map(Cell::from));
        table.push(row);
    }
    let e_min = t.records.iter().map(|r| r.e).fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        summary: format!("{} modes, min e_k = {}", t.records.len(), fmt17(e_min)),
        table,
        status: 0,
    })
}

fn prediction(cfg: &RunConfig, pot: &Potential, a: f64, n: usize) -> CliResult<EnergyPrediction> {
    let ctx = context(cfg, pot, n)?;
    let co = ctx.coefficients(n, cfg.kappa, &[])?;
    ctx.persist()?;
    let t = dispersion_table(&co, cfg.epsilon)?;
    Ok(energy_prediction(&co, &t, a, 0)?)
}

fn lhy(cfg: &RunConfig) -> CliResult<Outcome> {
    let pot = cfg.potential()?;
    let a = pot.scattering_length()?.a;
    let mut table = Table::new(&[
        "N",
        "kappa",
        "q_max",
        "a",
        "a_L",
        "mean_field",
        "lhy_exact",
        "lhy_exact_tail",
        "lhy_universal",
        "lhy_universal_tail",
        "ground_exact",
        "ground_universal",
    ]);
    let mut summary = String::new();
    for &n in cfg.n_list()? {
        let p = prediction(cfg, &pot, a, n)?;
        for w in &p.warnings {
            if !table.comments.contains(w) {
                table.comments.push(w.clone());
            }
        }
        table.push(vec![
            n.into(),
            p.kappa.into(),
            p.q_max.into(),
            a.into(),
            p.a_l.into(),
            p.mean_field.into(),
            p.lhy_exact.value.into(),
            p.lhy_exact.tail_estimate.into(),
            p.lhy_universal.value.into(),
            p.lhy_universal.tail_estimate.into(),
            p.ground_exact().into(),
            p.ground_universal().into(),
        ]);
        summary = format!(
            "N = {n}: lhy_exact = {}, lhy_universal = {}",
            fmt17(p.lhy_exact.value),
            fmt17(p.lhy_universal.value)
        );
    }
    Ok(Outcome {
        summary,
        table,
        status: 0,
    })
}

fn spectrum(cfg: &RunConfig) -> CliResult<Outcome> {
    let n = cfg.single_n()?;
    let pot = cfg.potential()?;
    let a = pot.scattering_length()?.a;
    let scale = cfg.scale_for(n);
    let q_max = cfg.q_max.unwrap_or_else(|| TwoBodyContext::default_q_max(&pot, scale));
    let lambda = universal_spectrum(a, n, cfg.kappa, q_max, cfg.levels)?;
    let mut table = Table::new(&["d", "lambda"]);
    for (i, &l) in lambda.iter().enumerate() {
        table.push(vec![(i + 1).into(), l.into()]);
    }
    Ok(Outcome {
        summary: format!("lambda^({}) = {}", lambda.len(), fmt17(*lambda.last().unwrap())),
        table,
        status: 0,
    })
}

fn ed(cfg: &RunConfig) -> CliResult<Outcome> {
    let list = cfg.n_list()?;
    let pot = cfg.potential()?;
    let spec = ed_spec(cfg, *list.iter().max().unwrap())?;
    let report = ed_report(list, cfg.kappa, &pot, &spec, cfg.levels, cfg.total, solver(cfg)?)?;
    let mut table = Table::new(&[
        "N",
        "kappa",
        "d",
        "E_ed",
        "gap_ed",
        "mean_field",
        "lhy_exact",
        "lhy_universal",
        "lambda_d",
        "residual",
    ]);
    table.comments = report.warnings.clone();
    table.comments.dedup();
    for r in &report.rows {
        table.push(vec![
            r.particles.into(),
            r.kappa.into(),
            r.level.into(),
            r.e_ed.into(),
            r.gap_ed.into(),
            r.mean_field.into(),
            r.lhy_exact.into(),
            r.lhy_universal.into(),
            r.lambda.into(),
            r.residual.into(),
        ]);
    }
    let ground = report.rows.last().map_or(f64::NAN, |r| r.e_ed - r.gap_ed);
    Ok(Outcome {
        summary: format!("N = {}: E_ed = {}", list[list.len() - 1], fmt17(ground)),
        table,
        status: 0,
    })
}

fn verify(cfg: &RunConfig) -> CliResult<Outcome> {
    let n = cfg.single_n()?;
    let pot = cfg.potential()?;
    let spec = ed_spec(cfg, n)?;
    let sector = build_sector(n, &spec, cfg.total)?;
    let ctx = TwoBodyContext::new(pot, cfg.scale_for(n), spec, solver(cfg)?)?;
    let r = verify_many_body_identity(&sector, &ctx)?;
    let mut table = Table::new(&[
        "N",
        "dimension",
        "max_deviation",
        "threshold",
        "h_norm",
        "lhs_asymmetry",
        "rhs_asymmetry",
        "tol",
        "passed",
    ]);
    table.push(vec![
        n.into(),
        r.dimension.into(),
        r.max_deviation.into(),
        r.threshold.into(),
        r.h_norm.into(),
        r.lhs_asymmetry.into(),
        r.rhs_asymmetry.into(),
        r.solver_tol.into(),
        r.passed().into(),
    ]);
    Ok(Outcome {
        summary: format!(
            "max deviation = {}, threshold = {} ({})",
            fmt17(r.max_deviation),
            fmt17(r.threshold),
            if r.passed() { "passed" } else { "FAILED" }
        ),
        table,
        status: if r.passed() { 0 } else { 1 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "L")]
    L,
    #[value(name = "N")]
    N,
    #[value(name = "q_max")]
    QMax,
    #[value(name = "V0")]
    V0,
    #[value(name = "K")]
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Observable {
    /// |a_L - a|
    #[value(name = "a_L-a")]
    ALMinusA,
    #[value(name = "a_L")]
    AL,
    #[value(name = "mean_field")]
    MeanField,
    #[value(name = "lhy_exact")]
    LhyExact,
    #[value(name = "lhy_universal")]
    LhyUniversal,
    /// |lhy_exact - lhy_universal|
    #[value(name = "lhy_diff")]
    LhyDiff,
    #[value(name = "E_ed")]
    EEd,
    #[value(name = "identity_deviation")]
    IdentityDeviation,
}

impl Axis {
    pub fn default_observable(self) -> Observable {
        match self {
            Axis::L => Observable::ALMinusA,
            Axis::N => Observable::LhyDiff,
            Axis::QMax => Observable::LhyExact,
            Axis::V0 => Observable::EEd,
            Axis::K => Observable::AL,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Axis::L => "L",
            Axis::N => "N",
            Axis::QMax => "q_max",
            Axis::V0 => "V0",
            Axis::K => "K",
        }
    }

    fn apply(self, cfg: &mut RunConfig, v: f64) -> CliResult<()> {
        match self {
            Axis::L => cfg.scale = Some(v),
            Axis::N => {
                if !(v >= 2.0 && v.fract() == 0.0) {
                    return Err(ConfigError {
                        field: "sweep.values".into(),
                        message: format!("N must be an integer ≥ 2, got {v}"),
                    }
                    .into());
                }
                cfg.particles = vec![v as usize];
            }
            Axis::QMax => cfg.q_max = Some(v),
            Axis::V0 => cfg.v0 = v,
            Axis::K => cfg.k_policy = KPolicy::Explicit(v),
        }
        cfg.validate()?;
        Ok(())
    }
}

fn observable_name(o: Observable) -> String {
    o.to_possible_value().map_or_else(String::new, |v| v.get_name().to_string())
}

fn evaluate(cfg: &RunConfig, observable: Observable) -> CliResult<f64> {
    let pot = cfg.potential()?;
    let n = cfg.particles.first().copied().unwrap_or(2);
    Ok(match observable {
        Observable::ALMinusA | Observable::AL => {
            let a_l = context(cfg, &pot, n)?.box_scattering_length()?;
            if observable == Observable::AL {
                a_l
            } else {
                (a_l - pot.scattering_length()?.a).abs()
            }
        }
        Observable::MeanField | Observable::LhyExact | Observable::LhyUniversal | Observable::LhyDiff => {
            let n = cfg.single_n()?;
            let p = prediction(cfg, &pot, pot.scattering_length()?.a, n)?;
            match observable {
                Observable::MeanField => p.mean_field,
                Observable::LhyExact => p.lhy_exact.value,
                Observable::LhyUniversal => p.lhy_universal.value,
                _ => (p.lhy_exact.value - p.lhy_universal.value).abs(),
            }
        }
        Observable::EEd => {
            let n = cfg.single_n()?;
            let spec = ed_spec(cfg, n)?;
            let sector = build_sector(n, &spec, cfg.total)?;
            let h = bosegas::fock::hamiltonian_at_scale(&sector, &pot, cfg.scale_for(n))?;
            bosegas::fock::lowest_eigenvalues(&h, 1)?.values[0]
        }
        Observable::IdentityDeviation => {
            let n = cfg.single_n()?;
            let spec = ed_spec(cfg, n)?;
            let sector = build_sector(n, &spec, cfg.total)?;
            let ctx = TwoBodyContext::new(pot, cfg.scale_for(n), spec, solver(cfg)?)?;
            verify_many_body_identity(&sector, &ctx)?.max_deviation
        }
    })
}

/// Least-squares slope of `ln|y|` against `ln x` over points with `x > 0`, `y ≠ 0`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y != 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (x - mx) * (y - my), d + (x - mx) * (x - mx)));
    num / den
}

pub fn sweep(cfg: &RunConfig, axis: Axis, values: &[f64], observable: Option<Observable>) -> CliResult<Outcome> {
    if values.is_empty() {
        return Err(ConfigError {
            field: "sweep.values".into(),
            message: "at least one value is required".into(),
        }
        .into());
    }
    let observable = observable.unwrap_or(axis.default_observable());
    let results: Vec<CliResult<f64>> = values
        .par_iter()
        .map(|&v| {
            let mut c = cfg.clone();
            axis.apply(&mut c, v)?;
            evaluate(&c, observable)
        })
        .collect();
    let name = observable_name(observable);
    let mut table = Table::new(&[axis.name(), name.as_str()]);
    let mut points = Vec::with_capacity(values.len());
    for (&v, r) in values.iter().zip(results) {
        let y = r?;
        points.push((v, y));
        table.push(vec![v.into(), y.into()]);
    }
    let slope = log_log_slope(&points);
    table.trailer.push(format!("slope = {}", fmt17(slope)));
    Ok(Outcome {
        summary: format!("{name} vs {}: log-log slope = {}", axis.name(), fmt17(slope)),
        table,
        status: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0].iter().map(|&x: &f64| (x, 3.0 / x)).collect();
        assert!((log_log_slope(&pts) + 1.0).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_nan());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(bosegas::Error::Invalid("x".into())).exit_code(), 2);
        assert_eq!(
            CliError::from(bosegas::Error::Convergence {
                what: "x".into(),
                residual: 1.0,
                target: 0.0
            })
            .exit_code(),
            3
        );
        assert_eq!(CliError::from(bosegas::Error::Domain("x".into())).exit_code(), 4);
    }
}
