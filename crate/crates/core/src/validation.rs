//! The acceptance suite: every criterion as a runnable check with a
//! machine-readable outcome.

use serde::{Deserialize, Serialize};

use crate::channel_dist::{cascade_cdf, cascade_cdf_ordered, CascadeParams};
use crate::config::{ChannelStats, Scenario, SicMode, SystemConfig, ValidationPolicy};
use crate::error::Result;
use crate::monte_carlo::{
    ks_distance, oma_baseline_sop, oma_throughput, sample_cascade_gains, sample_realization,
    EveTreatment, OrderingMode, SimOptions,
};
use crate::secrecy::{system_sop, SecrecyAnalyzer, SecrecyQuery};
use crate::special_math::{bessel_k, gauss_laguerre};
use crate::sweep::{sweep_rows, OutputKind, SweepRange, SweepSpec, SweepVariable};

/// JSON schema of [`ValidationReport`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/validation_report.schema.json");

/// Environment variable read by the CLI to select a [`Fault`].
pub const FAULT_ENV: &str = "RISNOMA_FAULT_INJECT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn trials(self) -> u64 {
        match self {
            Level::Quick => 100_000,
            Level::Full => 1_000_000,
        }
    }
}

/// Deliberate corruption used to prove the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Scales every Bessel value under test by `1 + 1e-6`.
    Bessel,
}

impl Fault {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bessel" => Some(Fault::Bessel),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub level: Level,
    pub seed: u64,
    pub workers: Option<usize>,
    pub fault: Option<Fault>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            level: Level::Quick,
            seed: 0x5eed,
            workers: None,
            fault: None,
        }
    }
}

/// One inequality `measured <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(label: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            threshold,
            passed: measured <= threshold,
        }
    }

    fn holds(label: impl Into<String>, ok: bool) -> Self {
        Self::new(label, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    fn margin(&self) -> f64 {
        if self.threshold > 0.0 {
            self.measured / self.threshold
        } else if self.passed {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    /// The worst check, as `measured <= threshold`.
    pub measured: f64,
    pub threshold: f64,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

impl CriterionOutcome {
    fn from_checks(id: u32, name: &str, checks: Result<Vec<Check>>) -> Self {
        match checks {
            Ok(checks) => {
                let worst = checks
                    .iter()
                    .filter(|c| !c.measured.is_nan())
                    .max_by(|a, b| a.margin().total_cmp(&b.margin()));
                let (measured, threshold) = worst.map(|c| (c.measured, c.threshold)).unwrap_or((f64::NAN, 0.0));
                let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
                Self {
                    id,
                    name: name.into(),
                    passed,
                    measured,
                    threshold,
                    checks,
                    error: None,
                }
            }
            Err(e) => Self {
                id,
                name: name.into(),
                passed: false,
                measured: f64::NAN,
                threshold: 0.0,
                checks: vec![],
                error: Some(e.to_string()),
            },
        }
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("{status} [{}] {}: error: {e}", self.id, self.name),
            None => format!(
                "{status} [{}] {}: measured {:.3e} vs threshold {:.3e}",
                self.id, self.name, self.measured, self.threshold
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub level: Level,
    pub trials: u64,
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionOutcome>,
}

impl ValidationReport {
    pub fn failed(&self) -> Vec<&CriterionOutcome> {
        self.criteria.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> String {
        // NaN is not JSON; serde_json writes it as null, which the schema allows.
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "analytic vs simulation"),
    (2, "diversity orders"),
    (3, "error floor"),
    (4, "asymptote convergence"),
    (5, "cascade distribution"),
    (6, "order statistics"),
    (7, "quadrature"),
    (8, "bessel functions"),
    (9, "throughput convergence"),
    (10, "qualitative orderings"),
    (11, "determinism"),
];

pub fn criterion_name(id: u32) -> Option<&'static str> {
    CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, n)| *n)
}

const IPSIC: SicMode = SicMode::Imperfect { residual_level: 1.0 };

fn fig2_config() -> SystemConfig {
    SystemConfig {
        snr_eve_db: 0.0,
        ..SystemConfig::default()
    }
}

fn users(scenario: Scenario) -> Vec<usize> {
    SystemConfig::default().legitimate_users(scenario)
}

fn analyzer_at(cfg: &SystemConfig, snr_db: f64) -> Result<SecrecyAnalyzer> {
    SecrecyAnalyzer::new(cfg)?.with_snr_db(snr_db)
}

fn pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()) {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn analytic_vs_simulation(o: &ValidationOptions) -> Result<Vec<Check>> {
    let cfg = fig2_config();
    let mut checks = Vec::new();
    for sic in [SicMode::Perfect, IPSIC] {
        for rho in [0.0, 10.0, 20.0, 30.0] {
            let a = analyzer_at(&cfg, rho)?;
            let sim = SimOptions {
                eve: EveTreatment::MeanField,
                ordering: OrderingMode::CommonVariance,
                trials: o.level.trials(),
                seed: o.seed,
                workers: None,
            };
            let result = crate::monte_carlo::empirical_sop(a.config(), a.stats(), Scenario::External, sic, &sim)?;
            for k in users(Scenario::External) {
                let closed = a.sop_closed_form(&SecrecyQuery::new(k, Scenario::External, sic))?;
                if closed < 1e-3 {
                    continue;
                }
                let empirical = result.sop_for(k).unwrap_or(f64::NAN);
                let tol = (0.05 * closed).max(0.01);
                checks.push(Check::new(
                    format!("{} rho={rho} k={k}: |{closed:.5} - {empirical:.5}| / tol", sic.label()),
                    (closed - empirical).abs() / tol,
                    1.0,
                ));
            }
        }
    }
    Ok(checks)
}

fn diversity_orders() -> Result<Vec<Check>> {
    let grid = [40.0, 45.0, 50.0, 55.0, 60.0];
    let cfg = SystemConfig::default();
    let a = SecrecyAnalyzer::new(&cfg)?;
    let mut checks = Vec::new();
    for (scenario, ks) in [(Scenario::External, vec![1, 2]), (Scenario::Internal, vec![2])] {
        for k in ks {
            let q = SecrecyQuery::new(k, scenario, SicMode::Perfect);
            let d = a.diversity_order_estimate(&q, &grid)?;
            checks.push(Check::new(format!("psic {scenario:?} k={k}: |{d:.4} - {k}|"), (d - k as f64).abs(), 0.3));
        }
    }
    for scenario in [Scenario::External, Scenario::Internal] {
        for k in users(scenario) {
            let d = a.diversity_order_estimate(&SecrecyQuery::new(k, scenario, IPSIC), &grid)?;
            checks.push(Check::new(format!("ipsic {scenario:?} k={k}: |{d:.4}|"), d.abs(), 0.1));
        }
    }
    Ok(checks)
}

fn error_floor() -> Result<Vec<Check>> {
    let cfg = SystemConfig {
        residual_user_db: -10.0,
        residual_eve_db: -10.0,
        ..SystemConfig::default()
    };
    let a40 = analyzer_at(&cfg, 40.0)?;
    let a50 = analyzer_at(&cfg, 50.0)?;
    let mut checks = Vec::new();
    for scenario in [Scenario::External, Scenario::Internal] {
        for k in users(scenario) {
            let q = SecrecyQuery::new(k, scenario, IPSIC);
            let s40 = a40.sop_closed_form(&q)?;
            let s50 = a50.sop_closed_form(&q)?;
            let asym = a50.sop_asymptotic(&q)?;
            checks.push(Check::new(format!("{scenario:?} k={k}: 40 vs 50 dB"), (s40 / s50 - 1.0).abs(), 0.01));
            checks.push(Check::new(format!("{scenario:?} k={k}: floor vs asymptote"), (asym / s50 - 1.0).abs(), 0.05));
        }
    }
    Ok(checks)
}

fn asymptote_convergence() -> Result<Vec<Check>> {
    let a = analyzer_at(&fig2_config(), 50.0)?;
    let mut checks = Vec::new();
    for k in [1, 2] {
        let q = SecrecyQuery::new(k, Scenario::External, SicMode::Perfect);
        let ratio = a.sop_asymptotic(&q)? / a.sop_closed_form(&q)?;
        checks.push(Check::new(format!("k={k}: |ratio {ratio:.4} - 1|"), (ratio - 1.0).abs(), 0.2));
    }
    Ok(checks)
}

fn cascade_distribution(o: &ValidationOptions) -> Result<Vec<Check>> {
    let stats = ChannelStats::derive(&SystemConfig::default())?;
    let mut checks = Vec::new();
    for q in [4u32, 8, 16] {
        let params = CascadeParams::new(q, stats.n_br, stats.n_re)?;
        let samples = pool(o.workers, || {
            sample_cascade_gains(q as usize, stats.n_br, stats.n_re, 1_000_000, o.seed ^ q as u64)
        });
        let ks = ks_distance(&samples, |z| cascade_cdf(z, params).unwrap_or(f64::NAN));
        checks.push(Check::new(format!("Q={q}: KS"), ks, 0.005));
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let expected = q as f64 * stats.n_br * stats.n_re;
        checks.push(Check::new(format!("Q={q}: mean relative error"), (mean / expected - 1.0).abs(), 0.01));
    }
    Ok(checks)
}

fn order_statistics(o: &ValidationOptions) -> Result<Vec<Check>> {
    let cfg = SystemConfig::default();
    let stats = ChannelStats::derive(&cfg)?;
    let n = 100_000u64;
    let draws: Vec<Vec<f64>> = pool(o.workers, || {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(|i| sample_realization(&cfg, &stats, OrderingMode::CommonVariance, i, o.seed).cascades)
            .collect()
    });
    let mut checks = Vec::new();
    for k in 1..=cfg.user_count {
        let params = CascadeParams::new(cfg.group_size as u32, stats.n_br, stats.n_rk(k))?;
        let column: Vec<f64> = draws.iter().map(|c| c[k - 1]).collect();
        let ks = ks_distance(&column, |z| {
            cascade_cdf_ordered(z, k, cfg.user_count, params).unwrap_or(f64::NAN)
        });
        checks.push(Check::new(format!("k={k}: KS"), ks, 0.01));
    }
    Ok(checks)
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

fn quadrature() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    let mut at = (0, 0);
    for d in 1..=64 {
        let rule = gauss_laguerre(d)?;
        for m in 0..2 * d {
            let sum: f64 = rule.iter().map(|(t, w)| w * t.powi(m as i32)).sum();
            let err = (sum / factorial(m) - 1.0).abs();
            if err > worst {
                worst = err;
                at = (d, m);
            }
        }
    }
    let mut checks = vec![Check::new(
        format!("moments D<=64, worst at D={} m={}", at.0, at.1),
        worst,
        1e-8,
    )];
    let total: f64 = gauss_laguerre(300)?.weights().iter().sum();
    checks.push(Check::new("D=300 weight sum", (total - 1.0).abs(), 1e-9));

    let cfg = fig2_config();
    let mut diff: f64 = 0.0;
    for rho in [0.0, 10.0, 20.0, 30.0] {
        let a = analyzer_at(&cfg, rho)?;
        for sic in [SicMode::Perfect, IPSIC] {
            for k in users(Scenario::External) {
                let q = SecrecyQuery::new(k, Scenario::External, sic);
                let hi = a.sop_closed_form(&q.clone().with_orders(300, 300))?;
                let lo = a.sop_closed_form(&q.with_orders(150, 150))?;
                diff = diff.max((hi - lo).abs());
            }
        }
    }
    checks.push(Check::new("SOP at D=150 vs D=300", diff, 1e-6));
    Ok(checks)
}

/// `K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(νt) dt` by the trapezoid rule in the
/// log domain. The integrand is even and analytic, so the rule converges
/// geometrically in the step.
pub fn bessel_k_integral(nu: u32, x: f64) -> f64 {
    let nu = nu as f64;
    let ln_f = |t: f64| -x * t.cosh() + nu * t + (-2.0 * nu * t).exp().ln_1p() - std::f64::consts::LN_2;
    // The integrand peaks near sinh t = ν / x and decays double exponentially.
    let peak = (nu / x).asinh();
    let mut upper = peak + 1.0;
    while ln_f(upper) - ln_f(peak) > -60.0 {
        upper += 1.0;
    }
    let h = 0.004_f64.min(0.25 / x.sqrt());
    let n = (upper / h).ceil() as usize;
    let values: Vec<f64> = (0..=n).map(|i| ln_f(i as f64 * h)).collect();
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(i, &l)| if i == 0 { 0.5 } else { 1.0 } * (l - top).exp())
        .sum();
    (top + (sum * h).ln()).exp()
}

fn bessel_functions(o: &ValidationOptions) -> Result<Vec<Check>> {
    let corrupt = if o.fault == Some(Fault::Bessel) { 1.0 + 1e-6 } else { 1.0 };
    let k = |nu: u32, x: f64| bessel_k(nu, x).map(|v| v * corrupt);
    let xs: Vec<f64> = (0..=40).map(|i| 10f64.powf(-6.0 + i as f64 * (500f64.log10() + 6.0) / 40.0)).collect();
    let mut worst_oracle: f64 = 0.0;
    let mut at = (0, 0.0);
    let mut worst_recurrence: f64 = 0.0;
    for nu in 0..=16u32 {
        for &x in &xs {
            let err = (k(nu, x)? / bessel_k_integral(nu, x) - 1.0).abs();
            if err > worst_oracle {
                worst_oracle = err;
                at = (nu, x);
            }
            if nu >= 1 {
                // K_{ν+1} = K_{ν-1} + (2ν/x) K_ν
                let lhs = k(nu + 1, x)?;
                let rhs = k(nu - 1, x)? + 2.0 * nu as f64 / x * k(nu, x)?;
                worst_recurrence = worst_recurrence.max((lhs - rhs).abs() / lhs);
            }
        }
    }
    Ok(vec![
        Check::new(format!("vs integral, worst at nu={} x={:.3e}", at.0, at.1), worst_oracle, 1e-8),
        Check::new("recurrence residual", worst_recurrence, 1e-9),
    ])
}

fn throughput_convergence(o: &ValidationOptions) -> Result<Vec<Check>> {
    let cfg = SystemConfig {
        partition_p: 1,
        group_size: 16,
        target_rates: vec![0.08, 0.17, 0.25],
        snr_legit_db: 60.0,
        ..SystemConfig::default()
    };
    let a = SecrecyAnalyzer::new(&cfg)?;
    let noma = a.report(Scenario::External, SicMode::Perfect, None)?.throughput_bpcu;
    let sim = SimOptions {
        trials: o.level.trials(),
        seed: o.seed,
        workers: o.workers,
        ..SimOptions::default()
    };
    let oma = oma_throughput(&cfg, &oma_baseline_sop(&cfg, a.stats(), &sim)?)?;
    let sum: f64 = cfg.target_rates.iter().sum();
    Ok(vec![
        Check::new(format!("RIS-NOMA {noma:.6} vs 0.50"), (noma - 0.5).abs(), 1e-3),
        Check::new(format!("RIS-OMA {oma:.6} vs {sum}"), (oma - sum).abs(), 1e-3),
    ])
}

fn power_offset_sweep(scenario: Scenario, sic: SicMode) -> Result<Vec<f64>> {
    let base = SystemConfig {
        user_count: 2,
        power_alloc: vec![0.7, 0.3],
        dist_ris_user: vec![6.0, 4.0],
        target_rates: vec![0.04, 0.04],
        snr_legit_db: 30.0,
        ..SystemConfig::default()
    };
    let relaxed = ValidationPolicy {
        require_descending_power: false,
    };
    SweepRange::new(0.02, 0.98, 0.02)
        .values()?
        .into_iter()
        .map(|at| {
            let a = SecrecyAnalyzer::with_policy(&base.with_power_offset(at)?, relaxed)?;
            let per_user: Vec<f64> = base
                .legitimate_users(scenario)
                .into_iter()
                .map(|k| a.sop_closed_form(&SecrecyQuery::new(k, scenario, sic)))
                .collect::<Result<_>>()?;
            system_sop(&per_user)
        })
        .collect()
}

fn qualitative_orderings() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let table = analyzer_at(&SystemConfig::default(), 30.0)?;
    let p: Vec<f64> = (1..=3)
        .map(|k| table.sop_closed_form(&SecrecyQuery::new(k, Scenario::External, SicMode::Perfect)))
        .collect::<Result<_>>()?;
    checks.push(Check::holds(
        format!("psic external SOP3 {:.3e} < SOP2 {:.3e} < SOP1 {:.3e}", p[2], p[1], p[0]),
        p[2] < p[1] && p[1] < p[0],
    ));

    let q44 = analyzer_at(
        &SystemConfig {
            partition_p: 4,
            group_size: 4,
            ..SystemConfig::default()
        },
        30.0,
    )?;
    for sic in [SicMode::Perfect, IPSIC] {
        for k in users(Scenario::Internal) {
            let q = SecrecyQuery::new(k, Scenario::Internal, sic);
            let (a, b) = (table.sop_closed_form(&q)?, q44.sop_closed_form(&q)?);
            checks.push(Check::holds(
                format!("{} internal k={k}: P=2,Q=8 {a:.3e} < P=Q=4 {b:.3e}", sic.label()),
                a < b,
            ));
        }
    }

    for sic in [SicMode::Perfect, IPSIC] {
        let internal = power_offset_sweep(Scenario::Internal, sic)?;
        checks.push(Check::holds(
            format!("{} internal system SOP increasing in a_T", sic.label()),
            internal.windows(2).all(|w| w[1] > w[0]),
        ));
        let external = power_offset_sweep(Scenario::External, sic)?;
        let (arg, min) = external
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i, *v))
            .unwrap_or((0, f64::NAN));
        let interior = arg > 0 && arg + 1 < external.len();
        checks.push(Check::holds(
            format!(
                "{} external system SOP has an interior minimum {min:.4e} at a_T={:.2}",
                sic.label(),
                0.02 * (arg + 1) as f64
            ),
            interior && external[0] > min && external[external.len() - 1] > min,
        ));
    }
    Ok(checks)
}

fn determinism(o: &ValidationOptions) -> Result<Vec<Check>> {
    let mut spec = SweepSpec::new(SystemConfig::default(), SweepVariable::SnrDb, SweepRange::new(0.0, 30.0, 10.0));
    spec.series = "determinism".into();
    spec.sic_modes = vec![SicMode::Perfect, IPSIC];
    spec.outputs = [OutputKind::Analytic, OutputKind::Empirical, OutputKind::SystemSop]
        .into_iter()
        .collect();
    spec.include_oma = true;
    spec.sim.trials = 20_000;
    spec.sim.seed = o.seed;
    let specs = [spec];
    let first = sweep_rows(&specs, Some(1))?;
    let again = sweep_rows(&specs, Some(1))?;
    let four = sweep_rows(&specs, Some(4))?;
    Ok(vec![
        Check::holds("repeated run byte-identical", first == again),
        Check::holds("1 vs 4 workers byte-identical", first == four),
    ])
}

/// Runs a single criterion by id.
pub fn run_criterion(id: u32, options: &ValidationOptions) -> CriterionOutcome {
    let name = criterion_name(id).unwrap_or("unknown");
    let checks = match id {
        1 => pool(options.workers, || analytic_vs_simulation(options)),
        2 => diversity_orders(),
        3 => error_floor(),
        4 => asymptote_convergence(),
        5 => cascade_distribution(options),
        6 => order_statistics(options),
        7 => quadrature(),
        8 => bessel_functions(options),
        9 => throughput_convergence(options),
        10 => qualitative_orderings(),
        11 => determinism(options),
        _ => Err(crate::Error::InvalidQuery(format!("no criterion {id}"))),
    };
    CriterionOutcome::from_checks(id, name, checks)
}

/// Runs every criterion in order.
pub fn run_validation(options: &ValidationOptions) -> ValidationReport {
    let ids: Vec<u32> = CRITERIA.iter().map(|(id, _)| *id).collect();
    run_selected(&ids, options)
}

/// Runs the listed criteria in the given order.
pub fn run_selected(ids: &[u32], options: &ValidationOptions) -> ValidationReport {
    let criteria: Vec<CriterionOutcome> = ids.iter().map(|id| run_criterion(*id, options)).collect();
    ValidationReport {
        level: options.level,
        trials: options.level.trials(),
        seed: options.seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}
