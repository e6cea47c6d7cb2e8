//! Parameter sweeps producing one CSV row per (sweep value, user).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Scenario, SicMode, SystemConfig, ValidationPolicy};
use crate::error::{Error, Result};
use crate::monte_carlo::{
    empirical_sop, oma_baseline_sop, oma_throughput, EveTreatment, OrderingMode,
    SimOptions,
};
use crate::secrecy::{
    system_sop, throughput_delay_limited, SecrecyAnalyzer, SecrecyQuery, DEFAULT_QUADRATURE_ORDER,
};

pub mod presets;

pub const CSV_HEADER: &str = "series,scenario,sic,sweep_value,user_k,analytic_sop,asymptotic_sop,empirical_sop,empirical_stderr,system_sop,throughput_bpcu";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    SnrDb,
    SnrEveDb,
    /// Two-user allocation `{a_T, 1 - a_T}`.
    PowerOffsetAT,
    /// Total elements `M`, keeping `P` and setting `Q = M / P`.
    RisElements,
    /// Common target rate of every user.
    TargetRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Analytic,
    Asymptotic,
    Empirical,
    SystemSop,
    Throughput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn new(start: f64, end: f64, step: f64) -> Self {
        Self { start, end, step }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidSweep("range bounds must be finite".into()));
        }
        if self.start > self.end {
            return Err(Error::InvalidSweep(format!(
                "empty range: start {} exceeds end {}",
                self.start, self.end
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidSweep("step must be positive".into()));
        }
        Ok(())
    }

    /// `start, start + step, ...` up to `end` inclusive, computed by index so
    /// values do not accumulate rounding.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

/// One curve family: a base configuration, a swept variable and the outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Free-form label copied to the `series` column.
    pub series: String,
    pub config: SystemConfig,
    pub scenario: Scenario,
    pub sic_modes: Vec<SicMode>,
    pub variable: SweepVariable,
    pub range: SweepRange,
    pub outputs: BTreeSet<OutputKind>,
    /// Adds rows for the TDMA baseline (`sic = oma`), empirical only.
    pub include_oma: bool,
    pub sim: SimOptions,
    pub quad_order_d: usize,
    pub quad_order_s: usize,
}

impl SweepSpec {
    pub fn new(config: SystemConfig, variable: SweepVariable, range: SweepRange) -> Self {
        Self {
            series: "custom".into(),
            scenario: config.scenario,
            sic_modes: vec![config.sic_mode],
            config,
            variable,
            range,
            outputs: [OutputKind::Analytic, OutputKind::SystemSop, OutputKind::Throughput]
                .into_iter()
                .collect(),
            include_oma: false,
            sim: SimOptions {
                eve: EveTreatment::Sampled,
                ordering: OrderingMode::CommonVariance,
                trials: 100_000,
                seed: 1,
                workers: None,
            },
            quad_order_d: DEFAULT_QUADRATURE_ORDER,
            quad_order_s: DEFAULT_QUADRATURE_ORDER,
        }
    }

    fn needs_simulation(&self) -> bool {
        self.outputs.contains(&OutputKind::Empirical) || self.include_oma
    }

    fn policy(&self) -> ValidationPolicy {
        ValidationPolicy {
            require_descending_power: self.variable != SweepVariable::PowerOffsetAT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.range.validate()?;
        if self.sic_modes.is_empty() && !self.include_oma {
            return Err(Error::InvalidSweep("no SIC mode selected".into()));
        }
        if self.outputs.is_empty() && !self.include_oma {
            return Err(Error::InvalidSweep("no outputs selected".into()));
        }
        if self.needs_simulation() && self.sim.trials == 0 {
            return Err(Error::InvalidSweep("empirical output needs at least one trial".into()));
        }
        for v in self.range.values()? {
            self.config_at(v)?;
        }
        Ok(())
    }

    /// The configuration at sweep value `v`, validated.
    pub fn config_at(&self, v: f64) -> Result<SystemConfig> {
        let mut cfg = self.config.clone();
        cfg.scenario = self.scenario;
        match self.variable {
            SweepVariable::SnrDb => cfg.snr_legit_db = v,
            SweepVariable::SnrEveDb => cfg.snr_eve_db = v,
            SweepVariable::PowerOffsetAT => cfg = cfg.with_power_offset(v)?,
            SweepVariable::RisElements => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(Error::InvalidSweep(format!("element count {v} is not a positive integer")));
                }
                let m = v as usize;
                if m % cfg.partition_p != 0 {
                    return Err(Error::InvalidSweep(format!(
                        "element count {m} is not a multiple of partition_p = {}",
                        cfg.partition_p
                    )));
                }
                cfg.ris_elements = m;
                cfg.group_size = m / cfg.partition_p;
            }
            SweepVariable::TargetRate => cfg.target_rates = vec![v; cfg.user_count],
        }
        cfg.validate_with(self.policy())?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Row {
    user_k: usize,
    analytic: Option<f64>,
    asymptotic: Option<f64>,
    empirical: Option<f64>,
    stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Block {
    sic: &'static str,
    value: f64,
    rows: Vec<Row>,
    system_sop: Option<f64>,
    throughput: Option<f64>,
}

fn evaluate(spec: &SweepSpec, value: f64, sic: SicMode) -> Result<Block> {
    let cfg = spec.config_at(value)?;
    let analyzer = SecrecyAnalyzer::with_policy(&cfg, spec.policy())?;
    let users = cfg.legitimate_users(spec.scenario);
    let mut rows: Vec<Row> = users.iter().map(|&k| Row { user_k: k, ..Row::default() }).collect();
    let wants = |o| spec.outputs.contains(&o);
    for row in rows.iter_mut() {
        let q = SecrecyQuery::new(row.user_k, spec.scenario, sic)
            .with_orders(spec.quad_order_d, spec.quad_order_s);
        if wants(OutputKind::Analytic) {
            row.analytic = Some(analyzer.sop_closed_form(&q)?);
        }
        if wants(OutputKind::Asymptotic) {
            row.asymptotic = Some(analyzer.sop_asymptotic(&q)?.clamp(0.0, 1.0));
        }
    }
    if wants(OutputKind::Empirical) {
        let sim = SimOptions {
            workers: None,
            ..spec.sim
        };
        let result = empirical_sop(&cfg, analyzer.stats(), spec.scenario, sic, &sim)?;
        for (row, (p, se)) in rows
            .iter_mut()
            .zip(result.empirical_sop.iter().zip(&result.standard_error))
        {
            row.empirical = Some(*p);
            row.stderr = Some(*se);
        }
    }
    // System metrics use the analytic SOP when available.
    let basis: Option<Vec<f64>> = rows
        .iter()
        .map(|r| r.analytic.or(r.empirical))
        .collect();
    let rates: Vec<f64> = users.iter().map(|k| cfg.target_rates[k - 1]).collect();
    let (system, throughput) = match basis {
        Some(p) => (
            wants(OutputKind::SystemSop).then(|| system_sop(&p)).transpose()?,
            wants(OutputKind::Throughput)
                .then(|| throughput_delay_limited(&p, &rates))
                .transpose()?,
        ),
        None => (None, None),
    };
    Ok(Block {
        sic: sic.label(),
        value,
        rows,
        system_sop: system,
        throughput,
    })
}

fn evaluate_oma(spec: &SweepSpec, value: f64) -> Result<Block> {
    let cfg = spec.config_at(value)?;
    let analyzer = SecrecyAnalyzer::with_policy(&cfg, spec.policy())?;
    let sim = SimOptions {
        workers: None,
        ..spec.sim
    };
    let result = oma_baseline_sop(&cfg, analyzer.stats(), &sim)?;
    let rows = result
        .users
        .iter()
        .zip(result.empirical_sop.iter().zip(&result.standard_error))
        .map(|(&k, (p, se))| Row {
            user_k: k,
            empirical: Some(*p),
            stderr: Some(*se),
            ..Row::default()
        })
        .collect();
    Ok(Block {
        sic: "oma",
        value,
        rows,
        system_sop: Some(system_sop(&result.empirical_sop)?),
        throughput: Some(oma_throughput(&cfg, &result)?),
    })
}

fn scenario_label(s: Scenario) -> &'static str {
    match s {
        Scenario::External => "external",
        Scenario::Internal => "internal",
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn render(spec: &SweepSpec, blocks: &[Block], out: &mut String) {
    for b in blocks {
        for r in &b.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                spec.series,
                scenario_label(spec.scenario),
                b.sic,
                b.value,
                r.user_k,
                cell(r.analytic),
                cell(r.asymptotic),
                cell(r.empirical),
                cell(r.stderr),
                cell(b.system_sop),
                cell(b.throughput),
            );
        }
    }
}

/// Evaluates every point of every spec and returns the CSV body (no header).
///
/// Points run in parallel on a pool of `workers` threads; rows are emitted
/// in spec, SIC mode, sweep value order regardless of scheduling.
pub fn sweep_rows(specs: &[SweepSpec], workers: Option<usize>) -> Result<String> {
    for spec in specs {
        spec.validate()?;
    }
    let mut jobs = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let values = spec.range.values()?;
        for sic in &spec.sic_modes {
            for &v in &values {
                jobs.push((i, Some(*sic), v));
            }
        }
        if spec.include_oma {
            for &v in &values {
                jobs.push((i, None, v));
            }
        }
    }
    let run = || -> Result<Vec<(usize, Block)>> {
        jobs.par_iter()
            .map(|&(i, sic, v)| {
                let block = match sic {
                    Some(sic) => evaluate(&specs[i], v, sic)?,
                    None => evaluate_oma(&specs[i], v)?,
                };
                Ok((i, block))
            })
            .collect()
    };
    let blocks = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidSweep(format!("worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let mut out = String::new();
    for (i, spec) in specs.iter().enumerate() {
        let mine: Vec<Block> = blocks
            .iter()
            .filter(|(j, _)| *j == i)
            .map(|(_, b)| b.clone())
            .collect();
        render(spec, &mine, &mut out);
    }
    Ok(out)
}

/// Writes the header and every row of `specs` to `out`.
pub fn run_sweep<W: Write>(specs: &[SweepSpec], workers: Option<usize>, out: &mut W) -> Result<()> {
    let body = sweep_rows(specs, workers)?;
    writeln!(out, "{CSV_HEADER}")?;
    out.write_all(body.as_bytes())?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values() {
        assert_eq!(SweepRange::new(0.0, 50.0, 5.0).values().unwrap().len(), 11);
        assert_eq!(SweepRange::new(1.0, 1.0, 0.5).values().unwrap(), vec![1.0]);
        assert!(matches!(
            SweepRange::new(2.0, 1.0, 1.0).values(),
            Err(Error::InvalidSweep(_))
        ));
        assert!(SweepRange::new(0.0, 1.0, 0.0).values().is_err());
        let v = SweepRange::new(0.05, 0.95, 0.05).values().unwrap();
        assert_eq!(v.len(), 19);
    }

    #[test]
    fn variables_apply() {
        let base = SystemConfig::default();
        let spec = SweepSpec::new(base.clone(), SweepVariable::RisElements, SweepRange::new(8.0, 8.0, 1.0));
        let cfg = spec.config_at(8.0).unwrap();
        assert_eq!((cfg.ris_elements, cfg.group_size), (8, 4));
        assert!(spec.config_at(7.0).is_err());

        let mut two = base.clone();
        two.user_count = 2;
        two.power_alloc = vec![0.7, 0.3];
        two.dist_ris_user = vec![6.0, 4.0];
        two.target_rates = vec![0.04, 0.04];
        let spec = SweepSpec::new(two, SweepVariable::PowerOffsetAT, SweepRange::new(0.1, 0.9, 0.1));
        let cfg = spec.config_at(0.2).unwrap();
        assert_eq!(cfg.power_alloc, vec![0.2, 0.8]);

        let spec = SweepSpec::new(base, SweepVariable::TargetRate, SweepRange::new(0.1, 0.1, 1.0));
        assert_eq!(spec.config_at(0.1).unwrap().target_rates, vec![0.1; 3]);
    }

    #[test]
    fn analytic_rows_are_deterministic_and_complete() {
        let mut spec = SweepSpec::new(
            SystemConfig::default(),
            SweepVariable::SnrDb,
            SweepRange::new(0.0, 20.0, 10.0),
        );
        spec.sic_modes = vec![SicMode::Perfect];
        let mut a = Vec::new();
        run_sweep(std::slice::from_ref(&spec), Some(1), &mut a).unwrap();
        let mut b = Vec::new();
        run_sweep(std::slice::from_ref(&spec), Some(3), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert!(lines[1].starts_with("custom,external,psic,0,1,"));
    }
}
