use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use risnoma::config::{EveInterferenceVariant, Scenario, SicMode, SystemConfig};
use risnoma::monte_carlo::{EveTreatment, OrderingMode, SimOptions};
use risnoma::special_math::{gauss_laguerre, MAX_RULE_ORDER};
use risnoma::sweep::presets::{preset, PRESET_NAMES};
use risnoma::sweep::{run_sweep, OutputKind, SweepRange, SweepSpec, SweepVariable};
use risnoma::validation::{
    criterion_name, run_selected, run_validation, Fault, Level, ValidationOptions, CRITERIA, FAULT_ENV, REPORT_SCHEMA,
};
use risnoma::Error;

#[derive(Parser)]
#[command(name = "risnoma", version, about = "Secrecy outage sweeps, validation and quadrature audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a parameter sweep or a figure preset and write CSV.
    Sweep(SweepArgs),
    /// Run the acceptance suite and write a JSON report.
    Validate(ValidateArgs),
    /// Dump Gauss-Laguerre nodes and weights as CSV.
    QuadratureTable(QuadratureArgs),
    /// List or describe figure presets.
    Preset(PresetArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    External,
    Internal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SicArg {
    Psic,
    Ipsic,
}

#[derive(Clone, Copy, ValueEnum)]
enum EveArg {
    Sampled,
    MeanField,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    CommonVariance,
    PerUserDistance,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    AsPrinted,
    WithNuTerm,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariableArg {
    SnrDb,
    SnrEveDb,
    #[value(name = "power_offset_aT", alias = "power-offset-at")]
    PowerOffsetAT,
    RisElements,
    TargetRate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Analytic,
    Asymptotic,
    Empirical,
    SystemSop,
    Throughput,
    /// Adds RIS-OMA baseline rows.
    Oma,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Args)]
struct Common {
    /// Base system configuration (JSON); Table I when omitted.
    #[arg(long, env = "RISNOMA_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, env = "RISNOMA_SCENARIO")]
    scenario: Option<ScenarioArg>,
    #[arg(long, value_enum, env = "RISNOMA_SIC")]
    sic: Option<SicArg>,
    #[arg(long, env = "RISNOMA_TRIALS", default_value_t = 100_000)]
    trials: u64,
    #[arg(long, env = "RISNOMA_SEED", default_value_t = 1)]
    seed: u64,
    /// Worker threads; machine parallelism when omitted.
    #[arg(long, env = "RISNOMA_WORKERS")]
    workers: Option<usize>,
    /// Output file, or `-` / `stdout`.
    #[arg(long, env = "RISNOMA_OUT", default_value = "stdout")]
    out: String,
    #[arg(long, value_enum, env = "RISNOMA_EVE", default_value = "sampled")]
    eve: EveArg,
    #[arg(long, value_enum, env = "RISNOMA_ORDERING", default_value = "common-variance")]
    ordering: OrderingArg,
    #[arg(long, value_enum, env = "RISNOMA_VARIANT")]
    variant: Option<VariantArg>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Figure preset; see `risnoma preset --list`.
    #[arg(long, env = "RISNOMA_PRESET", conflicts_with_all = ["variable", "config"])]
    preset: Option<String>,
    #[arg(long, value_enum, required_unless_present = "preset")]
    variable: Option<VariableArg>,
    #[arg(long, required_unless_present = "preset", allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, required_unless_present = "preset", allow_negative_numbers = true)]
    end: Option<f64>,
    #[arg(long, required_unless_present = "preset")]
    step: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "analytic,system-sop,throughput")]
    outputs: Vec<OutputArg>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, env = "RISNOMA_LEVEL", default_value = "quick")]
    level: LevelArg,
    #[arg(long, env = "RISNOMA_SEED", default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, env = "RISNOMA_WORKERS")]
    workers: Option<usize>,
    /// Report file, or `-` / `stdout`.
    #[arg(long, env = "RISNOMA_OUT", default_value = "stdout")]
    out: String,
    /// Run only these criteria (repeatable); all when omitted.
    #[arg(long = "criterion", value_name = "ID")]
    criteria: Vec<u32>,
    /// Print the report JSON schema and exit.
    #[arg(long)]
    schema: bool,
}

#[derive(Args)]
struct QuadratureArgs {
    /// Rule order D.
    #[arg(long, short = 'd')]
    order: usize,
    #[arg(long, env = "RISNOMA_OUT", default_value = "stdout")]
    out: String,
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long, conflicts_with = "describe")]
    list: bool,
    #[arg(long, value_name = "NAME")]
    describe: Option<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig { .. } | Error::InvalidSweep(_) | Error::InvalidQuery(_) | Error::Domain { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn open_out(path: &str) -> Result<Box<dyn Write>, Failure> {
    if path == "-" || path == "stdout" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(path).map_err(|e| Failure::Runtime(format!("{path}: {e}")))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn sic_mode(arg: SicArg) -> SicMode {
    match arg {
        SicArg::Psic => SicMode::Perfect,
        SicArg::Ipsic => SicMode::Imperfect { residual_level: 1.0 },
    }
}

fn scenario(arg: ScenarioArg) -> Scenario {
    match arg {
        ScenarioArg::External => Scenario::External,
        ScenarioArg::Internal => Scenario::Internal,
    }
}

fn sim_options(c: &Common) -> SimOptions {
    SimOptions {
        eve: match c.eve {
            EveArg::Sampled => EveTreatment::Sampled,
            EveArg::MeanField => EveTreatment::MeanField,
        },
        ordering: match c.ordering {
            OrderingArg::CommonVariance => OrderingMode::CommonVariance,
            OrderingArg::PerUserDistance => OrderingMode::PerUserDistance,
        },
        trials: c.trials,
        seed: c.seed,
        workers: c.workers,
    }
}

fn apply_overrides(spec: &mut SweepSpec, c: &Common) {
    if let Some(s) = c.scenario {
        spec.scenario = scenario(s);
    }
    if let Some(s) = c.sic {
        spec.sic_modes = vec![sic_mode(s)];
    }
    if let Some(v) = c.variant {
        spec.config.eve_interference_variant = match v {
            VariantArg::AsPrinted => EveInterferenceVariant::AsPrinted,
            VariantArg::WithNuTerm => EveInterferenceVariant::WithNuTerm,
        };
    }
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let sim = sim_options(&args.common);
    let mut specs = match &args.preset {
        Some(name) => preset(name, sim)?.specs,
        None => {
            let config = match &args.common.config {
                Some(path) => SystemConfig::from_json_file(path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
                None => SystemConfig::default(),
            };
            let variable = match args.variable.expect("required by clap") {
                VariableArg::SnrDb => SweepVariable::SnrDb,
                VariableArg::SnrEveDb => SweepVariable::SnrEveDb,
                VariableArg::PowerOffsetAT => SweepVariable::PowerOffsetAT,
                VariableArg::RisElements => SweepVariable::RisElements,
                VariableArg::TargetRate => SweepVariable::TargetRate,
            };
            let range = SweepRange::new(
                args.start.expect("required by clap"),
                args.end.expect("required by clap"),
                args.step.expect("required by clap"),
            );
            let mut spec = SweepSpec::new(config, variable, range);
            spec.outputs = args
                .outputs
                .iter()
                .filter_map(|o| match o {
                    OutputArg::Analytic => Some(OutputKind::Analytic),
                    OutputArg::Asymptotic => Some(OutputKind::Asymptotic),
                    OutputArg::Empirical => Some(OutputKind::Empirical),
                    OutputArg::SystemSop => Some(OutputKind::SystemSop),
                    OutputArg::Throughput => Some(OutputKind::Throughput),
                    OutputArg::Oma => None,
                })
                .collect();
            spec.include_oma = args.outputs.contains(&OutputArg::Oma);
            spec.sim = sim;
            vec![spec]
        }
    };
    for spec in specs.iter_mut() {
        apply_overrides(spec, &args.common);
        spec.validate()?;
    }
    let mut out = open_out(&args.common.out)?;
    run_sweep(&specs, args.common.workers, &mut out)?;
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<bool, Failure> {
    let mut out = open_out(&args.out)?;
    if args.schema {
        writeln!(out, "{REPORT_SCHEMA}")?;
        return Ok(true);
    }
    let fault = match std::env::var(FAULT_ENV) {
        Ok(v) if !v.is_empty() => {
            Some(Fault::parse(&v).ok_or_else(|| Failure::Usage(format!("{FAULT_ENV}: unknown fault '{v}'")))?)
        }
        _ => None,
    };
    let options = ValidationOptions {
        level: match args.level {
            LevelArg::Quick => Level::Quick,
            LevelArg::Full => Level::Full,
        },
        seed: args.seed,
        workers: args.workers,
        fault,
    };
    if let Some(bad) = args.criteria.iter().find(|id| criterion_name(**id).is_none()) {
        return Err(Failure::Usage(format!("no criterion {bad}; ids run from 1 to {}", CRITERIA.len())));
    }
    let report = if args.criteria.is_empty() {
        run_validation(&options)
    } else {
        run_selected(&args.criteria, &options)
    };
    for c in &report.criteria {
        eprintln!("{}", c.summary_line());
    }
    writeln!(out, "{}", report.to_json())?;
    out.flush()?;
    let failed = report.failed();
    if !failed.is_empty() {
        let names: Vec<String> = failed.iter().map(|c| format!("[{}] {}", c.id, c.name)).collect();
        eprintln!("failed criteria: {}", names.join(", "));
    }
    Ok(report.passed)
}

fn quadrature_table(args: QuadratureArgs) -> Result<(), Failure> {
    if args.order == 0 || args.order > MAX_RULE_ORDER {
        return Err(Failure::Usage(format!("order must lie in 1..={MAX_RULE_ORDER}, got {}", args.order)));
    }
    let rule = gauss_laguerre(args.order)?;
    let mut out = open_out(&args.out)?;
    out.write_all(rule.to_csv().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn preset_cmd(args: PresetArgs) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match args.describe {
        Some(name) => write!(out, "{}", preset(&name, SimOptions::default())?.describe())?,
        None => {
            for name in PRESET_NAMES {
                let p = preset(name, SimOptions::default())?;
                writeln!(out, "{name}\t{}\t{}", p.figure, p.title)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Validate(a) => validate(a),
        Command::QuadratureTable(a) => quadrature_table(a).map(|_| true),
        Command::Preset(a) => preset_cmd(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
