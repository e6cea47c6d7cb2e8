//! The full acceptance suite at 10^6 trials, one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use risnoma::validation::{run_criterion, Level, ValidationOptions, CRITERIA};

fn main() -> ExitCode {
    let options = ValidationOptions {
        level: Level::Full,
        ..ValidationOptions::default()
    };
    let mut failed = Vec::new();
    for (id, name) in CRITERIA {
        let start = Instant::now();
        let outcome = run_criterion(id, &options);
        println!("{} ({:.1}s)", outcome.summary_line(), start.elapsed().as_secs_f64());
        if !outcome.passed {
            for check in outcome.checks.iter().filter(|c| !c.passed) {
                println!("    {}: {:e} > {:e}", check.label, check.measured, check.threshold);
            }
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
