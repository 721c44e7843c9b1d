use std::path::Path;

use dpmirror::problems::{verify_maurey_suite, MaureyReport, MaureySuite};
use serde::Serialize;

use crate::fail::{CliError, Kind};
use crate::io;

#[derive(Serialize)]
struct VerifyReport<'a> {
    code_version: &'a str,
    reps: usize,
    seed: u64,
    passed: usize,
    total: usize,
    suites: Vec<MaureyReport>,
}

pub fn parse_suites(name: &str) -> Result<Vec<MaureySuite>, CliError> {
    if name == "all" {
        return Ok(MaureySuite::ALL.to_vec());
    }
    name.parse::<MaureySuite>().map(|s| vec![s]).map_err(|_| {
        let known: Vec<&str> = MaureySuite::ALL.iter().map(|s| s.as_str()).collect();
        CliError::new(Kind::Config, format!("unknown suite '{name}'; expected all or one of {}", known.join(", ")))
    })
}

/// Runs the suites and writes a JSON report. Returns `(passed, total)`.
pub fn verify(suite: &str, reps: usize, seed: u64, out: &Path, jobs: Option<usize>) -> Result<(usize, usize), CliError> {
    let suites = parse_suites(suite)?;
    let pool = crate::runner::thread_pool(jobs)?;
    let reports: Vec<MaureyReport> = pool.install(|| {
        suites.iter().map(|&s| verify_maurey_suite(s, reps, seed)).collect::<Result<_, _>>()
    })?;
    for r in &reports {
        if let Some(w) = &r.warning {
            eprintln!("warning: {}: {w}", r.suite);
        }
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    let total = reports.len();
    let report = VerifyReport { code_version: env!("CARGO_PKG_VERSION"), reps, seed, passed, total, suites: reports };
    io::write_json(out, &report)?;
    Ok((passed, total))
}
