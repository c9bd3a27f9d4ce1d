//! Experiment runner behind the `nonlocal` binary.
//!
//! Exit codes: 0 when every verdict passes, 2 when any fails, 1 on
//! configuration or I/O errors.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

use std::io::Write;
use std::path::{Path, PathBuf};

use nonlocal_core::identities::{run_suite, Ops};
use nonlocal_core::mollifier::certify;

use crate::config::{CertifyConfig, ExperimentConfig, FamilyName, Format, Overrides};
use crate::error::CliError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub overrides: Overrides,
    pub no_timestamp: bool,
}

/// Runs every job of a config and writes the report to the configured
/// output, or to `out` when none is set. Progress goes to `log`.
pub fn run(opts: &RunOptions, out: &mut dyn Write, log: &mut dyn Write) -> i32 {
    match try_run(opts, out, log) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn try_run(opts: &RunOptions, out: &mut dyn Write, log: &mut dyn Write) -> Result<bool, CliError> {
    let mut cfg = ExperimentConfig::load(&opts.config)?;
    cfg.apply(&opts.overrides);
    let jobs = cfg.jobs()?;
    let generated = (!opts.no_timestamp)
        .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let mut reports = Vec::with_capacity(jobs.len());
    for job in &jobs {
        let r = runner::run_job(job);
        let _ = match (&r.error, r.rel_gap) {
            (Some(e), _) => writeln!(log, "{:<24} fail  {e}", r.id),
            (None, Some(gap)) => writeln!(
                log,
                "{:<24} {}  limit={:.6} target={:.6} rel_gap={:.2e} tol={:.0e}",
                r.id,
                if r.verdict { "pass" } else { "fail" },
                r.limit.unwrap_or(f64::NAN),
                r.target.unwrap_or(f64::NAN),
                gap,
                r.tolerance
            ),
            (None, None) => Ok(()),
        };
        reports.push(r);
    }
    let report = runner::Report {
        seed: cfg.seed,
        workers: cfg.workers,
        generated,
        jobs: reports,
    };
    let text = match cfg.format {
        Format::Csv => report::to_csv(&report),
        Format::Json => report::to_json(&report),
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?,
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            })?,
    }
    Ok(report.all_passed())
}

/// Runs the identity suite with the given operators and prints one line
/// per identity.
pub fn check_identities(seed: u64, quick: bool, ops: &Ops, out: &mut dyn Write) -> i32 {
    let report = match run_suite(seed, quick, ops) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_ERROR;
        }
    };
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{:<18} {}  cases={:<5} max_residual={:.3e} tol={:.0e}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.cases,
            c.max_residual,
            c.tolerance
        );
    }
    if report.all_passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Families certified when no config is given.
pub fn default_families() -> Vec<CertifyConfig> {
    let deltas = vec![0.5, 0.1, 0.01];
    let eps = |k: i32| (0..k).map(|i| 0.5 * 0.25f64.powi(i)).collect::<Vec<_>>();
    vec![
        CertifyConfig {
            kind: FamilyName::Shell,
            dim: 1,
            p: None,
            scale: None,
            deltas: deltas.clone(),
            epsilons: eps(8),
        },
        CertifyConfig {
            kind: FamilyName::Shell,
            dim: 2,
            p: None,
            scale: None,
            deltas: deltas.clone(),
            epsilons: eps(8),
        },
        CertifyConfig {
            kind: FamilyName::Fractional,
            dim: 1,
            p: Some(2.0),
            scale: None,
            deltas: deltas.clone(),
            epsilons: eps(10),
        },
        CertifyConfig {
            kind: FamilyName::Fractional,
            dim: 2,
            p: Some(2.0),
            scale: None,
            deltas,
            epsilons: eps(10),
        },
    ]
}

/// Certifies the `mollifiers` section of a config, or the default
/// families when `config` is `None`.
pub fn certify_mollifiers(config: Option<&Path>, out: &mut dyn Write) -> i32 {
    let families = match config {
        None => default_families(),
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) if c.mollifiers.is_empty() => {
                let _ = writeln!(out, "error: config has no `mollifiers` section");
                return EXIT_ERROR;
            }
            Ok(c) => c.mollifiers,
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
                return EXIT_ERROR;
            }
        },
    };
    let mut all = true;
    for fc in &families {
        let fam = match fc.family() {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
                return EXIT_ERROR;
            }
        };
        match certify(&fam, &fc.deltas, &fc.epsilons) {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "{:<28} pass  normalization={:.3e} tail_mismatch={:.3e}",
                    r.family, r.max_normalization_residual, r.max_tail_mismatch
                );
            }
            Err(nonlocal_core::Error::InvalidParameter(msg)) => {
                let _ = writeln!(out, "error: {msg}");
                return EXIT_ERROR;
            }
            Err(e) => {
                all = false;
                let _ = writeln!(out, "{:<28} FAIL  {e}", format!("{:?}(N={})", fam.kind(), fam.dim()));
            }
        }
    }
    if all {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
