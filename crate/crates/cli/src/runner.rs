//! Runs validated jobs and collects the structured report.

use nonlocal_core::convergence::{sweep, SweepPoint};
use nonlocal_core::functionals::{bound_report, derivative_norm_pp, norm_nodes, BoundReport};
use nonlocal_core::Theorem;
use serde::Serialize;

use crate::config::Job;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobReport {
    pub id: String,
    pub theorem: Theorem,
    pub m: usize,
    pub p: f64,
    pub body: String,
    pub function: String,
    pub workers: usize,
    pub points: Vec<SweepPoint>,
    pub limit: Option<f64>,
    pub limit_stderr: Option<f64>,
    pub rate: Option<f64>,
    pub aitken_limit: Option<f64>,
    pub aitken_degenerate: Option<bool>,
    pub target: Option<f64>,
    pub rel_gap: Option<f64>,
    pub tolerance: f64,
    pub bound: Option<BoundReport>,
    pub verdict: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated: Option<String>,
    pub jobs: Vec<JobReport>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.jobs.iter().all(|j| j.verdict)
    }
}

pub fn run_job(job: &Job) -> JobReport {
    let spec = &job.spec;
    let mut report = JobReport {
        id: job.id.clone(),
        theorem: spec.theorem,
        m: spec.m,
        p: spec.p,
        body: spec.body.descriptor(),
        function: spec.f.name().to_string(),
        workers: job.plan.workers(),
        points: Vec::new(),
        limit: None,
        limit_stderr: None,
        rate: None,
        aitken_limit: None,
        aitken_degenerate: None,
        target: None,
        rel_gap: None,
        tolerance: job.options.tolerance,
        bound: None,
        verdict: false,
        error: None,
    };
    let result = match sweep(spec, &job.schedule, &job.plan, &job.options) {
        Ok(r) => r,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    report.points = result.points.clone();
    report.limit = Some(result.extrapolated_limit);
    report.limit_stderr = Some(result.limit_stderr);
    report.rate = Some(result.fitted_rate);
    report.aitken_limit = Some(result.aitken.limit);
    report.aitken_degenerate = Some(result.aitken.degenerate);
    report.target = Some(result.target);
    report.rel_gap = Some(result.rel_gap);
    report.verdict = result.verdict;
    if let Some(factor) = job.bound_factor {
        let norm = derivative_norm_pp(
            &spec.f,
            spec.m,
            spec.p,
            job.plan.outer_box_radius,
            norm_nodes(spec.body.dim()),
        );
        let values = result
            .points
            .iter()
            .map(|p| (p.parameter, p.value, p.stderr))
            .collect();
        match bound_report(norm, values, factor) {
            Ok(b) => report.bound = Some(b),
            Err(e) => {
                report.verdict = false;
                report.error = Some(e.to_string());
            }
        }
    }
    report
}

/// Runs the jobs in order; parallelism lives inside each evaluation.
pub fn run_jobs(jobs: &[Job], seed: u64, workers: usize, generated: Option<String>) -> Report {
    Report {
        seed,
        workers,
        generated,
        jobs: jobs.iter().map(run_job).collect(),
    }
}
