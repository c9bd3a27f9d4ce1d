//! Experiment configuration: JSON schema and validation into runnable jobs.

use std::path::{Path, PathBuf};

use nonlocal_core::convergence::{Schedule, SweepOptions};
use nonlocal_core::{
    BodyKind, ConvexBody, FunctionalSpec, IntegrationPlan, MollifierFamily, MollifierKind,
    TestFunction, Theorem,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub jobs: Vec<JobConfig>,
    #[serde(default)]
    pub mollifiers: Vec<CertifyConfig>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub id: String,
    pub theorem: Theorem,
    pub function: String,
    pub body: BodyKind,
    pub m: usize,
    pub p: f64,
    #[serde(default)]
    pub mollifier: Option<MollifierConfig>,
    pub schedule: Schedule,
    pub plan: PlanConfig,
    pub tolerance: f64,
    /// Fit only the last k sweep points.
    #[serde(default)]
    pub fit_last: Option<usize>,
    /// Nodes per axis for the deterministic target computation.
    #[serde(default = "default_target_nodes")]
    pub target_nodes: usize,
    /// Uniform-bound factor for level-set jobs; `None` skips the check.
    #[serde(default)]
    pub bound_factor: Option<f64>,
}

fn default_target_nodes() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Shell,
    Fractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierConfig {
    pub kind: FamilyName,
    /// Exponent of the fractional family; defaults to the job's `p`.
    #[serde(default)]
    pub p: Option<f64>,
    /// Ignored by sweeps, which set `ε` from the schedule.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Profile multiplier; anything but 1 is an unnormalised fixture.
    #[serde(default)]
    pub scale: Option<f64>,
}

impl MollifierConfig {
    pub fn family(&self, dim: usize, default_p: f64) -> Result<MollifierFamily, CliError> {
        let kind = match self.kind {
            FamilyName::Shell => MollifierKind::Shell,
            FamilyName::Fractional => MollifierKind::Fractional {
                p: self.p.unwrap_or(default_p),
            },
        };
        let fam = MollifierFamily::new(kind, dim, self.epsilon.unwrap_or(0.1))?;
        Ok(fam.scaled(self.scale.unwrap_or(1.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanConfig {
    MonteCarlo {
        samples: u64,
        outer_box_radius: f64,
        #[serde(default = "default_strata")]
        strata: usize,
    },
    Quadrature {
        nodes_per_axis: usize,
        outer_box_radius: f64,
    },
}

fn default_strata() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub kind: FamilyName,
    pub dim: usize,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    pub deltas: Vec<f64>,
    pub epsilons: Vec<f64>,
}

impl CertifyConfig {
    pub fn family(&self) -> Result<MollifierFamily, CliError> {
        MollifierConfig {
            kind: self.kind,
            p: self.p,
            epsilon: self.epsilons.first().copied(),
            scale: self.scale,
        }
        .family(self.dim, 2.0)
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    /// Divide Monte Carlo sample counts by 10.
    pub quick: bool,
}

/// A validated job ready to run.
#[derive(Debug, Clone)]
pub struct Job {
    pub id: String,
    pub spec: FunctionalSpec,
    pub schedule: Schedule,
    pub plan: IntegrationPlan,
    pub options: SweepOptions,
    pub bound_factor: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(p) = &o.output {
            self.output = Some(p.clone());
        }
        if let Some(f) = o.format {
            self.format = f;
        }
        if o.quick {
            for job in &mut self.jobs {
                if let PlanConfig::MonteCarlo { samples, .. } = &mut job.plan {
                    *samples = (*samples / 10).max(1);
                }
            }
        }
    }

    /// Validates every job before anything is computed.
    pub fn jobs(&self) -> Result<Vec<Job>, CliError> {
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        let mut seen = std::collections::HashSet::new();
        self.jobs
            .iter()
            .map(|j| {
                if !seen.insert(j.id.as_str()) {
                    return Err(CliError::Config(format!("duplicate job id `{}`", j.id)));
                }
                self.build(j)
                    .map_err(|e| CliError::Config(format!("job `{}`: {e}", j.id)))
            })
            .collect()
    }

    fn build(&self, j: &JobConfig) -> Result<Job, CliError> {
        let body = ConvexBody::new(j.body.clone())?;
        let dim = body.dim();
        let f = TestFunction::by_name(&j.function, dim)?;
        let mollifier = match (&j.mollifier, j.theorem.is_level_set()) {
            (Some(m), _) => Some(m.family(dim, j.p)?),
            (None, true) => None,
            (None, false) => {
                return Err(CliError::Config(format!("{} needs a mollifier", j.theorem)))
            }
        };
        let spec = FunctionalSpec {
            theorem: j.theorem,
            f,
            body,
            m: j.m,
            p: j.p,
            parameter: j.schedule.start,
            mollifier,
        };
        spec.validate()?;
        j.schedule.validate()?;
        if !(j.tolerance > 0.0) {
            return Err(CliError::Config(format!(
                "tolerance must be positive, got {}",
                j.tolerance
            )));
        }
        let (plan, half) = match j.plan {
            PlanConfig::MonteCarlo {
                samples,
                outer_box_radius,
                strata,
            } => (
                IntegrationPlan::monte_carlo(samples, self.seed, self.workers)
                    .with_strata(strata),
                outer_box_radius,
            ),
            PlanConfig::Quadrature {
                nodes_per_axis,
                outer_box_radius,
            } => (IntegrationPlan::quadrature(nodes_per_axis), outer_box_radius),
        };
        if half < spec.f.support_radius() {
            return Err(CliError::Config(format!(
                "outer_box_radius {half} is below the support radius {} of `{}`",
                spec.f.support_radius(),
                j.function
            )));
        }
        let plan = plan.with_box(half);
        if let Some(b) = j.bound_factor {
            if !j.theorem.is_level_set() || !(b > 0.0) {
                return Err(CliError::Config(
                    "bound_factor needs a level-set theorem and a positive value".into(),
                ));
            }
        }
        Ok(Job {
            id: j.id.clone(),
            spec,
            schedule: j.schedule,
            plan,
            options: SweepOptions {
                tolerance: j.tolerance,
                fit_last: j.fit_last,
                target_plan: IntegrationPlan::quadrature(j.target_nodes).with_box(half),
            },
            bound_factor: j.bound_factor,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const JOB: &str = r#"{
        "seed": 5,
        "workers": 2,
        "jobs": [{
            "id": "a",
            "theorem": "nguyen_centered",
            "function": "gaussian",
            "body": {"kind": "box", "half_widths": [1.0]},
            "m": 1, "p": 2.0,
            "schedule": {"start": 0.2},
            "plan": {"method": "monte_carlo", "samples": 1000, "outer_box_radius": 6.0},
            "tolerance": 0.03
        }]
    }"#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::parse(JOB).unwrap();
        let jobs = c.jobs().unwrap();
        assert_eq!(jobs.len(), 1);
        assert_eq!(jobs[0].schedule.points, 7);
        assert_eq!(jobs[0].plan.workers(), 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad_p = JOB.replace("\"p\": 2.0", "\"p\": 0.5");
        let err = ExperimentConfig::parse(&bad_p).unwrap().jobs().unwrap_err();
        assert!(err.to_string().contains("p > 1"), "{err}");
        let bad_theorem = JOB.replace("nguyen_centered", "nguyen");
        assert!(ExperimentConfig::parse(&bad_theorem).is_err());
        let unknown_key = JOB.replace("\"m\": 1", "\"m\": 1, \"colour\": 3");
        assert!(ExperimentConfig::parse(&unknown_key).is_err());
        let small_box = JOB.replace("\"outer_box_radius\": 6.0", "\"outer_box_radius\": 2.0");
        assert!(ExperimentConfig::parse(&small_box).unwrap().jobs().is_err());
        let bbm = JOB.replace("nguyen_centered", "bbm_centered");
        assert!(ExperimentConfig::parse(&bbm).unwrap().jobs().is_err());
    }

    #[test]
    fn quick_divides_samples() {
        let mut c = ExperimentConfig::parse(JOB).unwrap();
        c.apply(&Overrides {
            quick: true,
            seed: Some(9),
            ..Overrides::default()
        });
        assert_eq!(c.seed, 9);
        assert!(matches!(c.jobs[0].plan, PlanConfig::MonteCarlo { samples: 100, .. }));
    }
}
