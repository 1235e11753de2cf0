//! Scenario files: TOML with sections `[problem]`, `[term.N]`, `[schedule]`,
//! `[run]`, `[output]` and `[sweep]`.
//!
//! ```toml
//! [problem]
//! name = "unit-lag"
//! t0 = 0.0
//! x0 = 1.0
//! phi = "1"
//! forcing = "0"
//!
//! [term.1]
//! coefficient = "0.2"
//! lag = 1.0            # or: delay = "t - 1 - 0.5*sin(t)"
//!
//! [schedule]
//! impulses = [[2.5, 0.5]]
//! periodic = { start = 1.0, period = 1.0, multiplier = 2.0 }
//!
//! [run]
//! horizon = 100.0
//! step = 0.001
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::criteria::CriteriaConfig;
use crate::empirics::{Knob, SweepSettings};
use crate::model::{validate, DelayFn, Impulse, ImpulseSchedule, PeriodicTail, Problem, ScalarFn};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub problem: ProblemSection,
    /// Keyed by term number, `[term.1]`, `[term.2]`, ...
    pub term: BTreeMap<String, TermSection>,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub t0: f64,
    pub x0: f64,
    /// Initial function on `t < t0`; defaults to the constant `x0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    pub coefficient: String,
    /// Constant lag, `h(t) = t - lag`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag: Option<f64>,
    /// Delayed argument `h(t)` as an expression.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSection {
    pub start: f64,
    pub period: f64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// `[time, multiplier]` pairs.
    #[serde(default)]
    pub impulses: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<PeriodicSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub horizon: f64,
    pub step: f64,
    pub grid_n: usize,
    pub max_iter: usize,
    pub cap: f64,
    pub tail_fraction: f64,
    pub margin: f64,
    pub transient_cut: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        let criteria = CriteriaConfig::default();
        RunSection {
            horizon: 100.0,
            step: 0.01,
            grid_n: criteria.grid_n,
            max_iter: criteria.max_iter,
            cap: criteria.cap,
            tail_fraction: criteria.tail_fraction,
            margin: criteria.margin,
            transient_cut: 0.0,
        }
    }
}

/// File names, relative to `--out` unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub trajectory: String,
    pub report: String,
    pub report_csv: String,
    pub coefficients: String,
    pub sweep: String,
    /// Rows of the transformed coefficient table.
    pub samples: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            trajectory: "trajectory.csv".into(),
            report: "report.txt".into(),
            report_csv: "report.csv".into(),
            coefficients: "coefficients.csv".into(),
            sweep: "sweep.csv".into(),
            samples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub knob: String,
    pub values: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_seeds() -> usize {
    5
}

fn parse_scalar(text: &str, field: &str) -> Result<ScalarFn, CliError> {
    ScalarFn::parse(text).map_err(|e| CliError::Config(format!("{field}: {e} in \"{text}\"")))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<ScenarioConfig, CliError> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.check_run()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }

    fn check_run(&self) -> Result<(), CliError> {
        let r = &self.run;
        let positive = [
            ("horizon", r.horizon),
            ("step", r.step),
            ("cap", r.cap),
            ("tail_fraction", r.tail_fraction),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CliError::Config(format!(
                    "run.{name} must be positive, got {value}"
                )));
            }
        }
        if r.grid_n == 0 || r.max_iter == 0 {
            return Err(CliError::Config(
                "run.grid_n and run.max_iter must be positive".into(),
            ));
        }
        if !(r.margin >= 0.0) || !(r.transient_cut >= 0.0) {
            return Err(CliError::Config(
                "run.margin and run.transient_cut must be non-negative".into(),
            ));
        }
        if r.horizon <= self.problem.t0 {
            return Err(CliError::Config(format!(
                "run.horizon {} must exceed problem.t0 {}",
                r.horizon, self.problem.t0
            )));
        }
        Ok(())
    }

    /// Build the problem and run the hypothesis checks up to the horizon.
    pub fn problem(&self) -> Result<Problem, CliError> {
        let p = &self.problem;
        let mut terms: Vec<(usize, &TermSection)> = Vec::new();
        for (key, term) in &self.term {
            let n = key.parse::<usize>().map_err(|_| {
                CliError::Config(format!(
                    "term section name must be a number, got term.{key}"
                ))
            })?;
            terms.push((n, term));
        }
        terms.sort_by_key(|(n, _)| *n);

        let mut builder = Problem::builder().t0(p.t0).x0(p.x0);
        for (n, term) in terms {
            let coefficient = parse_scalar(&term.coefficient, &format!("term.{n}.coefficient"))?;
            let delay = match (&term.delay, term.lag) {
                (Some(text), None) => DelayFn::parse(text)
                    .map_err(|e| CliError::Config(format!("term.{n}.delay: {e} in \"{text}\"")))?,
                (None, Some(lag)) => DelayFn::constant_lag(lag)
                    .map_err(|e| CliError::Config(format!("term.{n}.lag: {e}")))?,
                _ => {
                    return Err(CliError::Config(format!(
                        "term.{n} needs exactly one of `lag` and `delay`"
                    )))
                }
            };
            builder = builder.term(coefficient, delay);
        }
        builder = builder.phi(match &p.phi {
            Some(text) => parse_scalar(text, "problem.phi")?,
            None => ScalarFn::Constant(p.x0),
        });
        if let Some(text) = &p.forcing {
            builder = builder.forcing(parse_scalar(text, "problem.forcing")?);
        }
        builder = builder.schedule(self.schedule()?);
        let problem = builder
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let report = validate(&problem, self.run.horizon);
        if let Some(failure) = report.first_failure() {
            let at = failure
                .witness
                .map(|w| format!(" at t = {} (value {})", w.t, w.value))
                .unwrap_or_default();
            return Err(CliError::Config(format!(
                "hypothesis {} fails{at}: {}",
                failure.hypothesis, failure.note
            )));
        }
        Ok(problem)
    }

    fn schedule(&self) -> Result<ImpulseSchedule, CliError> {
        let explicit = self
            .schedule
            .impulses
            .iter()
            .map(|&[time, multiplier]| Impulse::new(time, multiplier))
            .collect();
        let tail = self.schedule.periodic.map(|p| PeriodicTail {
            start: p.start,
            period: p.period,
            multiplier: p.multiplier,
        });
        ImpulseSchedule::new(explicit, tail).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn criteria(&self) -> CriteriaConfig {
        CriteriaConfig {
            grid_n: self.run.grid_n,
            max_iter: self.run.max_iter,
            cap: self.run.cap,
            tail_fraction: self.run.tail_fraction,
            margin: self.run.margin,
        }
    }

    /// The `[sweep]` section as a knob, its values and settings.
    pub fn sweep_plan(&self, base_seed: u64) -> Result<(Knob, Vec<f64>, SweepSettings), CliError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("the sweep command needs a [sweep] section".into()))?;
        let knob = sweep.knob.parse::<Knob>().map_err(CliError::Config)?;
        let settings = SweepSettings {
            horizon: self.run.horizon,
            step: self.run.step,
            seeds: sweep.seeds,
            base_seed,
            transient_cut: self.run.transient_cut,
            criteria: self.criteria(),
        };
        Ok((knob, sweep.values.clone(), settings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[problem]
name = "sample"
x0 = 1.0
phi = "cos(t)"
forcing = "0.1*sin(2*t)"

[term.2]
coefficient = "0.1"
delay = "t - 1 - 0.5*sin(t)*sin(t)"

[term.1]
coefficient = "0.2 + 0.05*cos(t)"
lag = 0.75

[schedule]
impulses = [[2.5, 0.5]]
periodic = { start = 3.0, period = 1.5, multiplier = 1.25 }

[run]
horizon = 20.0
step = 0.01
"#;

    #[test]
    fn parses_terms_in_numeric_order() {
        let config = ScenarioConfig::from_toml(SAMPLE).unwrap();
        let p = config.problem().unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.terms()[0].delay.fixed_lag(), Some(0.75));
        assert_eq!(p.schedule().materialize(6.0).len(), 4);
        assert_eq!(config.run.grid_n, CriteriaConfig::default().grid_n);
    }

    #[test]
    fn serialization_round_trips() {
        let config = ScenarioConfig::from_toml(SAMPLE).unwrap();
        let again = ScenarioConfig::from_toml(&config.to_toml()).unwrap();
        assert_eq!(config, again);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = SAMPLE.replace("phi = \"cos(t)\"", "phi = \"cos(t\"");
        let err = ScenarioConfig::from_toml(&bad)
            .unwrap()
            .problem()
            .unwrap_err();
        assert!(err.to_string().contains("problem.phi"), "{err}");
        assert!(err.to_string().contains("byte"), "{err}");
        let both = SAMPLE.replace("lag = 0.75", "lag = 0.75\ndelay = \"t\"");
        assert!(ScenarioConfig::from_toml(&both).unwrap().problem().is_err());
        let negative = SAMPLE.replace("step = 0.01", "step = -0.01");
        assert!(ScenarioConfig::from_toml(&negative).is_err());
        let unknown = SAMPLE.replace("[run]", "[run]\nhorizn = 3.0");
        assert!(ScenarioConfig::from_toml(&unknown).is_err());
    }
}
