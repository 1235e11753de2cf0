//! Certificates of oscillation and non-oscillation.
//!
//! Non-oscillation comes from a non-negative solution of the characteristic
//! inequality (found by monotone iteration), from explicit window-integral
//! bounds, or by comparison with a certified problem. Oscillation comes from
//! window integrals that exceed `1/e` or `1` on a tail of the horizon. Both
//! directions also run on the impulse-free equivalent equation.
//!
//! Certificates concern the homogeneous equation: forcing and initial data
//! are ignored.

mod comparison;
mod explicit;
mod inequality;
mod report;

use thiserror::Error;

use crate::impulse_algebra::{AlgebraError, ImpulseProductIndex};
use crate::model::Problem;
use crate::transform::{remove_impulses, TransformError};

pub use comparison::{compare, corollary1, corollary2, ComparisonWitness};
pub use explicit::{check_theorem3, check_theorem8, WindowIntegral};
pub use inequality::{
    certify_by_inequality, solve_inequality, CharacteristicOperator, DivergenceReason,
    GridFunction, InequalityOutcome,
};
pub use report::{CriterionReport, TheoremId, Verdict, CSV_HEADER};

pub const INV_E: f64 = 0.367_879_441_171_442_33;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("impulse multiplier {multiplier} at t = {time} is not positive")]
    NonPositiveMultiplier { time: f64, multiplier: f64 },
    #[error("grid cell {cell} is too coarse for the largest delay span {max_lag}")]
    GridTooCoarse { max_lag: f64, cell: f64 },
    #[error("comparison hypothesis not met: {condition} ({witness})")]
    HypothesisNotMet {
        condition: String,
        witness: ComparisonWitness,
    },
    #[error("contradictory certificates: non-oscillation by {non_oscillation}, oscillation by {oscillation}")]
    Inconsistent {
        non_oscillation: TheoremId,
        oscillation: TheoremId,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Numerical knobs shared by all criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriteriaConfig {
    /// Uniform intervals on the working horizon.
    pub grid_n: usize,
    pub max_iter: usize,
    /// Iterates above this count as divergent.
    pub cap: f64,
    /// Share of the horizon used to estimate lower and upper limits.
    pub tail_fraction: f64,
    /// Strict-inequality margin for oscillation tests.
    pub margin: f64,
}

impl Default for CriteriaConfig {
    fn default() -> Self {
        CriteriaConfig {
            grid_n: 2000,
            max_iter: 200,
            cap: 1e3,
            tail_fraction: 0.5,
            margin: 1e-6,
        }
    }
}

impl CriteriaConfig {
    fn check(&self) -> Result<(), CriteriaError> {
        if self.grid_n < 100 {
            return Err(CriteriaError::InvalidInput(format!(
                "grid_n must be at least 100, got {}",
                self.grid_n
            )));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(CriteriaError::InvalidInput(format!(
                "tail_fraction must lie in (0, 1], got {}",
                self.tail_fraction
            )));
        }
        if !(self.cap > 0.0) || !(self.margin >= 0.0) {
            return Err(CriteriaError::InvalidInput(
                "cap and margin must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Index of the schedule up to `horizon`, rejecting `B_j <= 0`.
pub(crate) fn positive_index(
    problem: &Problem,
    horizon: f64,
) -> Result<ImpulseProductIndex, CriteriaError> {
    if let Some(imp) = problem.schedule().first_non_positive(horizon) {
        return Err(CriteriaError::NonPositiveMultiplier {
            time: imp.time,
            multiplier: imp.multiplier,
        });
    }
    Ok(ImpulseProductIndex::build(problem.schedule(), horizon)?)
}

/// `a <= b` up to a relative rounding allowance.
pub(crate) fn le_with_tie(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * a.abs().max(b.abs())
}

/// Run the non-oscillation route on the impulse-free equivalent equation,
/// then the oscillation route, and report the first certificate.
pub fn certify_via_equivalence(
    problem: &Problem,
    horizon: f64,
    config: &CriteriaConfig,
) -> Result<CriterionReport, CriteriaError> {
    positive_index(problem, horizon)?;
    let transformed = remove_impulses(problem, horizon)?;
    let base = &transformed.base;
    let inequality = certify_by_inequality(base, problem.t0(), horizon, config)?;
    if inequality.verdict == Verdict::NonOscillationCertified {
        return Ok(inequality.relabel(TheoremId::T7));
    }
    let explicit = check_theorem3(base, problem.t0(), horizon, config)?;
    if explicit.verdict == Verdict::NonOscillationCertified {
        return Ok(explicit.relabel(TheoremId::T7));
    }
    let oscillation = check_theorem8(base, horizon, config.tail_fraction, config)?;
    if oscillation.verdict == Verdict::OscillationCertified {
        return Ok(oscillation.relabel(TheoremId::T7));
    }
    let mut report = CriterionReport::inconclusive(TheoremId::T7);
    report.evidence.extend(inequality.evidence);
    report.evidence.extend(oscillation.evidence);
    report.parameters = oscillation.parameters;
    Ok(report)
}

/// Outcome of the full certification pipeline.
#[derive(Debug, Clone)]
pub struct Certification {
    /// First decisive report, or an inconclusive summary.
    pub decision: CriterionReport,
    /// Every report, in the order run.
    pub reports: Vec<CriterionReport>,
}

/// Explicit non-oscillation tests, explicit oscillation tests, the
/// characteristic inequality and the equivalence route, in that order.
///
/// All routes run; a non-oscillation certificate next to an oscillation
/// certificate is reported as [`CriteriaError::Inconsistent`].
pub fn certify(
    problem: &Problem,
    horizon: f64,
    config: &CriteriaConfig,
) -> Result<Certification, CriteriaError> {
    config.check()?;
    positive_index(problem, horizon)?;
    let t0 = problem.t0();
    let reports = vec![
        check_theorem3(problem, t0, horizon, config)?,
        check_theorem8(problem, horizon, config.tail_fraction, config)?,
        certify_by_inequality(problem, t0, horizon, config)?,
        certify_via_equivalence(problem, horizon, config)?,
    ];
    let non_osc = reports
        .iter()
        .find(|r| r.verdict == Verdict::NonOscillationCertified);
    let osc = reports
        .iter()
        .find(|r| r.verdict == Verdict::OscillationCertified);
    if let (Some(n), Some(o)) = (non_osc, osc) {
        return Err(CriteriaError::Inconsistent {
            non_oscillation: n.theorem,
            oscillation: o.theorem,
        });
    }
    let decision = reports
        .iter()
        .find(|r| r.verdict != Verdict::Inconclusive)
        .cloned()
        .unwrap_or_else(|| {
            let mut summary = CriterionReport::inconclusive(reports[0].theorem);
            for r in &reports {
                summary.evidence.extend(r.evidence.iter().cloned());
            }
            summary.parameters = reports[1].parameters.clone();
            summary
        });
    Ok(Certification { decision, reports })
}
