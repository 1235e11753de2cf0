//! Problem description: function families, impulse schedules and hypothesis checks.

mod expr;
mod function;
mod problem;
mod schedule;
mod validate;

use thiserror::Error;

pub use expr::{BinOp, Expr, Func, NamedConst, ParseError};
pub use function::{CustomFn, DelayFn, ScalarFn, StepTable};
pub use problem::{Problem, ProblemBuilder, Term};
pub use schedule::{Impulse, ImpulseSchedule, PeriodicTail};
pub use validate::{
    validate, validate_with, Check, CheckStatus, Hypothesis, ValidationOptions, ValidationReport,
    Witness,
};

/// Parse an expression in `t` into a [`ScalarFn::Expression`].
pub fn parse_expression(text: &str) -> Result<ScalarFn, ParseError> {
    ScalarFn::parse(text)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("a problem needs at least one delayed term")]
    NoTerms,
    #[error("initial point and value must be finite")]
    NonFiniteInitialData,
    #[error("impulse multiplier at t = {time} is zero")]
    ZeroMultiplier { time: f64 },
    #[error("invalid impulse schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid step table: {0}")]
    InvalidTable(String),
    #[error("invalid delay: {0}")]
    InvalidDelay(String),
    #[error("delayed argument h({t}) = {value} lies ahead of t")]
    AdvancedArgument { t: f64, value: f64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
}
