use std::fmt;
use std::sync::Arc;

use super::expr::{Expr, ParseError};
use super::ModelError;

/// Right-continuous step function: `values[i]` on `[breakpoints[i], breakpoints[i + 1])`,
/// with `values[0]` extended to the left of the first breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTable {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepTable {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(ModelError::InvalidTable(format!(
                "need equally many breakpoints and values (got {} and {})",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidTable("non-finite entry".into()));
        }
        if let Some(w) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(ModelError::InvalidTable(format!(
                "breakpoints not strictly ascending at index {}",
                w + 1
            )));
        }
        Ok(StepTable {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.values[idx.saturating_sub(1)]
    }
}

/// A function evaluated by closure, used for coefficients derived at runtime.
#[derive(Clone)]
pub struct CustomFn {
    label: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    discontinuities: Vec<f64>,
}

impl CustomFn {
    pub fn new(
        label: impl Into<String>,
        discontinuities: Vec<f64>,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomFn {
            label: label.into(),
            func: Arc::new(func),
            discontinuities,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomFn({})", self.label)
    }
}

/// Real function of time: coefficients `A_k`, forcing `f`, initial function `phi`.
#[derive(Debug, Clone)]
pub enum ScalarFn {
    Constant(f64),
    /// `amplitude * sin(angular_freq * t + phase) + offset`
    Sinusoid {
        amplitude: f64,
        angular_freq: f64,
        phase: f64,
        offset: f64,
    },
    Table(StepTable),
    Expression(Expr),
    /// Zero before `start`, `inner` from `start` on.
    Truncated {
        inner: Arc<ScalarFn>,
        start: f64,
    },
    Scaled {
        inner: Arc<ScalarFn>,
        factor: f64,
    },
    Custom(CustomFn),
}

impl ScalarFn {
    pub fn parse(text: &str) -> Result<ScalarFn, ParseError> {
        Expr::parse(text).map(ScalarFn::Expression)
    }

    pub fn zero() -> ScalarFn {
        ScalarFn::Constant(0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Constant(c) => *c,
            ScalarFn::Sinusoid {
                amplitude,
                angular_freq,
                phase,
                offset,
            } => amplitude * (angular_freq * t + phase).sin() + offset,
            ScalarFn::Table(table) => table.eval(t),
            ScalarFn::Expression(expr) => expr.eval(t),
            ScalarFn::Truncated { inner, start } => {
                if t < *start {
                    0.0
                } else {
                    inner.eval(t)
                }
            }
            ScalarFn::Scaled { inner, factor } => factor * inner.eval(t),
            ScalarFn::Custom(custom) => (custom.func)(t),
        }
    }

    /// `A^s`: zero for `t < s`.
    pub fn truncated(&self, start: f64) -> ScalarFn {
        if let ScalarFn::Truncated { start: s, .. } = self {
            if *s == start {
                return self.clone();
            }
        }
        ScalarFn::Truncated {
            inner: Arc::new(self.clone()),
            start,
        }
    }

    pub fn scaled(&self, factor: f64) -> ScalarFn {
        match self {
            ScalarFn::Constant(c) => ScalarFn::Constant(c * factor),
            _ => ScalarFn::Scaled {
                inner: Arc::new(self.clone()),
                factor,
            },
        }
    }

    /// Points where the function may jump.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            ScalarFn::Table(table) => table.breakpoints().to_vec(),
            ScalarFn::Truncated { inner, start } => {
                let mut out = inner.discontinuities();
                out.push(*start);
                out
            }
            ScalarFn::Scaled { inner, .. } => inner.discontinuities(),
            ScalarFn::Custom(custom) => custom.discontinuities.clone(),
            _ => Vec::new(),
        }
    }

    /// Expression text for the families that have one.
    pub fn to_expression_text(&self) -> Option<String> {
        match self {
            ScalarFn::Constant(c) => Some(Expr::Num(*c).to_string()),
            ScalarFn::Expression(expr) => Some(expr.to_string()),
            _ => None,
        }
    }
}

/// Delayed argument `h(t)`.
#[derive(Debug, Clone)]
pub enum DelayFn {
    /// `h(t) = t - lag`
    ConstantLag(f64),
    /// `h(t) = ratio * t`
    Proportional(f64),
    Expression(Expr),
    /// `h^s`: `inner` for `t >= start`, `start` before.
    Clamped {
        inner: Arc<DelayFn>,
        start: f64,
    },
}

impl DelayFn {
    pub fn constant_lag(lag: f64) -> Result<DelayFn, ModelError> {
        if !(lag.is_finite() && lag >= 0.0) {
            return Err(ModelError::InvalidDelay(format!(
                "lag must be >= 0, got {lag}"
            )));
        }
        Ok(DelayFn::ConstantLag(lag))
    }

    pub fn proportional(ratio: f64) -> Result<DelayFn, ModelError> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(ModelError::InvalidDelay(format!(
                "proportional ratio must lie in (0, 1], got {ratio}"
            )));
        }
        Ok(DelayFn::Proportional(ratio))
    }

    pub fn parse(text: &str) -> Result<DelayFn, ParseError> {
        Expr::parse(text).map(DelayFn::Expression)
    }

    /// Raw delayed argument; `h(t) <= t` is checked by validation and the integrator.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DelayFn::ConstantLag(lag) => t - lag,
            DelayFn::Proportional(ratio) => ratio * t,
            DelayFn::Expression(expr) => expr.eval(t),
            DelayFn::Clamped { inner, start } => {
                if t < *start {
                    *start
                } else {
                    inner.eval(t)
                }
            }
        }
    }

    /// Like [`eval`](Self::eval) but rejects advanced arguments `h(t) > t`.
    pub fn try_eval(&self, t: f64) -> Result<f64, ModelError> {
        let h = self.eval(t);
        if h > t || h.is_nan() {
            Err(ModelError::AdvancedArgument { t, value: h })
        } else {
            Ok(h)
        }
    }

    pub fn lag_at(&self, t: f64) -> f64 {
        t - self.eval(t)
    }

    pub fn fixed_lag(&self) -> Option<f64> {
        match self {
            DelayFn::ConstantLag(lag) => Some(*lag),
            _ => None,
        }
    }

    pub fn clamped(&self, start: f64) -> DelayFn {
        if let DelayFn::Clamped { start: s, .. } = self {
            if *s == start {
                return self.clone();
            }
        }
        DelayFn::Clamped {
            inner: Arc::new(self.clone()),
            start,
        }
    }

    pub fn to_expression_text(&self) -> Option<String> {
        match self {
            DelayFn::Expression(expr) => Some(expr.to_string()),
            _ => None,
        }
    }
}
