use super::function::{DelayFn, ScalarFn};
use super::schedule::ImpulseSchedule;
use super::ModelError;

/// One delayed term `A_k(t) x[h_k(t)]`.
#[derive(Debug, Clone)]
pub struct Term {
    pub coefficient: ScalarFn,
    pub delay: DelayFn,
}

impl Term {
    pub fn new(coefficient: ScalarFn, delay: DelayFn) -> Self {
        Term { coefficient, delay }
    }
}

/// The impulsive initial value problem
///
/// ```text
/// x'(t) + sum_k A_k(t) x[h_k(t)] = f(t),   t >= t0,
/// x(t) = phi(t) for t < t0,   x(t0) = x0,
/// x(tau_j) = B_j x(tau_j - 0)   for tau_j > t0.
/// ```
#[derive(Debug, Clone)]
pub struct Problem {
    terms: Vec<Term>,
    schedule: ImpulseSchedule,
    t0: f64,
    x0: f64,
    phi: ScalarFn,
    forcing: ScalarFn,
}

impl Problem {
    pub fn builder() -> ProblemBuilder {
        ProblemBuilder::default()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn schedule(&self) -> &ImpulseSchedule {
        &self.schedule
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn phi(&self) -> &ScalarFn {
        &self.phi
    }

    pub fn forcing(&self) -> &ScalarFn {
        &self.forcing
    }

    pub fn with_terms(&self, terms: Vec<Term>) -> Result<Problem, ModelError> {
        if terms.is_empty() {
            return Err(ModelError::NoTerms);
        }
        Ok(Problem {
            terms,
            ..self.clone()
        })
    }

    pub fn with_schedule(&self, schedule: ImpulseSchedule) -> Problem {
        Problem {
            schedule,
            ..self.clone()
        }
    }

    pub fn with_initial(&self, t0: f64, x0: f64, phi: ScalarFn) -> Problem {
        Problem {
            t0,
            x0,
            phi,
            ..self.clone()
        }
    }

    pub fn with_forcing(&self, forcing: ScalarFn) -> Problem {
        Problem {
            forcing,
            ..self.clone()
        }
    }

    /// Sum of coefficients evaluated at `t`.
    pub fn coefficient_sum(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.coefficient.eval(t)).sum()
    }

    /// `min_k h_k(t)`.
    pub fn min_delay(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.delay.eval(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_k h_k(t)`.
    pub fn max_delay(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.delay.eval(t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest delayed argument reached on `[t0, horizon]`, sampled on `samples`
    /// intervals and capped at `t0`. This is where `phi` must be defined.
    pub fn history_start(&self, horizon: f64, samples: usize) -> f64 {
        let n = samples.max(1);
        (0..=n)
            .map(|i| self.t0 + (horizon - self.t0) * i as f64 / n as f64)
            .map(|t| self.min_delay(t))
            .fold(self.t0, f64::min)
    }

    /// Problem with `A_k^s` and `h_k^s` in place of `A_k`, `h_k`.
    pub fn cutoff(&self, s: f64) -> Problem {
        Problem {
            terms: self
                .terms
                .iter()
                .map(|term| Term::new(term.coefficient.truncated(s), term.delay.clamped(s)))
                .collect(),
            ..self.clone()
        }
    }

    /// Every point where a coefficient, the forcing or `phi` may jump.
    pub fn data_discontinuities(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|term| term.coefficient.discontinuities())
            .collect();
        out.extend(self.forcing.discontinuities());
        out.extend(self.phi.discontinuities());
        for term in &self.terms {
            if let DelayFn::Clamped { start, .. } = &term.delay {
                out.push(*start);
            }
        }
        out
    }
}

pub struct ProblemBuilder {
    terms: Vec<Term>,
    schedule: ImpulseSchedule,
    t0: f64,
    x0: f64,
    phi: Option<ScalarFn>,
    forcing: ScalarFn,
}

impl Default for ProblemBuilder {
    fn default() -> Self {
        ProblemBuilder {
            terms: Vec::new(),
            schedule: ImpulseSchedule::empty(),
            t0: 0.0,
            x0: 1.0,
            phi: None,
            forcing: ScalarFn::zero(),
        }
    }
}

impl ProblemBuilder {
    pub fn term(mut self, coefficient: ScalarFn, delay: DelayFn) -> Self {
        self.terms.push(Term::new(coefficient, delay));
        self
    }

    pub fn schedule(mut self, schedule: ImpulseSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    /// Defaults to the constant `x0`.
    pub fn phi(mut self, phi: ScalarFn) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn forcing(mut self, forcing: ScalarFn) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn build(self) -> Result<Problem, ModelError> {
        if self.terms.is_empty() {
            return Err(ModelError::NoTerms);
        }
        if !self.t0.is_finite() || !self.x0.is_finite() {
            return Err(ModelError::NonFiniteInitialData);
        }
        Ok(Problem {
            terms: self.terms,
            schedule: self.schedule,
            t0: self.t0,
            x0: self.x0,
            phi: self.phi.unwrap_or(ScalarFn::Constant(self.x0)),
            forcing: self.forcing,
        })
    }
}
