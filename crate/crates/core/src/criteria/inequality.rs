use super::{positive_index, CriteriaConfig, CriteriaError, CriterionReport, TheoremId, Verdict};
use crate::impulse_algebra::ImpulseProductIndex;
use crate::model::Problem;

/// Piecewise linear function on ascending nodes, zero to the left of the
/// first node and constant to the right of the last.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), values.len());
        assert!(!nodes.is_empty());
        GridFunction { nodes, values }
    }

    pub fn zeros(nodes: Vec<f64>) -> Self {
        let values = vec![0.0; nodes.len()];
        GridFunction { nodes, values }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.nodes.len();
        if t < self.nodes[0] {
            return 0.0;
        }
        if t >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let j = self.nodes.partition_point(|&x| x <= t) - 1;
        let w = (t - self.nodes[j]) / (self.nodes[j + 1] - self.nodes[j]);
        (1.0 - w) * self.values[j] + w * self.values[j + 1]
    }

    /// Exact integral of the interpolant over `[a, nodes[i]]`, with the
    /// part left of the first node counted as zero. Built from non-negative
    /// pieces, so it is monotone in the values under rounding.
    fn integral_to_node(&self, a: f64, i: usize) -> f64 {
        let t = self.nodes[i];
        let a = a.max(self.nodes[0]);
        if a >= t {
            return 0.0;
        }
        let j = self.nodes.partition_point(|&x| x <= a) - 1;
        let mut total = 0.0;
        if self.nodes[j] < a {
            let u_a = self.eval(a);
            total += 0.5 * (self.nodes[j + 1] - a) * (u_a + self.values[j + 1]);
        } else {
            total +=
                0.5 * (self.nodes[j + 1] - self.nodes[j]) * (self.values[j] + self.values[j + 1]);
        }
        for k in (j + 1)..i {
            total +=
                0.5 * (self.nodes[k + 1] - self.nodes[k]) * (self.values[k] + self.values[k + 1]);
        }
        total
    }

    /// Exact integral of the interpolant over `[a, b]` inside the node span.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let n = self.nodes.len();
        let a = a.max(self.nodes[0]);
        let b = b.min(self.nodes[n - 1]);
        if a >= b {
            return 0.0;
        }
        let first = self.nodes.partition_point(|&x| x <= a) - 1;
        let mut total = 0.0;
        for j in first..n - 1 {
            let lo = self.nodes[j].max(a);
            let hi = self.nodes[j + 1].min(b);
            if lo >= b {
                break;
            }
            if hi > lo {
                total += 0.5 * (hi - lo) * (self.eval(lo) + self.eval(hi));
            }
        }
        total
    }
}

/// `u -> sum_k (A_k(t))^+ exp(int_{max(h_k(t), t1)}^t u) prod_{h_k(t) < tau_j <= t} B_j^{-1}`
/// on a uniform grid over `[t1, horizon]`.
#[derive(Debug, Clone)]
pub struct CharacteristicOperator {
    nodes: Vec<f64>,
    /// Per node: `(positive coefficient, lower limit, inverse product)` per term.
    entries: Vec<Vec<(f64, f64, f64)>>,
    signed: bool,
}

impl CharacteristicOperator {
    pub fn new(
        problem: &Problem,
        t1: f64,
        horizon: f64,
        grid_n: usize,
    ) -> Result<Self, CriteriaError> {
        let index = positive_index(problem, horizon)?;
        Self::with_index(problem, &index, t1, horizon, grid_n)
    }

    fn with_index(
        problem: &Problem,
        index: &ImpulseProductIndex,
        t1: f64,
        horizon: f64,
        grid_n: usize,
    ) -> Result<Self, CriteriaError> {
        if !(horizon > t1) {
            return Err(CriteriaError::InvalidInput(format!(
                "horizon {horizon} must exceed the start {t1}"
            )));
        }
        let dx = (horizon - t1) / grid_n as f64;
        let nodes: Vec<f64> = (0..=grid_n).map(|i| t1 + dx * i as f64).collect();
        let mut entries = Vec::with_capacity(nodes.len());
        let mut max_lag: f64 = 0.0;
        let mut signed = false;
        for &t in &nodes {
            let mut row = Vec::with_capacity(problem.terms().len());
            for term in problem.terms() {
                let a = term.coefficient.eval(t);
                signed |= a < 0.0;
                let h = term.delay.eval(t).min(t);
                max_lag = max_lag.max(t - h);
                if a > 0.0 {
                    let lower = h.max(t1);
                    row.push((a, lower, index.inverse_product(h, t)?));
                }
            }
            entries.push(row);
        }
        if max_lag > 0.0 && max_lag < 2.0 * dx {
            return Err(CriteriaError::GridTooCoarse { max_lag, cell: dx });
        }
        Ok(CharacteristicOperator {
            nodes,
            entries,
            signed,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Some coefficient was negative at a node.
    pub fn has_negative_coefficients(&self) -> bool {
        self.signed
    }

    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        let values = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|&(c, lower, prod)| c * u.integral_to_node(lower, i).exp() * prod)
                    .sum()
            })
            .collect();
        GridFunction::new(self.nodes.clone(), values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceReason {
    Cap,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InequalityOutcome {
    Converged {
        u: GridFunction,
        iterations: usize,
    },
    Diverged {
        iterations: usize,
        sup: f64,
        reason: DivergenceReason,
    },
}

/// Least non-negative solution of the characteristic equation on
/// `[t1, horizon]` by monotone iteration from `u = 0`.
pub fn solve_inequality(
    problem: &Problem,
    t1: f64,
    horizon: f64,
    config: &CriteriaConfig,
) -> Result<InequalityOutcome, CriteriaError> {
    config.check()?;
    let op = CharacteristicOperator::new(problem, t1, horizon, config.grid_n)?;
    Ok(iterate(&op, config))
}

fn iterate(op: &CharacteristicOperator, config: &CriteriaConfig) -> InequalityOutcome {
    let mut u = GridFunction::zeros(op.nodes.clone());
    let mut sup_u: f64 = 0.0;
    for n in 1..=config.max_iter {
        let next = op.apply(&u);
        let sup_next = next.sup();
        if !(sup_next <= config.cap) {
            return InequalityOutcome::Diverged {
                iterations: n,
                sup: sup_next,
                reason: DivergenceReason::Cap,
            };
        }
        let diff = next
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let done = diff <= 1e-9 * (1.0 + sup_u);
        u = next;
        sup_u = sup_next;
        if done {
            return InequalityOutcome::Converged { u, iterations: n };
        }
    }
    InequalityOutcome::Diverged {
        iterations: config.max_iter,
        sup: sup_u,
        reason: DivergenceReason::MaxIterations,
    }
}

/// Tolerated relative growth of `u` on the tail over its earlier maximum.
const TAIL_GROWTH_LIMIT: f64 = 1e-2;

/// Certificate from a solution of the characteristic inequality on
/// `[t1, horizon]`.
///
/// A finite horizon can hide a blow-up just past its end, so a solution that
/// is still growing on the final `tail_fraction` of the horizon (its tail
/// maximum exceeds the earlier maximum by more than 1%) is not accepted.
pub fn certify_by_inequality(
    problem: &Problem,
    t1: f64,
    horizon: f64,
    config: &CriteriaConfig,
) -> Result<CriterionReport, CriteriaError> {
    config.check()?;
    let op = CharacteristicOperator::new(problem, t1, horizon, config.grid_n)?;
    let theorem = if op.has_negative_coefficients() {
        TheoremId::T2_3
    } else {
        TheoremId::T1_3
    };
    let outcome = iterate(&op, config);
    let base = |verdict| {
        CriterionReport::new(verdict, theorem)
            .with_parameter("t1", t1)
            .with_parameter("horizon", horizon)
            .with_parameter("grid_n", config.grid_n as f64)
            .with_parameter("max_iter", config.max_iter as f64)
            .with_parameter("cap", config.cap)
    };
    match outcome {
        InequalityOutcome::Diverged {
            iterations,
            sup,
            reason,
        } => Ok(base(Verdict::Inconclusive)
            .with_evidence("iterations", iterations as f64)
            .with_evidence("sup_u", sup)
            .with_evidence(
                "diverged_at_cap",
                if reason == DivergenceReason::Cap {
                    1.0
                } else {
                    0.0
                },
            )),
        InequalityOutcome::Converged { u, iterations } => {
            let rhs = op.apply(&u);
            let residual = u
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| (a - b) / (1.0 + a))
                .fold(f64::INFINITY, f64::min);
            let tail_start = horizon - (horizon - t1) * config.tail_fraction;
            let (mut head_max, mut tail_max) = (0.0f64, 0.0f64);
            for (&t, &v) in u.nodes.iter().zip(&u.values) {
                if t < tail_start {
                    head_max = head_max.max(v);
                } else {
                    tail_max = tail_max.max(v);
                }
            }
            let growth = if head_max > 0.0 {
                tail_max / head_max - 1.0
            } else if tail_max > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            let verdict = if growth <= TAIL_GROWTH_LIMIT {
                Verdict::NonOscillationCertified
            } else {
                Verdict::Inconclusive
            };
            Ok(base(verdict)
                .with_evidence("iterations", iterations as f64)
                .with_evidence("sup_u", u.sup())
                .with_evidence("residual", residual)
                .with_evidence("tail_growth", growth))
        }
    }
}
