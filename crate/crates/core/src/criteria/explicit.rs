use super::{
    le_with_tie, positive_index, CriteriaConfig, CriteriaError, CriterionReport, TheoremId,
    Verdict, INV_E,
};
use crate::impulse_algebra::ImpulseProductIndex;
use crate::model::{DelayFn, Problem};

/// Running integral `G(x) = int_{start}^x g` of an integrand that is smooth
/// between the given nodes. Each interval uses the midpoint rule, so `G` is
/// exact for integrands that are constant between nodes; values in between
/// are interpolated linearly.
#[derive(Debug, Clone)]
pub struct WindowIntegral {
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl WindowIntegral {
    pub fn new(nodes: Vec<f64>, integrand: impl Fn(f64) -> f64) -> Self {
        assert!(!nodes.is_empty());
        let mut cumulative = Vec::with_capacity(nodes.len());
        let mut total = 0.0;
        cumulative.push(0.0);
        for pair in nodes.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            total += (b - a) * integrand(0.5 * (a + b));
            cumulative.push(total);
        }
        WindowIntegral { nodes, cumulative }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `G(x)`, clamped to the node span.
    pub fn at(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return 0.0;
        }
        if x >= self.nodes[n - 1] {
            return self.cumulative[n - 1];
        }
        let j = self.nodes.partition_point(|&v| v <= x) - 1;
        let w = (x - self.nodes[j]) / (self.nodes[j + 1] - self.nodes[j]);
        (1.0 - w) * self.cumulative[j] + w * self.cumulative[j + 1]
    }

    /// `int_a^b g`.
    pub fn between(&self, a: f64, b: f64) -> f64 {
        self.at(b) - self.at(a)
    }
}

fn fixed_lag(delay: &DelayFn) -> Option<f64> {
    match delay {
        DelayFn::ConstantLag(lag) => Some(*lag),
        DelayFn::Clamped { inner, .. } => fixed_lag(inner),
        _ => None,
    }
}

/// Uniform nodes on `[start, end]` plus every point where a window integrand
/// or a window integral may have a corner: impulse times, data
/// discontinuities and the given anchors, shifted by up to two constant lags.
fn integrand_nodes(
    problem: &Problem,
    index: &ImpulseProductIndex,
    start: f64,
    end: f64,
    grid_n: usize,
    anchors: &[f64],
) -> Vec<f64> {
    let dx = (end - start) / grid_n as f64;
    let mut nodes: Vec<f64> = (0..=grid_n).map(|i| start + dx * i as f64).collect();
    let mut seeds: Vec<f64> = index.times().to_vec();
    seeds.extend(problem.data_discontinuities());
    seeds.extend_from_slice(anchors);
    let lags: Vec<f64> = problem
        .terms()
        .iter()
        .filter_map(|term| fixed_lag(&term.delay))
        .filter(|&lag| lag > 0.0)
        .collect();
    let mut shifted = Vec::new();
    for &d in &seeds {
        for &l1 in &lags {
            shifted.push(d + l1);
            for &l2 in &lags {
                shifted.push(d + l1 + l2);
            }
        }
    }
    nodes.extend(seeds);
    nodes.extend(shifted);
    nodes.retain(|&t| t >= start && t <= end);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

fn min_delay(problem: &Problem, t: f64) -> f64 {
    problem.min_delay(t).min(t)
}

fn max_delay(problem: &Problem, t: f64) -> f64 {
    problem.max_delay(t).min(t)
}

/// `sum_k w(A_k(s)) prod_{h_k(s) < tau_j <= s} B_j^{-1}`.
fn weighted_coefficients(
    problem: &Problem,
    index: &ImpulseProductIndex,
    s: f64,
    weight: impl Fn(f64) -> f64,
) -> f64 {
    problem
        .terms()
        .iter()
        .map(|term| {
            let a = weight(term.coefficient.eval(s));
            if a == 0.0 {
                return 0.0;
            }
            let h = term.delay.eval(s).min(s);
            a * index.inverse_product(h, s).unwrap_or(f64::NAN)
        })
        .sum()
}

/// Explicit non-oscillation tests on `[t0, horizon]`.
///
/// Passes, in order, if every coefficient is non-positive, if the sliding
/// window integral of the positive parts weighted by inverse impulse products
/// never exceeds `1/e`, or if the unweighted window integral stays below
/// `(1/e)(1 + sum ln B_j)` with the sum over multipliers below 1 in the
/// window `(min_k h_k(t), t]`.
pub fn check_theorem3(
    problem: &Problem,
    t0: f64,
    horizon: f64,
    config: &CriteriaConfig,
) -> Result<CriterionReport, CriteriaError> {
    config.check()?;
    if !(horizon > t0) {
        return Err(CriteriaError::InvalidInput(format!(
            "horizon {horizon} must exceed t0 = {t0}"
        )));
    }
    let index = positive_index(problem, horizon)?;
    let params = |r: CriterionReport| {
        r.with_parameter("t0", t0)
            .with_parameter("horizon", horizon)
            .with_parameter("grid_n", config.grid_n as f64)
    };

    let points = integrand_nodes(problem, &index, t0, horizon, config.grid_n, &[t0]);
    let mut max_coefficient = f64::NEG_INFINITY;
    for pair in points.windows(2) {
        for t in [pair[0], 0.5 * (pair[0] + pair[1])] {
            for term in problem.terms() {
                max_coefficient = max_coefficient.max(term.coefficient.eval(t));
            }
        }
    }
    if max_coefficient <= 0.0 {
        return Ok(params(
            CriterionReport::new(Verdict::NonOscillationCertified, TheoremId::T3_1)
                .with_evidence("max_coefficient", max_coefficient),
        ));
    }

    let start = points
        .iter()
        .map(|&t| min_delay(problem, t))
        .fold(t0, f64::min);
    let nodes = integrand_nodes(problem, &index, start, horizon, config.grid_n, &[t0]);
    let weighted = WindowIntegral::new(nodes.clone(), |s| {
        if s < t0 {
            0.0
        } else {
            weighted_coefficients(problem, &index, s, |a| a.max(0.0))
        }
    });
    let plain = WindowIntegral::new(nodes, |s| {
        if s < t0 {
            0.0
        } else {
            problem
                .terms()
                .iter()
                .map(|term| term.coefficient.eval(s).max(0.0))
                .sum()
        }
    });

    let (mut sup_weighted, mut sup_at) = (0.0f64, t0);
    let (mut max_excess, mut excess_at) = (f64::NEG_INFINITY, t0);
    let mut log_sum_ok = true;
    for &t in &points {
        let lower = min_delay(problem, t);
        let w = weighted.between(lower, t);
        if w > sup_weighted {
            sup_weighted = w;
            sup_at = t;
        }
        let lhs = plain.between(lower, t);
        let rhs = INV_E * (1.0 + index.log_sum_small_multipliers(lower, t)?);
        if lhs - rhs > max_excess {
            max_excess = lhs - rhs;
            excess_at = t;
        }
        log_sum_ok &= le_with_tie(lhs, rhs);
    }

    let report = |verdict, theorem| {
        params(
            CriterionReport::new(verdict, theorem)
                .with_evidence("max_coefficient", max_coefficient)
                .with_evidence("sup_window_integral", sup_weighted)
                .with_evidence("sup_window_integral_at", sup_at)
                .with_evidence("max_log_sum_excess", max_excess)
                .with_evidence("max_log_sum_excess_at", excess_at)
                .with_evidence("threshold", INV_E),
        )
    };
    Ok(if le_with_tie(sup_weighted, INV_E) {
        report(Verdict::NonOscillationCertified, TheoremId::T3_2)
    } else if log_sum_ok {
        report(Verdict::NonOscillationCertified, TheoremId::T3_3)
    } else {
        report(Verdict::Inconclusive, TheoremId::T3_3)
    })
}

/// Explicit oscillation tests on the final `tail_fraction` of
/// `[t0, horizon]`.
///
/// With `I(t) = int sum_k A_k(s) prod_{h_k(s) < tau_j <= s} B_j^{-1} ds`, the
/// minimum over the tail of the integral from `min_k h_k(t)` must exceed
/// `1/e + margin`, or the maximum over the tail of the integral from
/// `max_k h_k(t)` must exceed `1 + margin`. Both limits are estimated on the
/// tail, so the verdict is conditional on the horizon.
pub fn check_theorem8(
    problem: &Problem,
    horizon: f64,
    tail_fraction: f64,
    config: &CriteriaConfig,
) -> Result<CriterionReport, CriteriaError> {
    config.check()?;
    let t0 = problem.t0();
    if !(horizon > t0) {
        return Err(CriteriaError::InvalidInput(format!(
            "horizon {horizon} must exceed t0 = {t0}"
        )));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(CriteriaError::InvalidInput(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let index = positive_index(problem, horizon)?;
    let tail_start = t0 + (horizon - t0) * (1.0 - tail_fraction);
    let params = |r: CriterionReport| {
        let mut r = r
            .with_parameter("tail_start", tail_start)
            .with_parameter("tail_end", horizon)
            .with_parameter("margin", config.margin)
            .with_parameter("grid_n", config.grid_n as f64);
        r.horizon_conditional = true;
        r
    };

    let points = integrand_nodes(problem, &index, tail_start, horizon, config.grid_n, &[t0]);
    let start = points
        .iter()
        .map(|&t| min_delay(problem, t))
        .fold(tail_start, f64::min);
    let nodes = integrand_nodes(problem, &index, start, horizon, config.grid_n, &[t0]);

    let mut min_coefficient = f64::INFINITY;
    for pair in nodes.windows(2) {
        for t in [pair[0], 0.5 * (pair[0] + pair[1])] {
            for term in problem.terms() {
                min_coefficient = min_coefficient.min(term.coefficient.eval(t));
            }
        }
    }
    if min_coefficient < 0.0 {
        return Ok(params(
            CriterionReport::inconclusive(TheoremId::T8_1)
                .with_evidence("min_coefficient", min_coefficient),
        ));
    }

    let integral = WindowIntegral::new(nodes, |s| weighted_coefficients(problem, &index, s, |a| a));
    let (mut liminf, mut limsup) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &points {
        liminf = liminf.min(integral.between(min_delay(problem, t), t));
        limsup = limsup.max(integral.between(max_delay(problem, t), t));
    }
    let short_window = liminf > INV_E + config.margin;
    let long_window = limsup > 1.0 + config.margin;
    let report = |verdict, theorem| {
        params(
            CriterionReport::new(verdict, theorem)
                .with_evidence("liminf_estimate", liminf)
                .with_evidence("limsup_estimate", limsup)
                .with_evidence("short_window_passed", f64::from(u8::from(short_window)))
                .with_evidence("long_window_passed", f64::from(u8::from(long_window))),
        )
    };
    Ok(if short_window {
        report(Verdict::OscillationCertified, TheoremId::T8_1)
    } else if long_window {
        report(Verdict::OscillationCertified, TheoremId::T8_2)
    } else {
        report(Verdict::Inconclusive, TheoremId::T8_1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ImpulseSchedule, ScalarFn};

    fn unit_lag(a: f64) -> Problem {
        Problem::builder()
            .term(ScalarFn::Constant(a), DelayFn::constant_lag(1.0).unwrap())
            .build()
            .unwrap()
    }

    fn cfg() -> CriteriaConfig {
        CriteriaConfig::default()
    }

    #[test]
    fn non_positive_coefficients() {
        let r = check_theorem3(&unit_lag(-1.0), 0.0, 50.0, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::NonOscillationCertified);
        assert_eq!(r.theorem, TheoremId::T3_1);
    }

    #[test]
    fn constant_window_integral_below_threshold() {
        let r = check_theorem3(&unit_lag(0.3), 0.0, 50.0, &cfg()).unwrap();
        assert_eq!(r.theorem, TheoremId::T3_2);
        assert!((r.evidence("sup_window_integral").unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn inflating_impulses_defeat_both_tests() {
        let p = unit_lag(0.3).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 0.5).unwrap());
        let r = check_theorem3(&p, 0.0, 50.0, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!((r.evidence("sup_window_integral").unwrap() - 0.6).abs() < 1e-12);
        // 0.3 against (1/e)(1 + ln 0.5)
        let bound = INV_E * (1.0 + 0.5f64.ln());
        assert!((bound - 0.1129).abs() < 1e-4);
        assert!((r.evidence("max_log_sum_excess").unwrap() - (0.3 - bound)).abs() < 1e-12);
    }

    #[test]
    fn log_sum_excess_matches_hand_evaluation() {
        // Windows holding the impulse: 0.2 - (1/e)(1 + ln 0.7).
        let p = unit_lag(0.2).with_schedule(ImpulseSchedule::periodic(5.0, 5.0, 0.7).unwrap());
        let r = check_theorem3(&p, 0.0, 50.0, &cfg()).unwrap();
        assert_eq!(r.theorem, TheoremId::T3_2);
        let expected = 0.2 - INV_E * (1.0 + 0.7f64.ln());
        assert!((r.evidence("max_log_sum_excess").unwrap() - expected).abs() < 1e-12);
        assert!((r.evidence("sup_window_integral").unwrap() - 0.2 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn oscillation_thresholds() {
        let r = check_theorem8(&unit_lag(0.5), 100.0, 0.5, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::OscillationCertified);
        assert_eq!(r.theorem, TheoremId::T8_1);
        assert!(r.horizon_conditional);
        assert!((r.evidence("liminf_estimate").unwrap() - 0.5).abs() < 1e-12);

        let r = check_theorem8(&unit_lag(1.2), 100.0, 0.5, &cfg()).unwrap();
        assert_eq!(r.evidence("long_window_passed"), Some(1.0));
        assert!((r.evidence("limsup_estimate").unwrap() - 1.2).abs() < 1e-12);

        let r = check_theorem8(&unit_lag(0.2), 100.0, 0.5, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn exact_threshold_ties() {
        let r = check_theorem3(&unit_lag(INV_E), 0.0, 50.0, &cfg()).unwrap();
        assert_eq!(r.theorem, TheoremId::T3_2);
        assert_eq!(r.verdict, Verdict::NonOscillationCertified);
        let r = check_theorem8(&unit_lag(INV_E), 50.0, 0.5, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn negative_coefficient_makes_oscillation_test_inconclusive() {
        let p = Problem::builder()
            .term(
                ScalarFn::parse("sin(t)").unwrap(),
                DelayFn::constant_lag(1.0).unwrap(),
            )
            .build()
            .unwrap();
        let r = check_theorem8(&p, 50.0, 0.5, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.evidence("min_coefficient").unwrap() < 0.0);
    }
}
