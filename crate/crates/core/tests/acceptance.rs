//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::E;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use impulsive_dde::criteria::{
    certify, certify_via_equivalence, compare, corollary2, solve_inequality, CriteriaConfig,
    CriteriaError, InequalityOutcome, TheoremId, Verdict,
};
use impulsive_dde::empirics::{classify, with_random_initial, EmpiricalClass};
use impulsive_dde::impulse_algebra::ImpulseProductIndex;
use impulsive_dde::integrator::{
    fundamental, fundamental_grid, representation_eval, solve, solve_with_kicks,
};
use impulsive_dde::model::{DelayFn, Impulse, ImpulseSchedule, Problem, ScalarFn};
use impulsive_dde::transform::{conjugate, remove_impulses};
use impulsive_dde::verify::random_representation_case;

type Outcome = Result<String, String>;

fn unit_lag(a: f64) -> Problem {
    Problem::builder()
        .term(ScalarFn::Constant(a), DelayFn::constant_lag(1.0).unwrap())
        .build()
        .unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed < limit
}

fn threshold() -> Outcome {
    let horizon = 200.0;
    let step = 1e-3;
    let config = CriteriaConfig::default();

    let start = Instant::now();
    let below = unit_lag(0.30);
    let verdict = certify(&below, horizon, &config)
        .map_err(|e| e.to_string())?
        .decision
        .verdict;
    let mut max_changes = 0;
    for seed in 0..5 {
        let x =
            solve(&with_random_initial(&below, seed), horizon, step).map_err(|e| e.to_string())?;
        max_changes = max_changes.max(x.sign_changes(10.0).len());
    }
    let below_time = start.elapsed();

    let start = Instant::now();
    let above = unit_lag(0.40);
    let verdict_above = certify(&above, horizon, &config)
        .map_err(|e| e.to_string())?
        .decision
        .verdict;
    let mut min_changes = usize::MAX;
    for seed in 0..5 {
        let x =
            solve(&with_random_initial(&above, seed), horizon, step).map_err(|e| e.to_string())?;
        min_changes = min_changes.min(x.sign_changes(0.0).len());
    }
    let above_time = start.elapsed();

    let limit = Duration::from_secs(10);
    check(
        verdict == Verdict::NonOscillationCertified
            && max_changes == 0
            && verdict_above == Verdict::OscillationCertified
            && min_changes >= 10
            && within(limit, below_time)
            && within(limit, above_time),
        format!(
            "A=0.30 {verdict}, max sign changes on [10,200] = {max_changes} ({below_time:.2?}); \
             A=0.40 {verdict_above}, min sign changes on [0,200] = {min_changes} ({above_time:.2?})"
        ),
    )
}

fn equivalence_witness() -> Outcome {
    let horizon = 20.0;
    let problem = unit_lag(1.0).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 2.0).unwrap());
    let impulsive = solve(&problem, horizon, 1e-3).map_err(|e| e.to_string())?;
    let transformed = remove_impulses(&problem, horizon).map_err(|e| e.to_string())?;
    let direct = solve(&transformed.base, horizon, 1e-3).map_err(|e| e.to_string())?;
    let y = conjugate(&impulsive, problem.schedule()).map_err(|e| e.to_string())?;

    // Independent pointwise check on a fine grid: y(t) = x(t) / 2^floor(t).
    let mut sup = y.sup_distance(&direct);
    for i in 0..=20_000 {
        let t = horizon * i as f64 / 20_000.0;
        let by_hand = impulsive.value(t).unwrap() / 2f64.powi(t.floor() as i32);
        sup = sup.max((by_hand - direct.value(t).unwrap()).abs());
    }
    let (a, b) = (y.sign_changes(2.0).len(), direct.sign_changes(2.0).len());
    check(
        sup <= 1e-4 && a == b,
        format!("sup |y - z| = {sup:.3e}, sign changes on [2,20]: {a} conjugated vs {b} direct"),
    )
}

fn representation() -> Outcome {
    let step = 0.005;
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let case = random_representation_case(1000 + seed);
        let p = &case.problem;
        let impulses = p.schedule().materialize(case.horizon).len();
        let nonzero_data = p.forcing().eval(0.3) != 0.0 || p.forcing().eval(1.1) != 0.0;
        if p.terms().len() > 2 || impulses > 4 || case.horizon > 10.0 || !nonzero_data {
            return Err(format!("case {seed} outside the required family"));
        }
        let kicks = [case.kick];
        let traj = solve_with_kicks(p, case.horizon, step, &kicks).map_err(|e| e.to_string())?;
        let slices = fundamental_grid(p, case.horizon, step, &[case.kick.time])
            .map_err(|e| e.to_string())?;
        let scale = traj
            .nodes()
            .iter()
            .map(|&(_, x)| x.abs())
            .fold(0.0, f64::max);
        for i in 1..=20 {
            let t = case.horizon * i as f64 / 20.0;
            let rep = representation_eval(p, &slices, t, &kicks).map_err(|e| e.to_string())?;
            let x = traj.value(t).unwrap();
            worst = worst.max((rep - x).abs() / scale);
        }
    }
    check(
        worst <= 1e-4,
        format!("max relative residual over 10 problems x 20 times = {worst:.3e}"),
    )
}

fn fundamental_positivity() -> Outcome {
    let horizon = 10.0;
    let step = 0.01;
    let config = CriteriaConfig {
        grid_n: 20_000,
        ..CriteriaConfig::default()
    };
    let suite = vec![
        ("A=0.3", unit_lag(0.3)),
        (
            "sinusoidal A, B=0.9",
            Problem::builder()
                .term(
                    ScalarFn::parse("0.2 + 0.1*sin(t)").unwrap(),
                    DelayFn::constant_lag(1.0).unwrap(),
                )
                .schedule(ImpulseSchedule::periodic(1.0, 1.0, 0.9).unwrap())
                .build()
                .unwrap(),
        ),
        (
            "two terms, mixed B",
            Problem::builder()
                .term(ScalarFn::Constant(0.1), DelayFn::constant_lag(0.5).unwrap())
                .term(
                    ScalarFn::Constant(0.15),
                    DelayFn::constant_lag(1.2).unwrap(),
                )
                .schedule(ImpulseSchedule::from_pairs(&[(2.5, 1.5), (5.0, 0.8)]).unwrap())
                .build()
                .unwrap(),
        ),
        (
            "A=0.6, B=2",
            unit_lag(0.6).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 2.0).unwrap()),
        ),
        (
            "A=0.5, B=0.5",
            unit_lag(0.5).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 0.5).unwrap()),
        ),
    ];
    let t1 = 0.0;
    let mut certified = 0;
    let mut min_x = f64::INFINITY;
    let mut worst_bound_gap = f64::INFINITY;
    for (name, problem) in &suite {
        let u = match solve_inequality(problem, t1, horizon, &config).map_err(|e| e.to_string())? {
            InequalityOutcome::Converged { u, .. } => u,
            InequalityOutcome::Diverged { .. } => continue,
        };
        certified += 1;
        let index = ImpulseProductIndex::build(problem.schedule(), horizon).unwrap();
        let grid: Vec<f64> = (0..=20)
            .map(|i| t1 + (horizon - t1) * i as f64 / 20.0)
            .collect();
        for &s in &grid[..20] {
            let slice = fundamental(problem, s, horizon, step).map_err(|e| e.to_string())?;
            for &t in grid.iter().filter(|&&t| t > s) {
                let x = slice.value(t).unwrap();
                min_x = min_x.min(x);
                if x <= 0.0 {
                    return Err(format!("{name}: X({t}, {s}) = {x:e}"));
                }
                if s == t1 {
                    let bound = (-u.integral(t1, t)).exp() * index.product(t1, t).unwrap();
                    worst_bound_gap = worst_bound_gap.min(x - bound);
                }
            }
        }
    }
    check(
        certified >= 3 && min_x > 0.0 && worst_bound_gap >= -1e-6,
        format!(
            "{certified}/{} problems certified; min X(t,s) = {min_x:.3e}; \
             min X(t,t1) - exp(-int u) prod B = {worst_bound_gap:.3e}",
            suite.len()
        ),
    )
}

fn impulse_effect() -> Outcome {
    let horizon = 100.0;
    let step = 0.01;
    let config = CriteriaConfig::default();

    let start = Instant::now();
    let shrinking = unit_lag(0.3).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 0.5).unwrap());
    let report =
        certify_via_equivalence(&shrinking, horizon, &config).map_err(|e| e.to_string())?;
    let liminf = report.evidence("liminf_estimate").unwrap_or(f64::NAN);
    let mut all_oscillate = true;
    for seed in 0..5 {
        let x = solve(&with_random_initial(&shrinking, seed), horizon, step)
            .map_err(|e| e.to_string())?;
        all_oscillate &= classify(&x, 10.0).class == EmpiricalClass::Oscillatory;
    }
    let shrink_time = start.elapsed();

    let start = Instant::now();
    let growing = unit_lag(0.3).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 2.0).unwrap());
    let cor = corollary2(&growing, horizon, &config).map_err(|e| e.to_string())?;
    let decision = certify(&growing, horizon, &config)
        .map_err(|e| e.to_string())?
        .decision;
    let mut tail_changes = 0;
    for seed in 0..5 {
        let x = solve(&with_random_initial(&growing, seed), horizon, step)
            .map_err(|e| e.to_string())?;
        tail_changes += x.sign_changes(10.0).len();
    }
    let grow_time = start.elapsed();

    let limit = Duration::from_secs(10);
    check(
        report.verdict == Verdict::OscillationCertified
            && (liminf - 0.6).abs() < 1e-9
            && liminf > 1.0 / E
            && all_oscillate
            && cor.verdict == Verdict::NonOscillationCertified
            && decision.verdict == Verdict::NonOscillationCertified
            && tail_changes == 0
            && within(limit, shrink_time)
            && within(limit, grow_time),
        format!(
            "B=0.5: {} via {}, tail integral {liminf:.12}, all seeds oscillate = {all_oscillate} ({shrink_time:.2?}); \
             B=2: comparison {}, pipeline {}, tail sign changes = {tail_changes} ({grow_time:.2?})",
            report.verdict,
            report.via.map_or("-".to_string(), |v| v.to_string()),
            cor.verdict,
            decision.verdict
        ),
    )
}

fn comparison_transfer() -> Outcome {
    let horizon = 100.0;
    let config = CriteriaConfig::default();
    let base = unit_lag(0.3);
    let base_verdict = certify(&base, horizon, &config)
        .map_err(|e| e.to_string())?
        .decision
        .verdict;
    let tilde = unit_lag(0.2).with_schedule(ImpulseSchedule::periodic(1.0, 1.0, 1.0).unwrap());
    let transferred = compare(&base, &tilde, horizon, &config).map_err(|e| e.to_string())?;
    let violation = compare(&base, &unit_lag(0.4), horizon, &config);
    let witness = match &violation {
        Err(CriteriaError::HypothesisNotMet { condition, witness }) => {
            Some(format!("{condition} at {witness}"))
        }
        _ => None,
    };
    check(
        base_verdict == Verdict::NonOscillationCertified
            && transferred.verdict == Verdict::NonOscillationCertified
            && transferred.theorem == TheoremId::T4
            && witness.is_some(),
        format!(
            "base {base_verdict}; A~=0.2, B~=1: {} ({}); A~=0.4: {}",
            transferred.verdict,
            transferred.theorem,
            witness.unwrap_or_else(|| format!("{violation:?}"))
        ),
    )
}

fn impulse_algebra_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let horizon = 1000.0;
    let mut times: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..horizon)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let impulses: Vec<Impulse> = times
        .iter()
        .map(|&t| {
            let sign = if rng.gen_bool(0.1) { -1.0 } else { 1.0 };
            Impulse::new(t, sign * rng.gen_range(0.5..2.0))
        })
        .collect();
    let index =
        ImpulseProductIndex::from_impulses(&impulses, horizon).map_err(|e| e.to_string())?;
    let brute = |a: f64, b: f64| -> f64 {
        impulses
            .iter()
            .filter(|imp| imp.time > a && imp.time <= b)
            .map(|imp| imp.multiplier)
            .product()
    };
    let mut worst_window = 0.0f64;
    for _ in 0..1000 {
        let (x, y) = (rng.gen_range(0.0..horizon), rng.gen_range(0.0..horizon));
        let (a, b) = (x.min(y), x.max(y));
        let exact = brute(a, b);
        let got = index.product(a, b).map_err(|e| e.to_string())?;
        worst_window = worst_window.max((got - exact).abs() / exact.abs());
    }
    let mut worst_split = 0.0f64;
    for _ in 0..1000 {
        let mut abc = [
            rng.gen_range(0.0..horizon),
            rng.gen_range(0.0..horizon),
            rng.gen_range(0.0..horizon),
        ];
        abc.sort_by(f64::total_cmp);
        let [a, b, c] = abc;
        let whole = index.product(a, c).unwrap();
        let split = index.product(a, b).unwrap() * index.product(b, c).unwrap();
        worst_split = worst_split.max((whole - split).abs() / whole.abs());
    }
    check(
        worst_window <= 1e-12 && worst_split <= 1e-12,
        format!(
            "{} impulses; max relative error vs brute force = {worst_window:.3e}; \
             max relative multiplicativity defect = {worst_split:.3e}",
            impulses.len()
        ),
    )
}

fn integrator_order() -> Outcome {
    let rate = 10.0;
    let horizon = 2.0;
    let problem = Problem::builder()
        .term(
            ScalarFn::Constant(rate),
            DelayFn::constant_lag(0.0).unwrap(),
        )
        .build()
        .unwrap();
    let max_error = |step: f64| -> Result<f64, String> {
        let traj = solve(&problem, horizon, step).map_err(|e| e.to_string())?;
        Ok(traj
            .nodes()
            .iter()
            .map(|&(t, x)| (x - (-rate * t).exp()).abs())
            .fold(0.0, f64::max))
    };
    let coarse = max_error(2e-3)?;
    let fine = max_error(1e-3)?;
    let ratio = coarse / fine;
    check(
        (12.0..=20.0).contains(&ratio),
        format!("x' = -{rate} x: max error {coarse:.3e} at h=2e-3, {fine:.3e} at h=1e-3, ratio {ratio:.2}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1/e threshold", threshold),
        ("impulse-free equivalence witness", equivalence_witness),
        ("variation-of-constants representation", representation),
        (
            "fundamental positivity and lower bound",
            fundamental_positivity,
        ),
        ("impulse effect on oscillation", impulse_effect),
        ("comparison transfer", comparison_transfer),
        ("impulse product oracle", impulse_algebra_oracle),
        ("integrator order", integrator_order),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = criterion();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} FAIL {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
