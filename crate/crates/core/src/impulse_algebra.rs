//! Range queries over a materialized impulse schedule.
//!
//! Every window is half-open, `(a, b]`: an impulse at `a` is excluded and one at
//! `b` is included. Products are kept in the log-absolute domain with a separate
//! count of negative factors, so long windows neither overflow nor underflow.

use thiserror::Error;

use crate::model::{Impulse, ImpulseSchedule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("window end {requested} exceeds the index horizon {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },
    #[error("invalid window ({a}, {b}]")]
    InvalidWindow { a: f64, b: f64 },
    #[error("impulse at t = {time} has non-positive multiplier {multiplier}")]
    NegativeMultiplier { time: f64, multiplier: f64 },
    #[error("impulse times not strictly increasing at t = {time}")]
    UnorderedTimes { time: f64 },
}

/// Running sum with Neumaier compensation.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Debug, Clone)]
pub struct ImpulseProductIndex {
    times: Vec<f64>,
    multipliers: Vec<f64>,
    prefix_log_abs: Vec<f64>,
    prefix_sign_flips: Vec<u32>,
    prefix_log_neg_part: Vec<f64>,
    horizon: f64,
}

impl ImpulseProductIndex {
    pub fn build(schedule: &ImpulseSchedule, horizon: f64) -> Result<Self, AlgebraError> {
        Self::from_impulses(&schedule.materialize(horizon), horizon)
    }

    pub fn from_impulses(impulses: &[Impulse], horizon: f64) -> Result<Self, AlgebraError> {
        let n = impulses.len();
        let mut times = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n);
        let mut prefix_log_abs = Vec::with_capacity(n + 1);
        let mut prefix_sign_flips = Vec::with_capacity(n + 1);
        let mut prefix_log_neg_part = Vec::with_capacity(n + 1);
        prefix_log_abs.push(0.0);
        prefix_sign_flips.push(0);
        prefix_log_neg_part.push(0.0);

        let mut log_abs = CompensatedSum::default();
        let mut log_small = CompensatedSum::default();
        let mut flips = 0u32;
        for imp in impulses.iter().filter(|imp| imp.time <= horizon) {
            if let Some(&last) = times.last() {
                if imp.time <= last {
                    return Err(AlgebraError::UnorderedTimes { time: imp.time });
                }
            }
            let ln_abs = imp.multiplier.abs().ln();
            log_abs.add(ln_abs);
            if imp.multiplier < 0.0 {
                flips += 1;
            } else if imp.multiplier < 1.0 {
                log_small.add(ln_abs);
            }
            times.push(imp.time);
            multipliers.push(imp.multiplier);
            prefix_log_abs.push(log_abs.value());
            prefix_sign_flips.push(flips);
            prefix_log_neg_part.push(log_small.value());
        }
        Ok(ImpulseProductIndex {
            times,
            multipliers,
            prefix_log_abs,
            prefix_sign_flips,
            prefix_log_neg_part,
            horizon,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of impulse times `<= t`.
    fn rank(&self, t: f64) -> usize {
        self.times.partition_point(|&tau| tau <= t)
    }

    /// Number of impulse times `< t`.
    fn rank_strict(&self, t: f64) -> usize {
        self.times.partition_point(|&tau| tau < t)
    }

    fn window(&self, a: f64, b: f64) -> Result<(usize, usize), AlgebraError> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(AlgebraError::InvalidWindow { a, b });
        }
        if b > self.horizon {
            return Err(AlgebraError::HorizonExceeded {
                requested: b,
                horizon: self.horizon,
            });
        }
        Ok((self.rank(a), self.rank(b)))
    }

    fn product_between(&self, lo: usize, hi: usize) -> f64 {
        let magnitude = (self.prefix_log_abs[hi] - self.prefix_log_abs[lo]).exp();
        if (self.prefix_sign_flips[hi] - self.prefix_sign_flips[lo]) % 2 == 1 {
            -magnitude
        } else {
            magnitude
        }
    }

    /// `prod_{a < tau_j <= b} B_j`; 1 for an empty window.
    pub fn product(&self, a: f64, b: f64) -> Result<f64, AlgebraError> {
        let (lo, hi) = self.window(a, b)?;
        Ok(self.product_between(lo, hi))
    }

    /// `prod_{a < tau_j <= b} B_j^{-1}`.
    pub fn inverse_product(&self, a: f64, b: f64) -> Result<f64, AlgebraError> {
        let (lo, hi) = self.window(a, b)?;
        let magnitude = (self.prefix_log_abs[lo] - self.prefix_log_abs[hi]).exp();
        if (self.prefix_sign_flips[hi] - self.prefix_sign_flips[lo]) % 2 == 1 {
            Ok(-magnitude)
        } else {
            Ok(magnitude)
        }
    }

    /// `prod_{a < tau_j < b} B_j`: the product just before `b`.
    pub fn product_open(&self, a: f64, b: f64) -> Result<f64, AlgebraError> {
        self.window(a, b)?;
        let lo = self.rank(a);
        let hi = self.rank_strict(b).max(lo);
        Ok(self.product_between(lo, hi))
    }

    /// `sum ln B_j` over impulses in `(a, b]` with `B_j < 1`.
    pub fn log_sum_small_multipliers(&self, a: f64, b: f64) -> Result<f64, AlgebraError> {
        let (lo, hi) = self.window(a, b)?;
        if self.prefix_sign_flips[hi] != self.prefix_sign_flips[lo] {
            let j = (lo..hi)
                .find(|&j| self.multipliers[j] <= 0.0)
                .expect("a sign flip implies a negative multiplier");
            return Err(AlgebraError::NegativeMultiplier {
                time: self.times[j],
                multiplier: self.multipliers[j],
            });
        }
        Ok(self.prefix_log_neg_part[hi] - self.prefix_log_neg_part[lo])
    }

    /// Number of impulses in `(a, b]`.
    pub fn count(&self, a: f64, b: f64) -> Result<usize, AlgebraError> {
        let (lo, hi) = self.window(a, b)?;
        Ok(hi - lo)
    }

    /// Multiplier of the impulse exactly at `t`, if any.
    pub fn multiplier_at(&self, t: f64) -> Option<f64> {
        let i = self.rank_strict(t);
        (i < self.times.len() && self.times[i] == t).then(|| self.multipliers[i])
    }

    pub fn first_non_positive(&self) -> Option<Impulse> {
        self.times
            .iter()
            .zip(&self.multipliers)
            .find(|(_, &b)| b <= 0.0)
            .map(|(&t, &b)| Impulse::new(t, b))
    }
}
