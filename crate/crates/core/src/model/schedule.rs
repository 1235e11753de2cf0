use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impulse {
    pub time: f64,
    pub multiplier: f64,
}

impl Impulse {
    pub fn new(time: f64, multiplier: f64) -> Self {
        Impulse { time, multiplier }
    }
}

/// Impulses at `start, start + period, start + 2 period, ...`, all with the same multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicTail {
    pub start: f64,
    pub period: f64,
    pub multiplier: f64,
}

/// Jump times `tau_j` and multipliers `B_j` with `x(tau_j) = B_j x(tau_j - 0)`.
///
/// Ordering of the explicit list is reported by validation rather than enforced here,
/// so malformed schedules can still be inspected.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImpulseSchedule {
    explicit: Vec<Impulse>,
    tail: Option<PeriodicTail>,
}

impl ImpulseSchedule {
    pub fn new(explicit: Vec<Impulse>, tail: Option<PeriodicTail>) -> Result<Self, ModelError> {
        for (j, imp) in explicit.iter().enumerate() {
            if !imp.time.is_finite() || !imp.multiplier.is_finite() {
                return Err(ModelError::InvalidSchedule(format!(
                    "impulse {} is not finite",
                    j + 1
                )));
            }
            if imp.multiplier == 0.0 {
                return Err(ModelError::ZeroMultiplier { time: imp.time });
            }
        }
        if let Some(tail) = &tail {
            if !(tail.period.is_finite() && tail.period > 0.0) || !tail.start.is_finite() {
                return Err(ModelError::InvalidSchedule(format!(
                    "periodic tail needs a finite start and a positive period, got start {} period {}",
                    tail.start, tail.period
                )));
            }
            if tail.multiplier == 0.0 || !tail.multiplier.is_finite() {
                return Err(ModelError::ZeroMultiplier { time: tail.start });
            }
        }
        Ok(ImpulseSchedule { explicit, tail })
    }

    pub fn empty() -> Self {
        ImpulseSchedule::default()
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, ModelError> {
        Self::new(
            pairs.iter().map(|&(t, b)| Impulse::new(t, b)).collect(),
            None,
        )
    }

    pub fn periodic(start: f64, period: f64, multiplier: f64) -> Result<Self, ModelError> {
        Self::new(
            Vec::new(),
            Some(PeriodicTail {
                start,
                period,
                multiplier,
            }),
        )
    }

    pub fn explicit(&self) -> &[Impulse] {
        &self.explicit
    }

    pub fn tail(&self) -> Option<&PeriodicTail> {
        self.tail.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.tail.is_none()
    }

    /// All impulses with `time <= horizon`, explicit ones first, in schedule order.
    pub fn materialize(&self, horizon: f64) -> Vec<Impulse> {
        let mut out: Vec<Impulse> = self
            .explicit
            .iter()
            .copied()
            .filter(|imp| imp.time <= horizon)
            .collect();
        if let Some(tail) = &self.tail {
            // Times are computed by multiplication so that every horizon sees the same values.
            let mut i = 0u64;
            loop {
                let time = tail.start + tail.period * i as f64;
                if time > horizon {
                    break;
                }
                out.push(Impulse::new(time, tail.multiplier));
                i += 1;
            }
        }
        out
    }

    /// Replace every multiplier, keeping the times.
    pub fn with_multiplier(&self, multiplier: f64) -> Result<Self, ModelError> {
        Self::new(
            self.explicit
                .iter()
                .map(|imp| Impulse::new(imp.time, multiplier))
                .collect(),
            self.tail.map(|tail| PeriodicTail { multiplier, ..tail }),
        )
    }

    /// First impulse up to `horizon` whose multiplier is not positive.
    pub fn first_non_positive(&self, horizon: f64) -> Option<Impulse> {
        self.materialize(horizon)
            .into_iter()
            .find(|imp| imp.multiplier <= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_multiplier_rejected() {
        assert!(matches!(
            ImpulseSchedule::from_pairs(&[(1.0, 0.0)]),
            Err(ModelError::ZeroMultiplier { .. })
        ));
        assert!(ImpulseSchedule::periodic(1.0, 0.0, 2.0).is_err());
        assert!(ImpulseSchedule::periodic(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn explicit_then_tail() {
        let s = ImpulseSchedule::new(
            vec![Impulse::new(0.5, 3.0)],
            Some(PeriodicTail {
                start: 1.0,
                period: 1.0,
                multiplier: 2.0,
            }),
        )
        .unwrap();
        let times: Vec<f64> = s.materialize(3.5).iter().map(|i| i.time).collect();
        assert_eq!(times, vec![0.5, 1.0, 2.0, 3.0]);
        assert_eq!(s.materialize(0.1).len(), 0);
    }

    proptest! {
        #[test]
        fn materialization_is_prefix_stable(
            start in 0.01f64..5.0,
            period in 0.05f64..3.0,
            horizon in 1.0f64..50.0,
            extra in 0.0f64..50.0,
        ) {
            let s = ImpulseSchedule::periodic(start, period, 0.7).unwrap();
            let short = s.materialize(horizon);
            let long = s.materialize(horizon + extra);
            prop_assert!(long.len() >= short.len());
            prop_assert_eq!(&long[..short.len()], &short[..]);
            prop_assert!(long[short.len()..].iter().all(|imp| imp.time > horizon));
        }
    }
}
