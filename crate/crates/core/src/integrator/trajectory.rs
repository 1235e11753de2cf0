use std::io::{self, Write};

/// One step of cubic Hermite dense output on `[t_start, t_end]`.
///
/// `x_start` is the right value at `t_start` (after any jump there) and `x_end`
/// the left limit at `t_end` (before any jump there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: f64,
    pub x_end: f64,
    pub dx_start: f64,
    pub dx_end: f64,
}

impl Segment {
    /// Hermite interpolant; also used slightly past `t_end` for extrapolation.
    pub fn eval(&self, t: f64) -> f64 {
        let h = self.t_end - self.t_start;
        let s = (t - self.t_start) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.x_start + h10 * h * self.dx_start + h01 * self.x_end + h11 * h * self.dx_end
    }
}

/// State discontinuity `x(time) = multiplier * left + kick`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub left: f64,
    pub right: f64,
    pub multiplier: f64,
    pub kick: f64,
}

/// Piecewise dense solution of an impulsive delay problem.
///
/// Queries are right-continuous; [`left_limit`](Self::left_limit) gives `x(t - 0)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    t0: f64,
    x0: f64,
    t_end: f64,
    x_end: f64,
    segments: Vec<Segment>,
    jumps: Vec<Jump>,
    extrapolated_lookups: usize,
}

impl Trajectory {
    pub(crate) fn new(
        t0: f64,
        x0: f64,
        t_end: f64,
        x_end: f64,
        segments: Vec<Segment>,
        jumps: Vec<Jump>,
        extrapolated_lookups: usize,
    ) -> Self {
        Trajectory {
            t0,
            x0,
            t_end,
            x_end,
            segments,
            jumps,
            extrapolated_lookups,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.t_end)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Right value at the final time.
    pub fn final_value(&self) -> f64 {
        self.x_end
    }

    /// How many delayed lookups fell inside the step being computed.
    pub fn extrapolated_lookups(&self) -> usize {
        self.extrapolated_lookups
    }

    /// Step boundaries, starting at `t0` and ending at `t_end`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(self.t0);
        out.extend(self.segments.iter().map(|seg| seg.t_end));
        out
    }

    /// `(t, x(t))` at every step boundary, right values.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.extend(self.segments.iter().map(|seg| (seg.t_start, seg.x_start)));
        out.push((self.t_end, self.x_end));
        out
    }

    /// Index of the segment with `t_start <= t < t_end`.
    fn segment_index(&self, t: f64) -> Option<usize> {
        if self.segments.is_empty() || t < self.t0 || t >= self.t_end {
            return None;
        }
        let i = self.segments.partition_point(|seg| seg.t_start <= t);
        Some(i - 1)
    }

    /// Right-continuous value; `None` outside `[t0, t_end]`.
    pub fn value(&self, t: f64) -> Option<f64> {
        if t == self.t_end {
            return Some(self.x_end);
        }
        let i = self.segment_index(t)?;
        let seg = &self.segments[i];
        if t == seg.t_start {
            Some(seg.x_start)
        } else {
            Some(seg.eval(t))
        }
    }

    /// Left limit `x(t - 0)`; at `t0` this is `x0`.
    pub fn left_limit(&self, t: f64) -> Option<f64> {
        if t == self.t0 {
            return Some(self.x0);
        }
        if t <= self.t0 || t > self.t_end || self.segments.is_empty() {
            return None;
        }
        // Segment with t_start < t <= t_end.
        let i = self.segments.partition_point(|seg| seg.t_start < t) - 1;
        let seg = &self.segments[i];
        if t == seg.t_end {
            Some(seg.x_end)
        } else {
            Some(seg.eval(t))
        }
    }

    /// Times after `t_from` where the solution changes sign.
    ///
    /// Crossings inside a step are refined by bisection on the dense output;
    /// a jump whose left and right values differ in sign is reported at the
    /// jump time. Runs of exact zeros are reported at their first point.
    pub fn sign_changes(&self, t_from: f64) -> Vec<f64> {
        // (time, value, segment index or None for a point between segments)
        let mut samples: Vec<(f64, f64, Option<usize>)> = Vec::new();
        let start = self.segment_index(t_from.max(self.t0));
        let Some(first) = start else {
            return Vec::new();
        };
        let v0 = self.value(t_from.max(self.t0)).unwrap_or(0.0);
        samples.push((t_from.max(self.t0), v0, Some(first)));
        for (i, seg) in self.segments.iter().enumerate().skip(first) {
            if i > first {
                samples.push((seg.t_start, seg.x_start, Some(i)));
            }
            samples.push((seg.t_end, seg.x_end, Some(i)));
        }
        if self.x_end != self.segments.last().map_or(self.x_end, |s| s.x_end) {
            samples.push((self.t_end, self.x_end, None));
        }

        let mut crossings = Vec::new();
        let mut last_nonzero: Option<(usize, f64)> = None;
        for (k, &(t, v, seg)) in samples.iter().enumerate() {
            if v == 0.0 || v.is_nan() {
                continue;
            }
            if let Some((j, sign)) = last_nonzero {
                if sign * v < 0.0 {
                    let (tp, _, seg_prev) = samples[j];
                    let crossing = if k > j + 1 {
                        // Exact zeros in between.
                        samples[j + 1].0
                    } else if tp == t {
                        t
                    } else {
                        match seg {
                            Some(i) if seg_prev == seg => bisect(&self.segments[i], tp, t),
                            _ => t,
                        }
                    };
                    crossings.push(crossing);
                }
            }
            last_nonzero = Some((k, v.signum()));
        }
        crossings
    }

    /// CSV with columns `t,x,is_jump,left_value`.
    ///
    /// One row per step boundary; every jump contributes two rows at the jump
    /// time, the left value first and then the right value, both with
    /// `is_jump = 1` and `left_value` filled in.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x,is_jump,left_value")?;
        let mut jumps = self.jumps.iter().peekable();
        for (t, x) in self.nodes() {
            while let Some(jump) = jumps.peek() {
                if jump.time < t {
                    jumps.next();
                } else {
                    break;
                }
            }
            match jumps.peek() {
                Some(jump) if jump.time == t => {
                    writeln!(
                        out,
                        "{},{},1,{}",
                        fmt17(t),
                        fmt17(jump.left),
                        fmt17(jump.left)
                    )?;
                    writeln!(out, "{},{},1,{}", fmt17(t), fmt17(x), fmt17(jump.left))?;
                    jumps.next();
                }
                _ => writeln!(out, "{},{},0,", fmt17(t), fmt17(x))?,
            }
        }
        Ok(())
    }
}

/// Round-trip decimal formatting with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn bisect(seg: &Segment, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = seg.eval(lo);
    if f_lo == 0.0 {
        f_lo = seg.x_start;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = seg.eval(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
