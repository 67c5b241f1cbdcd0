//! Exact piecewise adoption paths.

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, Quadrature};
use crate::scalar::Scalar;

/// Whether a subsidy is in force over a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Subsidized,
    Unsubsidized,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Subsidized => "subsidized",
            Phase::Unsubsidized => "unsubsidized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind<T> {
    /// `x(t) = limit + (x_k - limit)·exp(rate·(t - t_k))`.
    Relax { limit: T, rate: T },
    /// `x(t) = x_k + slope·(t - t_k)`.
    Drift { slope: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub start: T,
    pub level: T,
    pub kind: SegmentKind<T>,
    pub phase: Phase,
}

impl<T: Scalar> Segment<T> {
    pub fn value_at(&self, t: T) -> T {
        let dt = t - self.start;
        match self.kind {
            SegmentKind::Relax { limit, rate } => {
                self.level + (self.level - limit) * (rate * dt).exp_m1()
            }
            SegmentKind::Drift { slope } => self.level + slope * dt,
        }
    }

    /// Level approached as `t -> ∞`, if the segment settles.
    pub fn limit(&self) -> Option<T> {
        match self.kind {
            SegmentKind::Relax { limit, rate } if rate < T::zero() => Some(limit),
            SegmentKind::Relax { rate, .. } if rate.is_zero() => Some(self.level),
            SegmentKind::Relax { limit, .. } if self.level == limit => Some(limit),
            SegmentKind::Drift { slope } if slope.is_zero() => Some(self.level),
            _ => None,
        }
    }
}

/// One row of [`PiecewiseTrajectory::sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub x: T,
    pub phase: Phase,
}

/// A closed-form path made of contiguous segments; the last one extends to
/// `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTrajectory<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> PiecewiseTrajectory<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput(
                "trajectory needs at least one segment".into(),
            ));
        }
        if segments.windows(2).any(|w| !(w[0].start <= w[1].start)) {
            return Err(Error::InvalidInput(
                "segment start times must be ordered".into(),
            ));
        }
        Ok(Self { segments })
    }

    pub(crate) fn single(segment: Segment<T>) -> Self {
        Self {
            segments: vec![segment],
        }
    }

    pub fn start_time(&self) -> T {
        self.segments[0].start
    }

    pub fn start_level(&self) -> T {
        self.segments[0].level
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// Interior breakpoints (segment start times after the first).
    pub fn breakpoints(&self) -> impl Iterator<Item = T> + '_ {
        self.segments[1..].iter().map(|s| s.start)
    }

    fn active(&self, t: T) -> &Segment<T> {
        let idx = self.segments.partition_point(|s| s.start <= t);
        &self.segments[idx.saturating_sub(1)]
    }

    pub fn eval(&self, t: T) -> Result<T> {
        if t < self.start_time() {
            return Err(Error::BeforeStart {
                t: t.as_f64(),
                start: self.start_time().as_f64(),
            });
        }
        Ok(self.active(t).value_at(t))
    }

    pub fn phase_at(&self, t: T) -> Phase {
        self.active(t).phase
    }

    /// Long-run level, if the final segment settles.
    pub fn limit(&self) -> Option<T> {
        self.segments.last().and_then(Segment::limit)
    }

    pub(crate) fn with_phase(mut self, phase: Phase) -> Self {
        for s in &mut self.segments {
            s.phase = phase;
        }
        self
    }

    /// Follows `self` until `tail` starts, then `tail`.
    pub(crate) fn then(mut self, tail: Self) -> Self {
        let cut = tail.start_time();
        self.segments.retain(|s| s.start < cut);
        self.segments.extend(tail.segments);
        self
    }

    /// Samples on `t0 + k·step` up to `t_end`, with every breakpoint inside
    /// the span added as an extra row.
    pub fn sample(&self, t_end: T, step: T) -> Result<Vec<Sample<T>>> {
        let t0 = self.start_time();
        if !(step > T::zero()) {
            return Err(Error::InvalidStep(format!(
                "output step must be > 0, got {step}"
            )));
        }
        if t_end < t0 {
            return Err(Error::InvalidInput(format!(
                "end time {t_end} precedes start time {t0}"
            )));
        }
        let n = ((t_end - t0) / step).floor().to_usize().unwrap_or(0);
        let mut times: Vec<T> = (0..=n).map(|k| t0 + step * T::lit(k as f64)).collect();
        if *times.last().expect("at least t0") < t_end {
            times.push(t_end);
        }
        times.extend(self.breakpoints().filter(|&b| t0 < b && b < t_end));
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        times.dedup();
        Ok(times
            .into_iter()
            .map(|t| {
                let seg = self.active(t);
                Sample {
                    t,
                    x: seg.value_at(t),
                    phase: seg.phase,
                }
            })
            .collect())
    }

    /// `∫_a^b x(t) dt` by adaptive Simpson, split at the breakpoints.
    pub fn integral(&self, a: T, b: T, tol: T) -> Result<Quadrature<T>> {
        if a < self.start_time() {
            return Err(Error::BeforeStart {
                t: a.as_f64(),
                start: self.start_time().as_f64(),
            });
        }
        let mut cuts = vec![a];
        cuts.extend(self.breakpoints().filter(|&t| a < t && t < b));
        cuts.push(b);
        let share = tol / T::lit((cuts.len() - 1) as f64);
        let mut total = Quadrature {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        };
        for w in cuts.windows(2) {
            let seg = *self.active(w[0]);
            let q = adaptive_simpson(|t| seg.value_at(t), w[0], w[1], share);
            total.value = total.value + q.value;
            total.error = total.error + q.error;
            total.evaluations += q.evaluations;
        }
        Ok(total)
    }
}

/// Free-function form of [`PiecewiseTrajectory::eval`].
pub fn eval<T: Scalar>(traj: &PiecewiseTrajectory<T>, t: T) -> Result<T> {
    traj.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relax(start: f64, level: f64, limit: f64, rate: f64) -> Segment<f64> {
        Segment {
            start,
            level,
            kind: SegmentKind::Relax { limit, rate },
            phase: Phase::Unsubsidized,
        }
    }

    #[test]
    fn eval_at_start_returns_start_level() {
        let tr = PiecewiseTrajectory::single(relax(2.0, 0.3, 1.0, -1.0));
        assert_eq!(tr.eval(2.0).unwrap(), 0.3);
    }

    #[test]
    fn eval_before_start_errors() {
        let tr = PiecewiseTrajectory::single(relax(2.0, 0.3, 1.0, -1.0));
        assert!(matches!(tr.eval(1.0), Err(Error::BeforeStart { .. })));
    }

    #[test]
    fn picks_active_segment() {
        let first = relax(0.0, 0.0, 1.0, -1.0);
        let t1 = 1.0;
        let second = relax(t1, first.value_at(t1), 0.5, -1.0);
        let tr = PiecewiseTrajectory::new(vec![first, second]).unwrap();
        assert!((tr.eval(0.5).unwrap() - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        let expect = 0.5 + (first.value_at(t1) - 0.5) * (-1.0f64).exp();
        assert!((tr.eval(2.0).unwrap() - expect).abs() < 1e-15);
        assert_eq!(tr.limit(), Some(0.5));
        assert_eq!(tr.breakpoints().collect::<Vec<_>>(), vec![1.0]);
    }

    #[test]
    fn unordered_segments_rejected() {
        assert!(PiecewiseTrajectory::new(vec![
            relax(1.0, 0.0, 1.0, -1.0),
            relax(0.0, 0.0, 1.0, -1.0)
        ])
        .is_err());
        assert!(PiecewiseTrajectory::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn sample_includes_breakpoints() {
        let first = relax(0.0, 0.0, 1.0, -1.0);
        let second = Segment {
            phase: Phase::Subsidized,
            ..relax(0.25, first.value_at(0.25), 0.5, -1.0)
        };
        let tr = PiecewiseTrajectory::new(vec![first, second]).unwrap();
        let rows = tr.sample(1.0, 0.1).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[0].t, 0.0);
        assert!(rows
            .iter()
            .any(|r| r.t == 0.25 && r.phase == Phase::Subsidized));
        assert_eq!(rows.last().unwrap().t, 1.0);
        assert!(tr.sample(-1.0, 0.1).is_err());
        assert!(tr.sample(1.0, 0.0).is_err());
    }

    #[test]
    fn integral_of_relaxation() {
        let tr = PiecewiseTrajectory::single(relax(0.0, 0.0, 1.0, -1.0));
        let q = tr.integral(0.0, 2.0, 1e-12).unwrap();
        assert!((q.value - (2.0 - (1.0 - (-2.0f64).exp()))).abs() < 1e-12);
    }

    #[test]
    fn drift_and_growth_limits() {
        let d = Segment {
            start: 0.0,
            level: 0.2,
            kind: SegmentKind::Drift { slope: 0.0 },
            phase: Phase::Subsidized,
        };
        assert_eq!(d.limit(), Some(0.2));
        assert_eq!(relax(0.0, 0.4, 0.5, 2.0).limit(), None);
        assert_eq!(relax(0.0, 0.5, 0.5, 2.0).limit(), Some(0.5));
    }
}
