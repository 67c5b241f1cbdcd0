//! Closed-form adoption paths.
//!
//! Every regime of the uniform-affinity dynamics is a linear ODE
//! `x' = gamma·(a·x + b)`: `(a, b) = (-1, 0)` below the band, `(-1, 1)` above
//! it and the band-specific pair from [`band_ode`] inside. A path is built by
//! walking these regions and joining them at the exact band exit times.

use crate::error::{Error, Result};
use crate::model::{interior_equilibrium, AffinityDistribution, ModelParams};
use crate::scalar::Scalar;
use crate::trajectory::{Phase, PiecewiseTrajectory, Segment, SegmentKind};

/// `x' = gamma·(a·x + b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOde<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> LinearOde<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a, b }
    }

    /// `x' = -gamma·x`.
    pub fn decay() -> Self {
        Self::new(-T::one(), T::zero())
    }

    /// `x' = gamma·(1 - x)`.
    pub fn saturation() -> Self {
        Self::new(-T::one(), T::one())
    }
}

/// Coefficients of the in-band dynamics at effective cost `c'`:
/// `a = (e + u_min - u_max)/(u_max - u_min)`, `b = (u_max - c')/(u_max - u_min)`.
pub fn band_ode<T: Scalar>(params: &ModelParams<T>, effective_cost: T) -> LinearOde<T> {
    let spread = params.spread();
    LinearOde::new(
        (params.externality + params.u_min - params.u_max) / spread,
        (params.u_max - effective_cost) / spread,
    )
}

/// Exact solution of [`LinearOde`] from `(t0, x0)`; the `a = 0` case is the
/// linear drift `x0 + gamma·b·(t - t0)`.
pub fn solve_linear<T: Scalar>(ode: LinearOde<T>, gamma: T, t0: T, x0: T, t: T) -> T {
    let dt = t - t0;
    if ode.a.is_zero() {
        return x0 + gamma * ode.b * dt;
    }
    // ((a x0 + b) e^{a γ dt} - b)/a, rearranged to avoid cancellation near a = 0
    x0 + (ode.a * x0 + ode.b) * (ode.a * gamma * dt).exp_m1() / ode.a
}

/// Time at which the solution from `(t0, x0)` reaches `x`, or `None` when it
/// never does (target on the far side of the fixed point, or in the past).
pub fn hit_time<T: Scalar>(ode: LinearOde<T>, gamma: T, t0: T, x0: T, x: T) -> Option<T> {
    if x == x0 {
        return Some(t0);
    }
    let velocity = ode.a * x0 + ode.b;
    if velocity.is_zero() {
        return None;
    }
    let dt = if ode.a.is_zero() {
        (x - x0) / (gamma * ode.b)
    } else {
        // ratio (a x + b)/(a x0 + b) = 1 + a (x - x0)/(a x0 + b)
        let excess = ode.a * (x - x0) / velocity;
        if excess <= -T::one() {
            return None;
        }
        excess.ln_1p() / (gamma * ode.a)
    };
    (dt.is_finite() && dt >= T::zero()).then_some(t0 + dt)
}

/// In-band solution `x̂(t | t0, x0, c')`.
pub fn xhat<T: Scalar>(t: T, t0: T, x0: T, effective_cost: T, params: &ModelParams<T>) -> T {
    solve_linear(band_ode(params, effective_cost), params.gamma, t0, x0, t)
}

/// In-band hitting time `t̂(x | t0, x0, c')`.
pub fn that<T: Scalar>(
    x: T,
    t0: T,
    x0: T,
    effective_cost: T,
    params: &ModelParams<T>,
) -> Option<T> {
    hit_time(band_ode(params, effective_cost), params.gamma, t0, x0, x)
}

/// Durations `(T̂_M, T̂_m)` for the in-band dynamics started at `x0` to reach
/// the lower and upper band edges. Both are `None` without an externality.
pub fn band_exit_times<T: Scalar>(
    x0: T,
    effective_cost: T,
    params: &ModelParams<T>,
) -> (Option<T>, Option<T>) {
    let (Some(lo), Some(hi)) = (
        params.band_low_at(effective_cost),
        params.band_high_at(effective_cost),
    ) else {
        return (None, None);
    };
    (
        that(lo, T::zero(), x0, effective_cost, params),
        that(hi, T::zero(), x0, effective_cost, params),
    )
}

fn relax<T: Scalar>(start: T, level: T, limit: T, rate: T) -> Segment<T> {
    Segment {
        start,
        level,
        kind: SegmentKind::Relax { limit, rate },
        phase: Phase::Unsubsidized,
    }
}

/// Unsubsidized path `x(t | t0, x0)` at the parameters' cost.
///
/// Without an externality this is [`noext_trajectory`] at `P(U > c)`.
pub fn unsubsidized_trajectory<T: Scalar>(
    params: &ModelParams<T>,
    t0: T,
    x0: T,
) -> Result<PiecewiseTrajectory<T>> {
    if !(T::zero() <= x0 && x0 <= T::one()) {
        return Err(Error::InvalidInput(format!(
            "initial level must lie in [0, 1], got {x0}"
        )));
    }
    if !t0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "start time must be finite, got {t0}"
        )));
    }
    let gamma = params.gamma;
    let (Some(lo), Some(hi)) = (params.band_low(), params.band_high()) else {
        let reach = params.affinity().ccdf(params.cost);
        return noext_trajectory(reach, gamma, t0, x0);
    };

    let below = |start, level| relax(start, level, T::zero(), -gamma);
    let above = |start, level| relax(start, level, T::one(), -gamma);

    if x0 <= lo {
        return Ok(PiecewiseTrajectory::single(below(t0, x0)));
    }
    if x0 >= hi {
        return Ok(PiecewiseTrajectory::single(above(t0, x0)));
    }

    let ode = band_ode(params, params.cost);
    let inside = if ode.a.is_zero() {
        Segment {
            start: t0,
            level: x0,
            kind: SegmentKind::Drift {
                slope: gamma * ode.b,
            },
            phase: Phase::Unsubsidized,
        }
    } else {
        relax(
            t0,
            x0,
            interior_equilibrium(params.cost, params)?,
            ode.a * gamma,
        )
    };
    let mut segments = vec![inside];
    if let Some(t_exit) = hit_time(ode, gamma, t0, x0, lo) {
        segments.push(below(t_exit, lo));
    } else if let Some(t_exit) = hit_time(ode, gamma, t0, x0, hi) {
        segments.push(above(t_exit, hi));
    }
    PiecewiseTrajectory::new(segments)
}

/// No-externality path `x(t) = F + (x0 - F)·exp(-gamma·(t - t0))` with
/// `F = P(U > c)` passed as `ccdf_at_cost`.
pub fn noext_trajectory<T: Scalar>(
    ccdf_at_cost: T,
    gamma: T,
    t0: T,
    x0: T,
) -> Result<PiecewiseTrajectory<T>> {
    if !(T::zero() <= ccdf_at_cost && ccdf_at_cost <= T::one()) {
        return Err(Error::InvalidInput(format!(
            "ccdf value must lie in [0, 1], got {ccdf_at_cost}"
        )));
    }
    Ok(PiecewiseTrajectory::single(relax(
        t0,
        x0,
        ccdf_at_cost,
        -gamma,
    )))
}

/// [`noext_trajectory`] for an arbitrary affinity distribution.
pub fn noext_trajectory_for<T: Scalar, D: AffinityDistribution<T>>(
    dist: &D,
    cost: T,
    gamma: T,
    t0: T,
    x0: T,
) -> Result<PiecewiseTrajectory<T>> {
    noext_trajectory(dist.ccdf(cost), gamma, t0, x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex3() -> ModelParams<f64> {
        ModelParams::new(1.0, 2.0, 3.0, 3.0, 1.0 / 3.0).unwrap()
    }

    /// Bisection on `solve_linear`, independent of `hit_time`.
    fn bisect_hit(ode: LinearOde<f64>, gamma: f64, x0: f64, x: f64, t_max: f64) -> f64 {
        let f = |t: f64| solve_linear(ode, gamma, 0.0, x0, t) - x;
        let (mut lo, mut hi) = (0.0, t_max);
        assert!(f(lo) * f(hi) <= 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn solve_linear_examples() {
        let e1 = (-1.0f64).exp();
        assert!((solve_linear(LinearOde::decay(), 1.0, 0.0, 1.0, 1.0) - e1).abs() < 1e-15);
        assert!(
            (solve_linear(LinearOde::saturation(), 1.0, 0.0, 0.0, 1.0) - (1.0 - e1)).abs() < 1e-15
        );
        assert!(
            (solve_linear(LinearOde::new(0.0f64, 1.0), 1.0, 0.0, 0.0, 0.5) - 0.5).abs() < 1e-15
        );
    }

    #[test]
    fn solve_linear_continuous_at_zero_slope() {
        let near = solve_linear(LinearOde::new(1e-12f64, 1.0), 1.0, 0.0, 0.0, 0.5);
        assert!((near - 0.5).abs() < 1e-10);
    }

    #[test]
    fn hit_time_examples() {
        let e1 = (-1.0f64).exp();
        assert!((hit_time(LinearOde::decay(), 1.0, 0.0, 1.0, e1).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(hit_time(LinearOde::saturation(), 1.0, 0.0, 0.0, 1.0), None);
        let ode = LinearOde::new(2.0, -1.0);
        let t = hit_time(ode, 1.0 / 3.0, 0.0, 0.4, 1.0 / 3.0).unwrap();
        let oracle = bisect_hit(ode, 1.0 / 3.0, 0.4, 1.0 / 3.0, 5.0);
        assert!((t - oracle).abs() < 1e-12);
        assert!((t - 1.5 * (5.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn hit_time_rejects_past_and_far_side() {
        // moving up toward 1, target below start lies in the past
        assert_eq!(hit_time(LinearOde::saturation(), 1.0, 0.0, 0.5, 0.2), None);
        // drift away from the target
        assert_eq!(hit_time(LinearOde::new(0.0, 1.0), 1.0, 0.0, 0.5, 0.2), None);
        assert_eq!(hit_time(LinearOde::new(0.0, 0.0), 1.0, 0.0, 0.5, 0.7), None);
        assert_eq!(
            hit_time(LinearOde::new(0.0, 2.0), 1.0, 1.0, 0.5, 0.7),
            Some(1.1)
        );
    }

    #[test]
    fn xhat_and_that_examples() {
        let p = ex3();
        assert_eq!(xhat(0.0, 0.0, 0.4, 3.0, &p), 0.4);
        let t = that(1.0 / 3.0, 0.0, 0.4, 3.0, &p).unwrap();
        assert!((t - 0.7662384356489861).abs() < 1e-12);
        assert!((xhat(0.766, 0.0, 0.4, 3.0, &p) - 1.0 / 3.0).abs() < 1e-4);
        assert!((xhat(t, 0.0, 0.4, 3.0, &p) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(xhat(17.0, 0.0, 0.5, 3.0, &p), 0.5);
        assert_eq!(that(0.4, 2.0, 0.4, 3.0, &p), Some(2.0));
        assert_eq!(that(2.0 / 3.0, 0.0, 0.25, 3.0, &p), None);
    }

    #[test]
    fn band_exit_examples() {
        let p = ex3();
        let (down, up) = band_exit_times(0.4, 3.0, &p);
        assert!((down.unwrap() - 0.7662384356489861).abs() < 1e-12);
        assert_eq!(up, None);
        let (down, up) = band_exit_times(0.6, 3.0, &p);
        assert_eq!(down, None);
        assert!((up.unwrap() - 0.7662384356489861).abs() < 1e-12);
        assert_eq!(band_exit_times(1.0 / 3.0, 3.0, &p).0, Some(0.0));
        let e0 = ModelParams::new(1.0, 2.0, 1.5, 0.0, 1.0).unwrap();
        assert_eq!(band_exit_times(0.3, 1.5, &e0), (None, None));
    }

    #[test]
    fn unsubsidized_example_three_decay() {
        let tr = unsubsidized_trajectory(&ex3(), 0.0, 0.25).unwrap();
        assert_eq!(tr.segments().len(), 1);
        assert!((tr.eval(3.0).unwrap() - 0.25 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((tr.eval(3.0).unwrap() - 0.09196986029286058).abs() < 1e-12);
    }

    #[test]
    fn unsubsidized_rises_above_knee() {
        let tr = unsubsidized_trajectory(&ex3(), 0.0, 0.6).unwrap();
        assert_eq!(tr.limit(), Some(1.0));
        assert_eq!(tr.segments().len(), 2);
        let tb = tr.breakpoints().next().unwrap();
        let before = tr.segments()[0].value_at(tb);
        assert!((before - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unsubsidized_case_two_converges_to_interior() {
        let p = ModelParams::new(1.0, 2.0, 1.75, 0.5, 1.0).unwrap();
        for x0 in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let tr = unsubsidized_trajectory(&p, 0.0, x0).unwrap();
            assert_eq!(tr.limit(), Some(0.5));
        }
    }

    #[test]
    fn knee_start_stays_put() {
        let tr = unsubsidized_trajectory(&ex3(), 0.0, 0.5).unwrap();
        assert_eq!(tr.eval(100.0).unwrap(), 0.5);
    }

    #[test]
    fn degenerate_band_uses_drift() {
        // e = u_max - u_min: a = 0 inside the band
        let p = ModelParams::new(1.0f64, 2.0, 1.5, 1.0, 1.0).unwrap();
        let tr = unsubsidized_trajectory(&p, 0.0, 0.2).unwrap();
        assert!(matches!(tr.segments()[0].kind, SegmentKind::Drift { .. }));
        assert_eq!(tr.limit(), Some(1.0));
        // band_high = 0.5, drift slope 0.5
        assert!((tr.breakpoints().next().unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn noext_examples() {
        let tr = noext_trajectory(0.5, 1.0, 0.0, 0.0).unwrap();
        assert!((tr.eval(2.0).unwrap() - 0.5 * (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert_eq!(tr.limit(), Some(0.5));
        let flat = noext_trajectory(0.3, 1.0, 0.0, 0.3).unwrap();
        assert_eq!(flat.eval(5.0).unwrap(), 0.3);
        let tr = noext_trajectory(0.6f64, 1.0, 0.0, 0.0).unwrap();
        assert!((tr.eval(1.7918).unwrap() - 0.5000040529950585).abs() < 1e-12);
        assert!((tr.eval(6.0f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert!(noext_trajectory(1.5, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn rejects_out_of_range_start() {
        assert!(unsubsidized_trajectory(&ex3(), 0.0, 1.2).is_err());
        assert!(unsubsidized_trajectory(&ex3(), 0.0, -0.1).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let p = ModelParams::new(1.0f32, 2.0, 3.0, 3.0, 1.0 / 3.0).unwrap();
        let tr = unsubsidized_trajectory(&p, 0.0, 0.25).unwrap();
        assert!((tr.eval(3.0).unwrap() - 0.25 * (-1.0f32).exp()).abs() < 1e-6);
    }
}
