//! Subsidies without a network externality (`e = 0`), for any continuous
//! affinity distribution.

use super::ConstantLevelSubsidy;
use crate::error::Result;
use crate::model::AffinityDistribution;
use crate::scalar::Scalar;
use crate::trajectory::{Phase, PiecewiseTrajectory, Segment, SegmentKind};

/// Two-phase path: relaxation toward `P(U > c - s)` during the subsidy, then
/// toward `P(U > c)`.
pub fn noext_cls_trajectory<T: Scalar, D: AffinityDistribution<T>>(
    dist: &D,
    cost: T,
    gamma: T,
    cls: &ConstantLevelSubsidy<T>,
    y0: T,
) -> Result<PiecewiseTrajectory<T>> {
    let relax = |start, level, limit, phase| Segment {
        start,
        level,
        kind: SegmentKind::Relax {
            limit,
            rate: -gamma,
        },
        phase,
    };
    let unsubsidized_limit = dist.ccdf(cost);
    if cls.duration.is_zero() {
        return PiecewiseTrajectory::new(vec![relax(
            cls.start,
            y0,
            unsubsidized_limit,
            Phase::Unsubsidized,
        )]);
    }
    let during = relax(
        cls.start,
        y0,
        dist.ccdf(cost - cls.level),
        Phase::Subsidized,
    );
    let reached = during.value_at(cls.end());
    PiecewiseTrajectory::new(vec![
        during,
        relax(cls.end(), reached, unsubsidized_limit, Phase::Unsubsidized),
    ])
}

/// Duration `T(s, y) = (1/gamma)·ln((F - y0)/(F - y))` with `F = P(U > c - s)`,
/// finite only when `y` lies strictly between `y0` and `F` (or equals `y0`).
pub fn noext_required_duration<T: Scalar, D: AffinityDistribution<T>>(
    dist: &D,
    cost: T,
    gamma: T,
    level: T,
    y0: T,
    target: T,
) -> Option<T> {
    if target == y0 {
        return Some(T::zero());
    }
    let reach = dist.ccdf(cost - level);
    let between = (y0 < target && target < reach) || (reach < target && target < y0);
    between.then(|| ((reach - y0) / (reach - target)).ln() / gamma)
}

/// `S(s, T) = s·(F·T - (1/gamma)·(F - y0)·(1 - exp(-gamma·T)))`.
pub fn noext_subsidy_cost<T: Scalar, D: AffinityDistribution<T>>(
    dist: &D,
    cost: T,
    gamma: T,
    cls: &ConstantLevelSubsidy<T>,
    y0: T,
) -> T {
    let reach = dist.ccdf(cost - cls.level);
    let t = cls.duration;
    cls.level * (reach * t + (reach - y0) * (-gamma * t).exp_m1() / gamma)
}

/// `S(s, T(s, y)) = s·(F·T(s, y) - (y - y0)/gamma)`.
pub fn noext_cost_at_target<T: Scalar, D: AffinityDistribution<T>>(
    dist: &D,
    cost: T,
    gamma: T,
    level: T,
    y0: T,
    target: T,
) -> Option<T> {
    let duration = noext_required_duration(dist, cost, gamma, level, y0, target)?;
    let reach = dist.ccdf(cost - level);
    Some(level * (reach * duration - (target - y0) / gamma))
}

/// Sufficient condition `P(U > c - s) < s·f(c - s)` for the cost at a fixed
/// target to decrease in `s`.
pub fn noext_cost_decreasing_condition<T: Scalar, D: AffinityDistribution<T>>(
    dist: &D,
    cost: T,
    level: T,
) -> bool {
    dist.ccdf(cost - level) < level * dist.density(cost - level)
}
