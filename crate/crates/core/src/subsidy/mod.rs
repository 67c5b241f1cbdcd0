//! Constant-level subsidies: a cost reduction `s` held for a duration `T`
//! from `t0`, after which the full cost applies again.

mod full;
mod min_duration;
mod noext;
mod sweep;

pub use full::{
    full_subsidy_analysis, FullSubsidyInterval, FullSubsidyReport, FullSubsidyThresholds,
};
pub use min_duration::{
    boundary_gaps, cost_row, min_duration, min_duration_cost, min_duration_cost_as,
    min_duration_trajectory, min_subsidy, BoundaryGap, CostEstimate, CostMethod, CostRow,
    MinDurationPlan, MinDurationRegime, SubsidyBounds, COST_QUADRATURE_TOL,
};
pub use noext::{
    noext_cls_trajectory, noext_cost_at_target, noext_cost_decreasing_condition,
    noext_required_duration, noext_subsidy_cost,
};
pub use sweep::{
    default_grid, sweep, ParetoFrontier, SignPattern, SweepReport, SweepRow, Trend,
    DEFAULT_GRID_POINTS,
};

use crate::closed_form::unsubsidized_trajectory;
use crate::error::{Error, Result};
use crate::model::{interior_equilibrium, ModelParams};
use crate::oracle::SubsidySchedule;
use crate::scalar::{Real, Scalar};
use crate::trajectory::{Phase, PiecewiseTrajectory};

/// An `(s, T)` subsidy starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLevelSubsidy<T> {
    pub level: T,
    pub duration: T,
    pub start: T,
}

impl<T: Real> ConstantLevelSubsidy<T> {
    pub fn new(level: T, duration: T, start: T) -> Result<Self> {
        if level < T::zero() || !level.as_f64().is_finite() {
            return Err(Error::InvalidInput(format!(
                "subsidy level must be finite and >= 0, got {level}"
            )));
        }
        if duration < T::zero() || !duration.as_f64().is_finite() {
            return Err(Error::InvalidInput(format!(
                "subsidy duration must be finite and >= 0, got {duration}"
            )));
        }
        Ok(Self {
            level,
            duration,
            start,
        })
    }

    /// Checks `s <= c`.
    pub fn check_cost(&self, cost: T) -> Result<()> {
        if self.level > cost {
            return Err(Error::InvalidInput(format!(
                "subsidy level {} exceeds the cost {cost}",
                self.level
            )));
        }
        Ok(())
    }

    pub fn end(&self) -> T {
        self.start + self.duration
    }
}

impl<T: Real> SubsidySchedule<T> for ConstantLevelSubsidy<T> {
    fn level(&self, t: T, _x: T) -> T {
        if self.start <= t && t <= self.end() {
            self.level
        } else {
            T::zero()
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![self.start, self.end()]
    }
}

/// Subsidized path: the unsubsidized dynamics at cost `c - s` over
/// `[t0, t0 + T]`, then at cost `c` from the level reached.
pub fn subsidized_trajectory<T: Scalar>(
    params: &ModelParams<T>,
    cls: &ConstantLevelSubsidy<T>,
    y0: T,
) -> Result<PiecewiseTrajectory<T>> {
    params.validate()?;
    cls.check_cost(params.cost)?;
    let after = |t_end: T, level: T| -> Result<PiecewiseTrajectory<T>> {
        Ok(unsubsidized_trajectory(params, t_end, level.clamp_unit())?
            .with_phase(Phase::Unsubsidized))
    };
    if cls.duration.is_zero() {
        return after(cls.start, y0);
    }
    let during = unsubsidized_trajectory(&params.at_cost(params.cost - cls.level), cls.start, y0)?
        .with_phase(Phase::Subsidized);
    let reached = during.eval(cls.end())?;
    Ok(during.then(after(cls.end(), reached)?))
}

/// Checks the bistable regime `u_max <= c <= u_min + e` and the start
/// `0 <= y0 < x°(c) <= 1`; returns `x°(c)`.
pub fn check_bistable_start<T: Real>(params: &ModelParams<T>, y0: T) -> Result<T> {
    check_bistable(params)?;
    let knee = interior_equilibrium(params.cost, params)?;
    check_start(params, y0, Some(knee))?;
    Ok(knee)
}

fn check_bistable<T: Real>(params: &ModelParams<T>) -> Result<()> {
    params.validate()?;
    if params.cost < params.u_max {
        return Err(Error::Assumption(format!(
            "the subsidy analysis requires u_max <= c, got u_max = {} > c = {}",
            params.u_max, params.cost
        )));
    }
    if params.cost > params.u_min + params.externality {
        return Err(Error::Assumption(format!(
            "the subsidy analysis requires c <= u_min + e, got c = {} > u_min + e = {}",
            params.cost,
            params.u_min + params.externality
        )));
    }
    Ok(())
}

fn check_start<T: Real>(params: &ModelParams<T>, y0: T, knee: Option<T>) -> Result<()> {
    let _ = params;
    if y0 < T::zero() {
        return Err(Error::Assumption(format!(
            "the subsidy analysis requires 0 <= y0, got y0 = {y0}"
        )));
    }
    match knee {
        Some(knee) if !(y0 < knee) => Err(Error::Assumption(format!(
            "the subsidy analysis requires y0 < x°(c), got y0 = {y0} >= x°(c) = {knee}"
        ))),
        Some(knee) if knee > T::one() => Err(Error::Assumption(format!(
            "the subsidy analysis requires x°(c) <= 1, got x°(c) = {knee}"
        ))),
        None if y0 >= T::one() => Err(Error::Assumption(format!(
            "the subsidy analysis requires y0 < 1, got y0 = {y0}"
        ))),
        _ => Ok(()),
    }
}
