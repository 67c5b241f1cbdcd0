//! Shortest duration of a level-`s` subsidy that tips the market past the
//! knee `x°(c)`, and what that subsidy costs.

use super::check_bistable_start;
use crate::closed_form::{that, unsubsidized_trajectory};
use crate::error::{Error, Result};
use crate::model::{interior_equilibrium, ModelParams};
use crate::quadrature::adaptive_simpson;
use crate::scalar::Scalar;
use crate::trajectory::{Phase, PiecewiseTrajectory};

/// Absolute tolerance of the cost quadrature in the crossing regime.
pub const COST_QUADRATURE_TOL: f64 = 1e-9;

/// Level thresholds splitting `[0, c]` into the cost regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsidyBounds<T> {
    /// `c - u_max - e·y0`: at or below it `y0` sits under the lower band edge.
    pub decay_end: T,
    /// `ŝ`: levels at or below it never reach the knee.
    pub minimum: T,
    /// `c - u_min - e·x°(c)`: above it the knee lies above the band.
    pub direct_end: T,
    /// `c - u_min - e·y0`: from here on `y0` is above the band.
    pub crossing_end: T,
    pub full: T,
}

impl<T: Scalar> SubsidyBounds<T> {
    pub fn new(params: &ModelParams<T>, y0: T) -> Result<Self> {
        let knee = check_bistable_start(params, y0)?;
        let (c, e) = (params.cost, params.externality);
        Ok(Self {
            decay_end: c - params.u_max - e * y0,
            minimum: min_subsidy_unchecked(params, y0),
            direct_end: c - params.u_min - e * knee,
            crossing_end: c - params.u_min - e * y0,
            full: c,
        })
    }

    /// The five intervals `I1..I5`, clamped to `[0, c]`.
    pub fn intervals(&self) -> [(T, T); 5] {
        let clamp = |v: T| T::min_of(T::max_of(v, T::zero()), self.full);
        let a = clamp(self.decay_end);
        let b = clamp(self.minimum);
        let d = clamp(T::max_of(self.minimum, self.direct_end));
        let f = clamp(self.crossing_end);
        [(T::zero(), a), (a, b), (b, d), (d, f), (f, self.full)]
    }

    /// The interior thresholds, in increasing order.
    pub fn thresholds(&self) -> [T; 4] {
        [
            self.decay_end,
            self.minimum,
            self.direct_end,
            self.crossing_end,
        ]
    }
}

/// Which closed form the subsidized path follows up to the knee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinDurationRegime {
    /// Stays in the band and reaches the knee there.
    Direct,
    /// Leaves the band through its upper edge first.
    Crossing,
    /// Starts above the band and saturates.
    Saturated,
}

/// Cost regime of a subsidy level, infeasible levels included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostRow {
    /// `y0` below the band: the path decays from the start.
    Decay,
    /// In the band but below the subsidized knee: falls out of the band.
    Stall,
    Direct,
    Crossing,
    Saturated,
}

impl CostRow {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Decay => "decay",
            Self::Stall => "stall",
            Self::Direct => "direct",
            Self::Crossing => "crossing",
            Self::Saturated => "saturated",
        }
    }

    pub fn feasible(self) -> bool {
        !matches!(self, Self::Decay | Self::Stall)
    }
}

impl From<MinDurationRegime> for CostRow {
    fn from(r: MinDurationRegime) -> Self {
        match r {
            MinDurationRegime::Direct => Self::Direct,
            MinDurationRegime::Crossing => Self::Crossing,
            MinDurationRegime::Saturated => Self::Saturated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostMethod {
    ClosedForm,
    Quadrature,
}

impl CostMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed-form",
            Self::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate<T> {
    pub value: T,
    pub method: CostMethod,
    /// Zero for closed forms.
    pub error_bound: T,
}

/// The subsidized phase of a minimum-duration plan.
#[derive(Debug, Clone, PartialEq)]
pub struct MinDurationPlan<T> {
    pub level: T,
    pub regime: MinDurationRegime,
    pub duration: T,
    /// Time the path leaves the band upward, in the crossing regime.
    pub band_exit: Option<T>,
    pub trajectory: PiecewiseTrajectory<T>,
}

fn finite<T: Scalar>(v: T) -> Option<T> {
    v.is_finite().then_some(v)
}

fn min_subsidy_unchecked<T: Scalar>(params: &ModelParams<T>, y0: T) -> T {
    // (e - Δ)(x°(c) - y0), expanded so that it stays defined when e = Δ
    (params.cost - params.u_max) - (params.externality - params.spread()) * y0
}

/// `ŝ = (e - (u_max - u_min))·(x°(c) - y0)`. Only levels strictly above it
/// reach the knee in finite time.
pub fn min_subsidy<T: Scalar>(params: &ModelParams<T>, y0: T) -> Result<T> {
    check_bistable_start(params, y0)?;
    Ok(min_subsidy_unchecked(params, y0))
}

fn check_level<T: Scalar>(params: &ModelParams<T>, level: T) -> Result<()> {
    if !(T::zero() <= level && level <= params.cost) {
        return Err(Error::InvalidInput(format!(
            "subsidy level must lie in [0, c] = [0, {}], got {level}",
            params.cost
        )));
    }
    Ok(())
}

/// Cost regime of level `s`.
pub fn cost_row<T: Scalar>(params: &ModelParams<T>, y0: T, level: T) -> Result<CostRow> {
    let knee = check_bistable_start(params, y0)?;
    check_level(params, level)?;
    Ok(row_unchecked(params, y0, knee, level))
}

fn row_unchecked<T: Scalar>(params: &ModelParams<T>, y0: T, knee: T, level: T) -> CostRow {
    let eff = params.cost - level;
    let e = params.externality;
    if level <= min_subsidy_unchecked(params, y0) {
        if y0 * e <= eff - params.u_max {
            CostRow::Decay
        } else {
            CostRow::Stall
        }
    } else {
        let top = (eff - params.u_min) / e;
        if knee <= top {
            CostRow::Direct
        } else if y0 < top {
            CostRow::Crossing
        } else {
            CostRow::Saturated
        }
    }
}

struct Durations<T> {
    regime: MinDurationRegime,
    band_exit: Option<T>,
    total: Option<T>,
}

fn durations_in<T: Scalar>(
    params: &ModelParams<T>,
    y0: T,
    knee: T,
    level: T,
    row: CostRow,
) -> Option<Durations<T>> {
    let eff = params.cost - level;
    let gamma = params.gamma;
    let to_knee_from_above = |from: T| finite(((T::one() - from) / (T::one() - knee)).ln() / gamma);
    Some(match row {
        CostRow::Decay | CostRow::Stall => return None,
        CostRow::Direct => Durations {
            regime: MinDurationRegime::Direct,
            band_exit: None,
            total: that(knee, T::zero(), y0, eff, params),
        },
        CostRow::Crossing => {
            let top = (eff - params.u_min) / params.externality;
            let exit = that(top, T::zero(), y0, eff, params);
            Durations {
                regime: MinDurationRegime::Crossing,
                band_exit: exit,
                total: exit.and_then(|t| to_knee_from_above(top).map(|rest| t + rest)),
            }
        }
        CostRow::Saturated => Durations {
            regime: MinDurationRegime::Saturated,
            band_exit: None,
            total: to_knee_from_above(y0),
        },
    })
}

fn durations<T: Scalar>(params: &ModelParams<T>, y0: T, knee: T, level: T) -> Option<Durations<T>> {
    durations_in(
        params,
        y0,
        knee,
        level,
        row_unchecked(params, y0, knee, level),
    )
}

/// `T̂(s)`. `Ok(None)` means the knee is never reached: either `s <= ŝ`, or
/// the knee sits at full adoption and is only approached asymptotically.
pub fn min_duration<T: Scalar>(params: &ModelParams<T>, y0: T, level: T) -> Result<Option<T>> {
    let knee = check_bistable_start(params, y0)?;
    check_level(params, level)?;
    Ok(durations(params, y0, knee, level).and_then(|d| d.total))
}

/// Regime, duration and subsidized path of the minimum-duration plan.
pub fn min_duration_trajectory<T: Scalar>(
    params: &ModelParams<T>,
    y0: T,
    level: T,
) -> Result<MinDurationPlan<T>> {
    let knee = check_bistable_start(params, y0)?;
    check_level(params, level)?;
    let infeasible = || Error::InfeasibleSubsidy {
        level: level.as_f64(),
        minimum: min_subsidy_unchecked(params, y0).as_f64(),
    };
    let d = durations(params, y0, knee, level).ok_or_else(infeasible)?;
    let duration = d.total.ok_or_else(|| {
        Error::Singular(format!(
            "the knee x°(c) = {knee} is only reached asymptotically"
        ))
    })?;
    let trajectory = unsubsidized_trajectory(&params.at_cost(params.cost - level), T::zero(), y0)?
        .with_phase(Phase::Subsidized);
    Ok(MinDurationPlan {
        level,
        regime: d.regime,
        duration,
        band_exit: d.band_exit,
        trajectory,
    })
}

/// `S(s, T̂(s))`, or for `s <= ŝ` the cost of subsidizing forever,
/// `s·∫_0^∞ y(t) dt`. `Ok(None)` when that is unbounded.
pub fn min_duration_cost<T: Scalar>(
    params: &ModelParams<T>,
    y0: T,
    level: T,
) -> Result<Option<CostEstimate<T>>> {
    let knee = check_bistable_start(params, y0)?;
    check_level(params, level)?;
    cost_in(
        params,
        y0,
        knee,
        level,
        row_unchecked(params, y0, knee, level),
    )
}

/// The cost formula of `row` evaluated at `level`, whichever row the level
/// belongs to. Used to compare neighbouring formulas at shared boundaries.
/// `Ok(None)` when the formula has no finite value there.
pub fn min_duration_cost_as<T: Scalar>(
    params: &ModelParams<T>,
    y0: T,
    level: T,
    row: CostRow,
) -> Result<Option<CostEstimate<T>>> {
    let knee = check_bistable_start(params, y0)?;
    check_level(params, level)?;
    cost_in(params, y0, knee, level, row)
}

/// Gap between the two neighbouring cost formulas at one interval boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryGap<T> {
    pub level: T,
    pub left: CostRow,
    pub right: CostRow,
    /// `None` when either side has no finite value.
    pub gap: Option<T>,
}

/// Compares the neighbouring cost formulas at every interior boundary that
/// lies inside `(0, c)` and away from `ŝ`, where the cost is unbounded.
pub fn boundary_gaps<T: Scalar>(params: &ModelParams<T>, y0: T) -> Result<Vec<BoundaryGap<T>>> {
    let b = SubsidyBounds::new(params, y0)?;
    let inside = |v: T| T::zero() < v && v < params.cost;
    let mut pairs = Vec::new();
    if inside(b.decay_end) && b.decay_end < b.minimum {
        pairs.push((b.decay_end, CostRow::Decay, CostRow::Stall));
    }
    if inside(b.direct_end) && b.minimum < b.direct_end {
        pairs.push((b.direct_end, CostRow::Direct, CostRow::Crossing));
    }
    if inside(b.crossing_end) {
        pairs.push((b.crossing_end, CostRow::Crossing, CostRow::Saturated));
    }
    pairs
        .into_iter()
        .map(|(level, left, right)| {
            let l = min_duration_cost_as(params, y0, level, left)?;
            let r = min_duration_cost_as(params, y0, level, right)?;
            let gap = l.zip(r).map(|(l, r)| (l.value - r.value).abs());
            Ok(BoundaryGap {
                level,
                left,
                right,
                gap,
            })
        })
        .collect()
}

fn cost_in<T: Scalar>(
    params: &ModelParams<T>,
    y0: T,
    knee: T,
    s: T,
    row: CostRow,
) -> Result<Option<CostEstimate<T>>> {
    let gamma = params.gamma;
    let eff = params.cost - s;
    let e = params.externality;
    let a = (e - params.spread()) / params.spread();
    let closed = |v: T| {
        finite(v).map(|value| CostEstimate {
            value,
            method: CostMethod::ClosedForm,
            error_bound: T::zero(),
        })
    };

    Ok(match row {
        CostRow::Decay => closed(s * y0 / gamma),
        CostRow::Stall => {
            let low = (eff - params.u_max) / e;
            let k = interior_equilibrium(eff, params)?;
            if !(k > y0) {
                return Ok(None);
            }
            closed(s / gamma * ((k * ((k - low) / (k - y0)).ln() - (y0 - low)) / a + low))
        }
        CostRow::Direct => {
            let k = interior_equilibrium(eff, params)?;
            if !(y0 > k) {
                return Ok(None);
            }
            closed(s / gamma * (k * ((knee - k) / (y0 - k)).ln() + knee - y0) / a)
        }
        CostRow::Saturated => {
            closed(s / gamma * (((T::one() - y0) / (T::one() - knee)).ln() - (knee - y0)))
        }
        CostRow::Crossing => {
            let Some(d) = durations_in(params, y0, knee, s, row) else {
                return Ok(None);
            };
            let (Some(exit), Some(total)) = (d.band_exit, d.total) else {
                return Ok(None);
            };
            let path = unsubsidized_trajectory(&params.at_cost(eff), T::zero(), y0)?;
            let y = |t: T| path.eval(t).expect("quadrature nodes lie after the start");
            let tol = T::lit(COST_QUADRATURE_TOL / 2.0) / T::max_of(s, T::one());
            let first = adaptive_simpson(y, T::zero(), exit, tol);
            let second = adaptive_simpson(y, exit, total, tol);
            Some(CostEstimate {
                value: s * (first.value + second.value),
                method: CostMethod::Quadrature,
                error_bound: s * (first.error + second.error),
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{integrate_cost, integrate_ode};
    use crate::subsidy::ConstantLevelSubsidy;

    fn ex4() -> ModelParams<f64> {
        ModelParams::new(1.0, 2.0, 2.5, 3.0, 1.0).unwrap()
    }

    // (s, T̂, S) computed independently from the regime formulas
    const FROM_ZERO: [(f64, f64, f64); 6] = [
        (0.6, 0.8958797346138196, 0.048123607961563404),
        (0.75, 0.5493061443364683, 0.04225254896914567),
        (1.0, 0.36077332753582303, 0.04150731267863375),
        (1.2, 0.30797877093482284, 0.046009838214689965),
        (1.5, 0.2876820724517815, 0.056523108677674704),
        (2.0, 0.2876820724517815, 0.07536414490356627),
    ];
    const FROM_EIGHTH: [(f64, f64, f64); 6] = [
        (0.3, 0.8958797346133739, 0.045626392038391965),
        (0.5, 0.3465735902798509, 0.03124999999999089),
        (0.75, 0.2027325540462522, 0.027868823055966496),
        (1.0, 0.15804077348742598, 0.029690451207112892),
        (1.125, 0.15415067982723427, 0.032794514805660875),
        (2.0, 0.15415067982723427, 0.05830135965450822),
    ];

    #[test]
    fn example_four_bounds() {
        let b = SubsidyBounds::new(&ex4(), 0.0).unwrap();
        assert_eq!(b.minimum, 0.5);
        assert_eq!(b.decay_end, 0.5);
        assert_eq!(b.direct_end, 0.75);
        assert_eq!(b.crossing_end, 1.5);
        let b = SubsidyBounds::new(&ex4(), 0.125).unwrap();
        assert_eq!(b.decay_end, 0.125);
        assert_eq!(b.minimum, 0.25);
        assert_eq!(b.direct_end, 0.75);
        assert_eq!(b.crossing_end, 1.125);
        assert_eq!(min_subsidy(&ex4(), 0.0).unwrap() / 3.0, 1.0 / 6.0);
    }

    #[test]
    fn example_four_durations_and_costs() {
        for (y0, table) in [(0.0, FROM_ZERO), (0.125, FROM_EIGHTH)] {
            for (s, t, c) in table {
                let got = min_duration(&ex4(), y0, s).unwrap().unwrap();
                assert!((got - t).abs() < 1e-10, "y0 = {y0}, s = {s}: {got}");
                let cost = min_duration_cost(&ex4(), y0, s).unwrap().unwrap();
                assert!(
                    (cost.value - c).abs() < 1e-9,
                    "y0 = {y0}, s = {s}: {}",
                    cost.value
                );
                assert!(cost.error_bound <= 1e-9);
            }
        }
    }

    #[test]
    fn saturated_duration_is_constant() {
        let expected = (4.0f64 / 3.0).ln();
        for s in [1.5, 1.8, 2.2, 2.5] {
            assert!((min_duration(&ex4(), 0.0, s).unwrap().unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_levels() {
        assert_eq!(min_duration(&ex4(), 0.0, 0.5).unwrap(), None);
        assert_eq!(min_duration(&ex4(), 0.0, 0.2).unwrap(), None);
        assert!(matches!(
            min_duration_trajectory(&ex4(), 0.0, 0.4),
            Err(Error::InfeasibleSubsidy { .. })
        ));
        assert!(matches!(
            min_duration(&ex4(), 0.0, 3.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn rows_follow_the_thresholds() {
        let row = |y0, s| cost_row(&ex4(), y0, s).unwrap();
        assert_eq!(row(0.125, 0.1), CostRow::Decay);
        assert_eq!(row(0.125, 0.2), CostRow::Stall);
        assert_eq!(row(0.125, 0.5), CostRow::Direct);
        assert_eq!(row(0.125, 1.0), CostRow::Crossing);
        assert_eq!(row(0.125, 1.5), CostRow::Saturated);
        assert_eq!(row(0.0, 0.3), CostRow::Decay);
    }

    #[test]
    fn decay_and_stall_costs_match_long_integration() {
        for (y0, s) in [(0.125, 0.1), (0.125, 0.2), (0.0, 0.4)] {
            let p = ex4();
            let closed = min_duration_cost(&p, y0, s).unwrap().unwrap().value;
            let cls = ConstantLevelSubsidy::new(s, 80.0, 0.0).unwrap();
            let sampled = integrate_ode(&p, &p.affinity(), &cls, 0.0, y0, 80.0, 1e-3).unwrap();
            assert!(
                (closed - integrate_cost(&sampled, &cls)).abs() < 1e-6,
                "y0 = {y0}, s = {s}"
            );
        }
    }

    #[test]
    fn stall_cost_diverges_toward_the_minimum() {
        let p = ex4();
        let near = |s| min_duration_cost(&p, 0.125, s).unwrap().unwrap().value;
        assert!(near(0.2499) > near(0.24));
        assert!(near(0.249999) > near(0.2499));
        assert_eq!(min_duration_cost(&p, 0.125, 0.25).unwrap(), None);
        let above = |s| min_duration_cost(&p, 0.125, s).unwrap().unwrap().value;
        assert!(above(0.250001) > above(0.2501));
    }

    #[test]
    fn neighbouring_formulas_agree_at_boundaries() {
        let p = ex4();
        let at = |y0, s, row| min_duration_cost_as(&p, y0, s, row).unwrap().unwrap().value;
        for (y0, pairs) in [
            (
                0.125,
                vec![
                    (0.125, CostRow::Decay, CostRow::Stall),
                    (0.75, CostRow::Direct, CostRow::Crossing),
                    (1.125, CostRow::Crossing, CostRow::Saturated),
                ],
            ),
            (
                0.0,
                vec![
                    (0.75, CostRow::Direct, CostRow::Crossing),
                    (1.5, CostRow::Crossing, CostRow::Saturated),
                ],
            ),
        ] {
            for (s, left, right) in pairs {
                assert!(
                    (at(y0, s, left) - at(y0, s, right)).abs() < 1e-9,
                    "y0 = {y0}, s = {s}"
                );
            }
        }
    }

    #[test]
    fn boundary_gaps_are_small() {
        let gaps = boundary_gaps(&ex4(), 0.125).unwrap();
        assert_eq!(gaps.len(), 3);
        assert!(gaps.iter().all(|g| g.gap.unwrap() < 1e-9));
        // y0 = 0: the decay boundary coincides with ŝ and is skipped
        assert_eq!(boundary_gaps(&ex4(), 0.0).unwrap().len(), 2);
    }

    #[test]
    fn plan_reaches_the_knee() {
        let p = ex4();
        for s in [0.6, 1.0, 1.5, 2.0] {
            let plan = min_duration_trajectory(&p, 0.0, s).unwrap();
            let end = plan.trajectory.eval(plan.duration).unwrap();
            assert!((end - 0.25).abs() < 1e-9, "s = {s}: {end}");
        }
        assert_eq!(
            min_duration_trajectory(&p, 0.0, 1.0).unwrap().regime,
            MinDurationRegime::Crossing
        );
    }

    #[test]
    fn knee_at_full_adoption_is_asymptotic() {
        let p = ModelParams::new(1.0, 2.0, 4.0, 3.0, 1.0).unwrap();
        assert_eq!(min_duration(&p, 0.0, 3.0).unwrap(), None);
        assert!(matches!(
            min_duration_trajectory(&p, 0.0, 3.0),
            Err(Error::Singular(_))
        ));
    }
}
