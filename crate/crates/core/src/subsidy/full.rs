//! Full subsidy (`s = c`): adoption is free while it lasts.

use super::{check_bistable_start, subsidized_trajectory, ConstantLevelSubsidy};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Scalar;
use crate::trajectory::PiecewiseTrajectory;

/// Durations at which the fully subsidized path, rising as
/// `1 - (1 - y0)·exp(-gamma·t)`, crosses the band edges and the knee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSubsidyThresholds<T> {
    /// `T̄_M`, the crossing of the lower band edge. Negative when `y0`
    /// already lies inside the band.
    pub band_low: T,
    /// `T̄_°`, the crossing of `x°(c)`; `None` when `x°(c) = 1`.
    pub knee: Option<T>,
    /// `T̄_m`, the crossing of the upper band edge; `None` when it equals 1.
    pub band_high: Option<T>,
}

/// Where the subsidy ends relative to the thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FullSubsidyInterval {
    /// `T < T̄_M`: released below the band, decays to 0.
    BelowBand,
    /// `T̄_M <= T < T̄_°`: released in the band below the knee, falls to 0.
    BandBelowKnee,
    /// `T = T̄_°`: released exactly at the knee.
    Knee,
    /// `T̄_° < T < T̄_m`: released in the band above the knee, rises to 1.
    BandAboveKnee,
    /// `T >= T̄_m`: released above the band, saturates to 1.
    AboveBand,
}

impl FullSubsidyInterval {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BelowBand => "below-band",
            Self::BandBelowKnee => "band-below-knee",
            Self::Knee => "knee",
            Self::BandAboveKnee => "band-above-knee",
            Self::AboveBand => "above-band",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullSubsidyReport<T> {
    pub thresholds: FullSubsidyThresholds<T>,
    pub duration: T,
    pub interval: FullSubsidyInterval,
    pub trajectory: PiecewiseTrajectory<T>,
    /// Level at the end of the subsidy.
    pub released_at: T,
    pub final_equilibrium: T,
    /// `S(T) = c·(T - (1/gamma)·(1 - y0)·(1 - exp(-gamma·T)))`.
    pub cost: T,
}

fn crossing<T: Scalar>(gamma: T, y0: T, level: T) -> Option<T> {
    // 1 - (1 - y0) e^{-γt} = level
    let t = ((T::one() - y0) / (T::one() - level)).ln() / gamma;
    t.is_finite().then_some(t)
}

/// Thresholds, path and cost of a full subsidy held for `duration` from 0.
pub fn full_subsidy_analysis<T: Scalar>(
    params: &ModelParams<T>,
    y0: T,
    duration: T,
) -> Result<FullSubsidyReport<T>> {
    let knee = check_bistable_start(params, y0)?;
    let lo = params
        .band_low()
        .expect("bistable regime has an externality");
    let hi = params
        .band_high()
        .expect("bistable regime has an externality");
    let gamma = params.gamma;
    let thresholds = FullSubsidyThresholds {
        band_low: crossing(gamma, y0, lo).ok_or_else(|| {
            Error::Singular("lower band edge coincides with full adoption".into())
        })?,
        knee: crossing(gamma, y0, knee),
        band_high: crossing(gamma, y0, hi),
    };
    let cls = ConstantLevelSubsidy::new(params.cost, duration, T::zero())?;
    let trajectory = subsidized_trajectory(params, &cls, y0)?;
    let released_at = (T::one() - (T::one() - y0) * (-gamma * duration).exp()).clamp_unit();

    let interval = if duration < thresholds.band_low {
        FullSubsidyInterval::BelowBand
    } else {
        match (thresholds.knee, thresholds.band_high) {
            (Some(k), _) if duration < k => FullSubsidyInterval::BandBelowKnee,
            (Some(k), _) if duration == k => FullSubsidyInterval::Knee,
            (_, Some(m)) if duration < m => FullSubsidyInterval::BandAboveKnee,
            (_, Some(_)) => FullSubsidyInterval::AboveBand,
            (None, None) => FullSubsidyInterval::BandBelowKnee,
            (Some(_), None) => FullSubsidyInterval::BandAboveKnee,
        }
    };
    let final_equilibrium = match interval {
        FullSubsidyInterval::BelowBand | FullSubsidyInterval::BandBelowKnee => T::zero(),
        FullSubsidyInterval::Knee => knee,
        FullSubsidyInterval::BandAboveKnee | FullSubsidyInterval::AboveBand => T::one(),
    };
    let cost = params.cost * (duration + (T::one() - y0) * (-gamma * duration).exp_m1() / gamma);
    Ok(FullSubsidyReport {
        thresholds,
        duration,
        interval,
        trajectory,
        released_at,
        final_equilibrium,
        cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex3() -> ModelParams<f64> {
        ModelParams::new(1.0, 2.0, 3.0, 3.0, 1.0 / 3.0).unwrap()
    }

    const T_BAND_LOW: f64 = 0.35334910696915034;
    const T_KNEE: f64 = 1.2163953243244932;
    const T_BAND_HIGH: f64 = 2.4327906486489863;

    #[test]
    fn example_three_thresholds() {
        let r = full_subsidy_analysis(&ex3(), 0.25, 1.0).unwrap();
        assert!((r.thresholds.band_low - T_BAND_LOW).abs() < 1e-14);
        assert!((r.thresholds.knee.unwrap() - T_KNEE).abs() < 1e-14);
        assert!((r.thresholds.band_high.unwrap() - T_BAND_HIGH).abs() < 1e-14);
    }

    /// The released path written out per interval, as a second derivation.
    fn piecewise_oracle(t: f64, duration: f64) -> f64 {
        let (g, y0) = (1.0 / 3.0, 0.25);
        let released = 1.0 - (1.0 - y0) * (-g * duration).exp();
        if t <= duration {
            return 1.0 - (1.0 - y0) * (-g * t).exp();
        }
        let dt = t - duration;
        let (lo, knee, hi) = (1.0 / 3.0, 0.5, 2.0 / 3.0);
        if released <= lo {
            released * (-g * dt).exp()
        } else if released < knee {
            // in-band: x' = γ(2x - 1), leaves at the lower edge
            let exit = ((knee - lo) / (knee - released)).ln() / (2.0 * g);
            if dt <= exit {
                knee + (released - knee) * (2.0 * g * dt).exp()
            } else {
                lo * (-g * (dt - exit)).exp()
            }
        } else if released < hi {
            let exit = ((hi - knee) / (released - knee)).ln() / (2.0 * g);
            if dt <= exit {
                knee + (released - knee) * (2.0 * g * dt).exp()
            } else {
                1.0 - (1.0 - hi) * (-g * (dt - exit)).exp()
            }
        } else {
            1.0 - (1.0 - released) * (-g * dt).exp()
        }
    }

    #[test]
    fn trajectories_match_the_interval_formulas() {
        for duration in [0.2, 0.9, 1.5, 3.0] {
            let r = full_subsidy_analysis(&ex3(), 0.25, duration).unwrap();
            for i in 0..300 {
                let t = i as f64 * 0.05;
                let got = r.trajectory.eval(t).unwrap();
                assert!(
                    (got - piecewise_oracle(t, duration)).abs() < 1e-12,
                    "T = {duration}, t = {t}"
                );
            }
        }
    }

    #[test]
    fn seven_durations_of_example_three() {
        let durations = [
            0.0,
            T_BAND_LOW / 2.0,
            (T_BAND_LOW + T_KNEE) / 2.0,
            0.95 * T_KNEE,
            1.05 * T_KNEE,
            (T_KNEE + T_BAND_HIGH) / 2.0,
            (3.0 * T_BAND_HIGH - T_KNEE) / 2.0,
        ];
        let expected = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        for (d, want) in durations.into_iter().zip(expected) {
            let r = full_subsidy_analysis(&ex3(), 0.25, d).unwrap();
            assert_eq!(r.final_equilibrium, want, "T = {d}");
            assert_eq!(r.trajectory.limit(), Some(want), "T = {d}");
        }
        assert!((durations[6] - 3.040988310811233).abs() < 1e-12);
    }

    #[test]
    fn cost_at_knee_threshold() {
        let r = full_subsidy_analysis(&ex3(), 0.25, T_KNEE).unwrap();
        assert!((r.cost - 1.3991859729734792).abs() < 1e-13);
        assert!((r.released_at - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_outside_bistable_regime() {
        let p = ModelParams::new(1.0, 2.0, 3.0, 1.5, 1.0).unwrap();
        assert!(matches!(
            full_subsidy_analysis(&p, 0.0, 1.0),
            Err(Error::Assumption(_))
        ));
        assert!(matches!(
            full_subsidy_analysis(&ex3(), 0.5, 1.0),
            Err(Error::Assumption(_))
        ));
    }
}
