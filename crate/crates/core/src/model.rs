//! Market parameters, the affinity distribution, the would-adopt map and
//! equilibrium classification.
//!
//! A user with affinity `U` perceives net utility `U + e·x - c` when the
//! adoption level is `x`. The fraction of the population that would adopt is
//! `h(x) = P(U > c - e·x)`, and the adoption level relaxes toward it at rate
//! `gamma`. With uniform affinities `h` is piecewise linear: zero below the
//! band `[(c - u_max)/e, (c - u_min)/e]`, one above it and linear inside.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance on `|h(x) - x|` for equilibria the library constructs itself.
pub const CONSTRUCTED_EQ_TOL: f64 = 1e-12;
/// Tolerance on `|h(x) - x|` for user-supplied equilibrium levels.
pub const SUPPLIED_EQ_TOL: f64 = 1e-9;

/// Continuous affinity distribution.
pub trait AffinityDistribution<T: Real> {
    /// `P(U > u)`.
    fn ccdf(&self, u: T) -> T;
    /// Density of `U` at `u`.
    fn density(&self, u: T) -> T;
}

/// Affinities uniform on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform<T> {
    lo: T,
    hi: T,
}

impl<T: Real> Uniform<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidParams(format!(
                "uniform support requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

impl<T: Real> AffinityDistribution<T> for Uniform<T> {
    fn ccdf(&self, u: T) -> T {
        ((self.hi - u) / self.width()).clamp_unit()
    }

    fn density(&self, u: T) -> T {
        if u < self.lo || u > self.hi {
            T::zero()
        } else {
            T::one() / self.width()
        }
    }
}

/// Market parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub u_min: T,
    pub u_max: T,
    pub cost: T,
    pub externality: T,
    pub gamma: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(u_min: T, u_max: T, cost: T, externality: T, gamma: T) -> Result<Self> {
        let p = Self {
            u_min,
            u_max,
            cost,
            externality,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("u_min", self.u_min),
            ("u_max", self.u_max),
            ("cost", self.cost),
            ("externality", self.externality),
            ("gamma", self.gamma),
        ] {
            if !v.as_f64().is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if !(self.u_min < self.u_max) {
            return Err(Error::InvalidParams(format!(
                "u_min < u_max is required, got u_min = {}, u_max = {}",
                self.u_min, self.u_max
            )));
        }
        if self.externality < T::zero() {
            return Err(Error::InvalidParams(format!(
                "externality must be >= 0, got {}",
                self.externality
            )));
        }
        if self.gamma <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if self.cost < T::zero() {
            return Err(Error::InvalidParams(format!(
                "cost must be >= 0, got {}",
                self.cost
            )));
        }
        Ok(())
    }

    /// Same market with a different (effective) cost. The cost is not
    /// validated, so `c - s` for any subsidy `s` is accepted.
    pub fn at_cost(&self, cost: T) -> Self {
        Self { cost, ..*self }
    }

    pub fn affinity(&self) -> Uniform<T> {
        Uniform {
            lo: self.u_min,
            hi: self.u_max,
        }
    }

    /// `u_max - u_min`.
    pub fn spread(&self) -> T {
        self.u_max - self.u_min
    }

    pub fn has_externality(&self) -> bool {
        self.externality > T::zero()
    }

    /// Lower band edge `(c' - u_max)/e`, below which nobody would adopt.
    pub fn band_low_at(&self, cost: T) -> Option<T> {
        self.has_externality()
            .then(|| (cost - self.u_max) / self.externality)
    }

    /// Upper band edge `(c' - u_min)/e`, above which everybody would adopt.
    pub fn band_high_at(&self, cost: T) -> Option<T> {
        self.has_externality()
            .then(|| (cost - self.u_min) / self.externality)
    }

    pub fn band_low(&self) -> Option<T> {
        self.band_low_at(self.cost)
    }

    pub fn band_high(&self) -> Option<T> {
        self.band_high_at(self.cost)
    }

    /// The would-adopt fraction `h(x) = P(V(x) > 0)`.
    pub fn would_adopt(&self, x: T) -> T {
        would_adopt(x, self)
    }

    /// `x°(c')`, see [`interior_equilibrium`].
    pub fn knee(&self) -> Result<T> {
        interior_equilibrium(self.cost, self)
    }
}

/// `h(x) = P(U + e·x - c > 0)` for uniform affinities. Defined on all of ℝ.
pub fn would_adopt<T: Real>(x: T, params: &ModelParams<T>) -> T {
    params.affinity().ccdf(params.cost - params.externality * x)
}

/// `x°(c') = (u_max - c') / (u_max - (u_min + e))`, unclamped.
pub fn interior_equilibrium<T: Real>(effective_cost: T, params: &ModelParams<T>) -> Result<T> {
    let denom = params.u_max - (params.u_min + params.externality);
    if denom.is_zero() {
        return Err(Error::Singular(format!(
            "interior equilibrium undefined: u_max = u_min + e = {}",
            params.u_max
        )));
    }
    Ok((params.u_max - effective_cost) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        }
    }
}

/// The four equilibrium regimes of the uniform-affinity model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumCase {
    /// `max{u_max, u_min + e} <= c`: only `{0}`.
    NoAdoption,
    /// `u_min + e <= c <= u_max`: only the interior `{x°}`.
    Interior,
    /// `u_max <= c <= u_min + e`: `{0, x°, 1}` with `x°` unstable.
    Bistable,
    /// `c <= min{u_max, u_min + e}`: only `{1}`.
    FullAdoption,
}

impl EquilibriumCase {
    pub fn id(self) -> u8 {
        match self {
            EquilibriumCase::NoAdoption => 1,
            EquilibriumCase::Interior => 2,
            EquilibriumCase::Bistable => 3,
            EquilibriumCase::FullAdoption => 4,
        }
    }

    /// First matching row in the order 1 to 4 (rows share their boundaries).
    pub fn of<T: Real>(params: &ModelParams<T>) -> Self {
        let c = params.cost;
        let upper = params.u_max;
        let lower_plus_e = params.u_min + params.externality;
        if upper.max_of(lower_plus_e) <= c {
            EquilibriumCase::NoAdoption
        } else if lower_plus_e <= c && c <= upper {
            EquilibriumCase::Interior
        } else if upper <= c && c <= lower_plus_e {
            EquilibriumCase::Bistable
        } else {
            EquilibriumCase::FullAdoption
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium<T> {
    pub level: T,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<T> {
    pub case: EquilibriumCase,
    /// Ascending by level.
    pub equilibria: Vec<Equilibrium<T>>,
    /// `x°(c)` when defined, possibly outside `[0, 1]`.
    pub interior: Option<T>,
    pub band_low: Option<T>,
    pub band_high: Option<T>,
}

impl<T: Real> EquilibriumReport<T> {
    pub fn case_id(&self) -> u8 {
        self.case.id()
    }

    pub fn stable_levels(&self) -> impl Iterator<Item = T> + '_ {
        self.equilibria
            .iter()
            .filter(|eq| eq.stability == Stability::Stable)
            .map(|eq| eq.level)
    }
}

/// Equilibria of the unsubsidized dynamics and their stability.
pub fn classify_equilibria<T: Real>(params: &ModelParams<T>) -> Result<EquilibriumReport<T>> {
    params.validate()?;
    let interior = interior_equilibrium(params.cost, params).ok();
    if interior.is_none() && params.cost == params.u_max {
        // h(x) = x on the whole band: a continuum of equilibria.
        return Err(Error::Singular(format!(
            "c = u_max = u_min + e = {}: every level in [0, 1] is an equilibrium",
            params.cost
        )));
    }
    let case = EquilibriumCase::of(params);
    let knee = || {
        interior.ok_or_else(|| {
            Error::Singular("interior equilibrium required but u_max = u_min + e".into())
        })
    };
    let mut levels = match case {
        EquilibriumCase::NoAdoption => vec![T::zero()],
        EquilibriumCase::Interior => vec![knee()?],
        EquilibriumCase::Bistable => vec![T::zero(), knee()?, T::one()],
        EquilibriumCase::FullAdoption => vec![T::one()],
    };
    levels.dedup();

    let tol = T::lit(CONSTRUCTED_EQ_TOL);
    let equilibria = levels
        .into_iter()
        .map(|level| {
            Ok(Equilibrium {
                level,
                stability: stability_with_tolerance(level, params, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EquilibriumReport {
        case,
        equilibria,
        interior,
        band_low: params.band_low(),
        band_high: params.band_high(),
    })
}

/// Stability of an equilibrium from the one-sided slopes of `h`.
///
/// Stable iff every one-sided slope of `h` at `x_bar` pointing into `[0, 1]`
/// is below one.
pub fn stability_of<T: Real>(x_bar: T, params: &ModelParams<T>) -> Result<Stability> {
    stability_with_tolerance(x_bar, params, T::lit(SUPPLIED_EQ_TOL))
}

fn stability_with_tolerance<T: Real>(
    x_bar: T,
    params: &ModelParams<T>,
    tol: T,
) -> Result<Stability> {
    let residual = (would_adopt(x_bar, params) - x_bar).abs();
    if residual > tol {
        return Err(Error::NotAnEquilibrium {
            level: x_bar.as_f64(),
            residual: residual.as_f64(),
        });
    }
    let (left, right) = one_sided_slopes(x_bar, params);
    let mut sides = Vec::with_capacity(2);
    if x_bar > T::zero() {
        sides.push(left);
    }
    if x_bar < T::one() {
        sides.push(right);
    }
    if sides.iter().all(|slope| *slope < T::one()) {
        Ok(Stability::Stable)
    } else {
        Ok(Stability::Unstable)
    }
}

/// Left and right derivatives of `h` at `x`.
pub fn one_sided_slopes<T: Real>(x: T, params: &ModelParams<T>) -> (T, T) {
    let (Some(lo), Some(hi)) = (params.band_low(), params.band_high()) else {
        return (T::zero(), T::zero());
    };
    let inner = params.externality / params.spread();
    let left = if x > lo && x <= hi { inner } else { T::zero() };
    let right = if x >= lo && x < hi { inner } else { T::zero() };
    (left, right)
}
