//! Closed forms checked against the numerical oracle for one scenario.

use crate::error::{Error, Result};
use crate::model::{classify_equilibria, ModelParams, Uniform};
use crate::oracle::{
    brute_force_equilibria, integrate_cost, integrate_ode, DEFAULT_HORIZON, MAX_SCALED_STEP,
};
use crate::scalar::Scalar;
use crate::subsidy::{
    boundary_gaps, check_bistable_start, default_grid, full_subsidy_analysis, min_duration,
    min_duration_cost, noext_subsidy_cost, subsidized_trajectory, sweep, ConstantLevelSubsidy,
    DEFAULT_GRID_POINTS,
};

pub const TRAJECTORY_TOL: f64 = 1e-6;
pub const COST_TOL: f64 = 1e-5;
pub const MONOTONE_TOL: f64 = 1e-9;
pub const CONTINUITY_TOL: f64 = 1e-6;
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

const BRUTE_FORCE_GRID: usize = 2000;

/// The subsidy applied from `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plan<T> {
    None,
    Constant {
        level: T,
        duration: T,
    },
    Full {
        duration: T,
    },
    /// Level `s` held for `T̂(s)`.
    MinDuration {
        level: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup<T> {
    pub params: ModelParams<T>,
    pub t0: T,
    pub x0: T,
    pub plan: Plan<T>,
    pub t_end: T,
    pub dt: T,
    pub grid_points: usize,
}

impl<T: Scalar> Setup<T> {
    pub fn new(params: ModelParams<T>, x0: T, plan: Plan<T>) -> Self {
        let gamma = params.gamma;
        Self {
            params,
            t0: T::zero(),
            x0,
            plan,
            t_end: T::lit(DEFAULT_HORIZON) / gamma,
            dt: T::lit(1e-3) / gamma,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, tolerance: f64, note: impl Into<String>) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
            note: note.into(),
        }
    }

    fn verdict(name: &'static str, passed: bool, note: impl Into<String>) -> Self {
        let measured = if passed { 0.0 } else { 1.0 };
        Self {
            name,
            measured,
            tolerance: 0.0,
            passed,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn resolve<T: Scalar>(setup: &Setup<T>) -> Result<ConstantLevelSubsidy<T>> {
    let p = &setup.params;
    let window = setup.t_end - setup.t0;
    let (level, duration) = match setup.plan {
        Plan::None => (T::zero(), T::zero()),
        Plan::Constant { level, duration } => (level, duration),
        Plan::Full { duration } => (p.cost, duration),
        Plan::MinDuration { level } => (level, min_duration(p, setup.x0, level)?.unwrap_or(window)),
    };
    let cls = ConstantLevelSubsidy::new(level, duration, setup.t0)?;
    cls.check_cost(p.cost)?;
    Ok(cls)
}

/// Closed-form cost of the resolved plan and how it was obtained.
fn analytic_cost<T: Scalar>(
    setup: &Setup<T>,
    cls: &ConstantLevelSubsidy<T>,
) -> Result<Option<(T, &'static str)>> {
    let p = &setup.params;
    let y0 = setup.x0;
    let bistable = check_bistable_start(p, y0).is_ok();
    Ok(match setup.plan {
        Plan::None => None,
        Plan::Full { duration } if bistable => Some((
            full_subsidy_analysis(p, y0, duration)?.cost,
            "full-subsidy formula",
        )),
        Plan::MinDuration { level } => {
            if min_duration(p, y0, level)?.is_none() {
                return Ok(None);
            }
            min_duration_cost(p, y0, level)?.map(|c| (c.value, c.method.as_str()))
        }
        Plan::Constant { .. } if !p.has_externality() => {
            let dist = Uniform::new(p.u_min, p.u_max)?;
            Some((
                noext_subsidy_cost(&dist, p.cost, p.gamma, cls, y0),
                "no-externality formula",
            ))
        }
        _ => {
            let path = subsidized_trajectory(p, cls, y0)?;
            let q = path.integral(cls.start, cls.end(), T::lit(1e-11))?;
            Some((cls.level * q.value, "quadrature of the closed-form path"))
        }
    })
}

/// Runs every applicable oracle comparison. Assumption violations of the
/// plan itself are returned as errors; tolerance breaches are failed checks.
pub fn validate<T: Scalar>(setup: &Setup<T>) -> Result<ValidationReport> {
    let p = &setup.params;
    p.validate()?;
    if !(setup.t_end > setup.t0) {
        return Err(Error::InvalidInput(format!(
            "t_end = {} must exceed t0 = {}",
            setup.t_end, setup.t0
        )));
    }
    let cls = resolve(setup)?;
    let mut report = ValidationReport::default();

    let scaled = (setup.dt * p.gamma).as_f64();
    report.checks.push(Check::at_most(
        "step",
        scaled,
        MAX_SCALED_STEP,
        "gamma * dt",
    ));
    if scaled <= MAX_SCALED_STEP {
        let end = T::max_of(setup.t_end, cls.end());
        let sampled = integrate_ode(p, &p.affinity(), &cls, setup.t0, setup.x0, end, setup.dt)?;
        let path = subsidized_trajectory(p, &cls, setup.x0)?;
        // a minimum-duration plan releases the path exactly at the unstable
        // knee, after which any rounding decides the outcome
        let (horizon, note) = match setup.plan {
            Plan::MinDuration { .. } => (cls.end(), "max |closed form - RK4| over the subsidy"),
            _ => (end, "max |closed form - RK4|"),
        };
        let mut worst = 0.0f64;
        for (t, x) in sampled.iter().take_while(|&(t, _)| t <= horizon) {
            worst = worst.max((path.eval(t)? - x).abs().as_f64());
        }
        report
            .checks
            .push(Check::at_most("trajectory", worst, TRAJECTORY_TOL, note));
        if let Some((value, how)) = analytic_cost(setup, &cls)? {
            let numeric = integrate_cost(&sampled, &cls);
            report.checks.push(Check::at_most(
                "cost",
                (value - numeric).abs().as_f64(),
                COST_TOL,
                format!("|{how} - Simpson on RK4|"),
            ));
        }
    } else {
        report.checks.push(Check::verdict(
            "trajectory",
            false,
            format!("not run: gamma * dt exceeds {MAX_SCALED_STEP}"),
        ));
    }

    match classify_equilibria(p) {
        Ok(classified) => {
            let brute = brute_force_equilibria(p, BRUTE_FORCE_GRID)?;
            let same_len = brute.len() == classified.equilibria.len();
            let mut worst = if same_len { 0.0f64 } else { f64::INFINITY };
            let mut stability_ok = same_len;
            for (a, b) in brute.iter().zip(&classified.equilibria) {
                worst = worst.max((a.level - b.level).abs().as_f64());
                stability_ok &= a.stability == b.stability;
            }
            report.checks.push(Check::at_most(
                "equilibria",
                if stability_ok { worst } else { f64::INFINITY },
                EQUILIBRIUM_TOL,
                "brute-force scan vs classification",
            ));
        }
        Err(Error::Singular(_)) => {}
        Err(e) => return Err(e),
    }

    if check_bistable_start(p, setup.x0).is_ok() {
        let grid = default_grid(p, setup.x0, setup.grid_points)?;
        let swept = sweep(p, setup.x0, &grid)?;
        let durations: Vec<T> = swept.rows.iter().filter_map(|r| r.duration).collect();
        let rise = durations
            .windows(2)
            .map(|w| (w[1] - w[0]).as_f64())
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        report.checks.push(Check::at_most(
            "duration-monotone",
            rise,
            MONOTONE_TOL,
            "largest increase of the minimum duration along the grid",
        ));
        let labels: Vec<&str> = swept
            .sign_pattern
            .trends
            .iter()
            .map(|t| t.label())
            .collect();
        report.checks.push(Check::verdict(
            "cost-sign-pattern",
            swept.sign_pattern.matches_expected(),
            labels.join(","),
        ));
        let gap = boundary_gaps(p, setup.x0)?
            .iter()
            .map(|g| g.gap.map_or(f64::INFINITY, |v| v.as_f64()))
            .fold(0.0, f64::max);
        report.checks.push(Check::at_most(
            "cost-continuity",
            gap,
            CONTINUITY_TOL,
            "largest jump between neighbouring cost formulas",
        ));
    }
    Ok(report)
}
