//! Flat `key = value` scenario files.

use std::collections::BTreeMap;
use std::path::PathBuf;

use adoption_core::oracle::DEFAULT_HORIZON;
use adoption_core::validation::{Plan, Setup};
use adoption_core::Params;

use crate::CliError;

const KEYS: &[&str] = &[
    "u_min",
    "u_max",
    "cost",
    "externality",
    "gamma",
    "t0",
    "x0",
    "subsidy",
    "level",
    "duration",
    "t_end",
    "dt",
    "step",
    "grid_points",
    "target",
    "s_from",
    "s_to",
    "output",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsidyKind {
    None,
    Cls,
    Full,
    MinDuration,
}

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Invalid(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    i + 1
                ))
            })?;
            let key = key.trim();
            if raw.values.contains_key(key) {
                return Err(CliError::Invalid(format!(
                    "line {}: `{key}` given twice",
                    i + 1
                )));
            }
            raw.insert(key, value.trim())?;
        }
        Ok(raw)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            CliError::Invalid(format!("--set expects key=value, got `{assignment}`"))
        })?;
        self.insert(key.trim(), value.trim())
    }

    fn insert(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::Invalid(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_owned(), value.to_owned());
        Ok(())
    }

    fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.values
            .get(key)
            .map(|v| parse_number(key, v))
            .transpose()
    }

    fn required(&self, key: &str) -> Result<f64, CliError> {
        self.number(key)?
            .ok_or_else(|| CliError::Invalid(format!("missing required key `{key}`")))
    }
}

/// A decimal or a fraction `p/q`.
fn parse_number(key: &str, text: &str) -> Result<f64, CliError> {
    let bad = || CliError::Invalid(format!("`{key}`: cannot read `{text}` as a number"));
    let v = match text.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => text.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub params: Params,
    pub t0: f64,
    pub x0: f64,
    pub subsidy: SubsidyKind,
    pub level: Option<f64>,
    pub duration: Option<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub step: f64,
    pub grid_points: usize,
    pub target: Option<f64>,
    pub s_from: f64,
    pub s_to: f64,
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let params = Params::new(
            raw.required("u_min")?,
            raw.required("u_max")?,
            raw.required("cost")?,
            raw.required("externality")?,
            raw.required("gamma")?,
        )?;
        let gamma = params.gamma;
        let t0 = raw.number("t0")?.unwrap_or(0.0);
        let x0 = raw.number("x0")?.unwrap_or(0.0);
        if !(0.0..=1.0).contains(&x0) {
            return Err(CliError::Invalid(format!(
                "x0 must lie in [0, 1], got {x0}"
            )));
        }
        let subsidy = match raw.values.get("subsidy").map(String::as_str) {
            None | Some("none") => SubsidyKind::None,
            Some("cls") => SubsidyKind::Cls,
            Some("full") => SubsidyKind::Full,
            Some("min_duration") => SubsidyKind::MinDuration,
            Some(other) => {
                return Err(CliError::Invalid(format!(
                    "subsidy must be none, cls, full or min_duration, got `{other}`"
                )))
            }
        };
        let level = raw.number("level")?;
        let duration = raw.number("duration")?;
        let missing = |key: &str| {
            CliError::Invalid(format!("subsidy = {} needs `{key}`", raw.values["subsidy"]))
        };
        match subsidy {
            SubsidyKind::None => {}
            SubsidyKind::Cls => {
                level.ok_or_else(|| missing("level"))?;
                duration.ok_or_else(|| missing("duration"))?;
            }
            SubsidyKind::Full => {
                duration.ok_or_else(|| missing("duration"))?;
            }
            SubsidyKind::MinDuration => {
                level.ok_or_else(|| missing("level"))?;
            }
        }
        let t_end = raw.number("t_end")?.unwrap_or(t0 + DEFAULT_HORIZON / gamma);
        if t_end <= t0 {
            return Err(CliError::Invalid(format!(
                "t_end = {t_end} must exceed t0 = {t0}"
            )));
        }
        let positive = |key: &str, default: f64| -> Result<f64, CliError> {
            let v = raw.number(key)?.unwrap_or(default);
            if v > 0.0 {
                Ok(v)
            } else {
                Err(CliError::Invalid(format!("`{key}` must be > 0, got {v}")))
            }
        };
        let dt = positive("dt", 1e-3 / gamma)?;
        let step = positive("step", 1e-2 / gamma)?;
        let grid_points = match raw.values.get("grid_points") {
            None => adoption_core::subsidy::DEFAULT_GRID_POINTS,
            Some(v) => v.parse::<usize>().ok().filter(|&n| n >= 2).ok_or_else(|| {
                CliError::Invalid(format!("grid_points must be an integer >= 2, got `{v}`"))
            })?,
        };
        Ok(Self {
            params,
            t0,
            x0,
            subsidy,
            level,
            duration,
            t_end,
            dt,
            step,
            grid_points,
            target: raw.number("target")?,
            s_from: raw.number("s_from")?.unwrap_or(0.0),
            s_to: raw.number("s_to")?.unwrap_or(params.cost),
            output: raw.values.get("output").map(PathBuf::from),
        })
    }

    pub fn plan(&self) -> Plan<f64> {
        match self.subsidy {
            SubsidyKind::None => Plan::None,
            SubsidyKind::Cls => Plan::Constant {
                level: self.level.expect("checked"),
                duration: self.duration.expect("checked"),
            },
            SubsidyKind::Full => Plan::Full {
                duration: self.duration.expect("checked"),
            },
            SubsidyKind::MinDuration => Plan::MinDuration {
                level: self.level.expect("checked"),
            },
        }
    }

    pub fn setup(&self) -> Setup<f64> {
        Setup {
            t0: self.t0,
            t_end: self.t_end,
            dt: self.dt,
            grid_points: self.grid_points,
            ..Setup::new(self.params, self.x0, self.plan())
        }
    }
}
