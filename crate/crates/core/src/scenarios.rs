//! Data behind the four worked examples: parameter sets, trajectories,
//! thresholds and sweeps, as plain tables.

use crate::closed_form::unsubsidized_trajectory;
use crate::error::{Error, Result};
use crate::model::{classify_equilibria, Uniform};
use crate::subsidy::{
    default_grid, full_subsidy_analysis, noext_cls_trajectory, noext_cost_at_target,
    noext_cost_decreasing_condition, noext_required_duration, sweep, ConstantLevelSubsidy,
    SubsidyBounds, SweepReport, DEFAULT_GRID_POINTS,
};
use crate::{Exact, ExactParams, Params};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// An unbounded duration or cost.
    Inf,
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Inf, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, e.g. `example3_thresholds`.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column values by name.
    pub fn column(&self, name: &str) -> Option<impl Iterator<Item = &Cell> + '_> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(move |r| &r[idx]))
    }
}

/// Output step for sampled trajectories, in units of `1/gamma`.
const SAMPLE_STEP: f64 = 0.01;

fn ratio(n: i64, d: i64) -> Exact {
    Exact::new(n, d)
}

fn exact_to_f64(v: Exact) -> f64 {
    *v.numer() as f64 / *v.denom() as f64
}

/// No externality. Top: `Uni[0, 1]`, `c = s = 1/2`, `T ∈ {0, 1, 2, ∞}`.
/// Bottom: `Uni[1, 6]`, `c = 3`, target `1/2`, swept over `s`.
pub fn example1() -> Result<Vec<Table>> {
    let (gamma, y0) = (1.0, 0.0);
    let top = Uniform::new(0.0, 1.0)?;
    let t_end = 6.0;
    let mut paths = Table::new("example1_trajectories", &["T", "t", "x", "phase"]);
    for duration in [Some(0.0), Some(1.0), Some(2.0), None] {
        // an unending subsidy only has to outlast the plotted window
        let cls = ConstantLevelSubsidy::new(0.5, duration.unwrap_or(t_end), 0.0)?;
        let path = noext_cls_trajectory(&top, 0.5, gamma, &cls, y0)?;
        for s in path.sample(t_end, SAMPLE_STEP)? {
            paths.push(vec![
                duration.into(),
                s.t.into(),
                s.x.into(),
                s.phase.as_str().into(),
            ]);
        }
    }

    let bottom = Uniform::new(1.0, 6.0)?;
    let (c, target) = (3.0, 0.5);
    let mut costs = Table::new(
        "example1_duration_cost",
        &["s", "T", "S", "cost_decreasing_condition"],
    );
    for i in 0..=400 {
        let s = -1.0 + 4.0 * i as f64 / 400.0;
        costs.push(vec![
            s.into(),
            noext_required_duration(&bottom, c, gamma, s, y0, target).into(),
            noext_cost_at_target(&bottom, c, gamma, s, y0, target).into(),
            noext_cost_decreasing_condition(&bottom, c, s).into(),
        ]);
    }

    let mut summary = Table::new("example1_summary", &["quantity", "value"]);
    let (lo, hi) = (bottom.lo(), bottom.hi());
    // finite iff s > (c - u_max) + (u_max - u_min)·y
    summary.push(vec![
        "finite_above".into(),
        ((c - hi) + (hi - lo) * target).into(),
    ]);
    summary.push(vec!["depends_from".into(), (c - hi).into()]);
    summary.push(vec!["depends_to".into(), (c - lo).into()]);
    Ok(vec![paths, costs, summary])
}

/// Parameter rows of the equilibrium example, as exact rationals.
pub fn example2_params() -> [ExactParams; 4] {
    let one = ratio(1, 1);
    let two = ratio(2, 1);
    let p = |c: Exact, e: Exact| {
        ExactParams::new(one, two, c, e, one).expect("valid example parameters")
    };
    [
        p(ratio(5, 1), ratio(2, 1)),
        p(ratio(7, 4), ratio(1, 2)),
        p(ratio(5, 2), ratio(2, 1)),
        p(ratio(1, 1), ratio(1, 2)),
    ]
}

pub const EXAMPLE2_STARTS: [f64; 4] = [0.1, 1.0 / 3.0, 2.0 / 3.0, 0.9];

fn to_float(p: &ExactParams) -> Params {
    Params::new(
        exact_to_f64(p.u_min),
        exact_to_f64(p.u_max),
        exact_to_f64(p.cost),
        exact_to_f64(p.externality),
        exact_to_f64(p.gamma),
    )
    .expect("valid example parameters")
}

/// Equilibrium classification for four cost/externality pairs, with paths
/// from four starting levels each (`gamma = 1`).
pub fn example2() -> Result<Vec<Table>> {
    let mut table = Table::new(
        "example2_table",
        &[
            "row",
            "u_min",
            "u_max",
            "c",
            "e",
            "case",
            "x_knee",
            "upper_edge",
            "lower_edge",
            "equilibria",
        ],
    );
    let mut paths = Table::new("example2_trajectories", &["row", "x0", "t", "x"]);
    for (i, p) in example2_params().iter().enumerate() {
        let report = classify_equilibria(p)?;
        let listed: Vec<String> = report
            .equilibria
            .iter()
            .map(|eq| format!("{}:{}", exact_to_f64(eq.level), eq.stability.as_str()))
            .collect();
        let f = exact_to_f64;
        table.push(vec![
            Cell::Int(i as i64 + 1),
            f(p.u_min).into(),
            f(p.u_max).into(),
            f(p.cost).into(),
            f(p.externality).into(),
            Cell::Int(report.case_id().into()),
            report.interior.map(f).into(),
            report.band_high.map(f).into(),
            report.band_low.map(f).into(),
            Cell::Text(listed.join(";")),
        ]);
        let fp = to_float(p);
        for x0 in EXAMPLE2_STARTS {
            let path = unsubsidized_trajectory(&fp, 0.0, x0)?;
            for s in path.sample(8.0, 0.02)? {
                paths.push(vec![
                    Cell::Int(i as i64 + 1),
                    x0.into(),
                    s.t.into(),
                    s.x.into(),
                ]);
            }
        }
    }
    Ok(vec![table, paths])
}

pub fn example3_params() -> Params {
    Params::new(1.0, 2.0, 3.0, 3.0, 1.0 / 3.0).expect("valid example parameters")
}

pub const EXAMPLE3_START: f64 = 0.25;

/// The seven full-subsidy durations, spaced around the thresholds.
pub fn example3_durations() -> Result<[f64; 7]> {
    let th = full_subsidy_analysis(&example3_params(), EXAMPLE3_START, 0.0)?.thresholds;
    let (low, knee, high) = (
        th.band_low,
        th.knee.expect("knee below full adoption"),
        th.band_high.expect("upper edge below full adoption"),
    );
    Ok([
        0.0,
        low / 2.0,
        (low + knee) / 2.0,
        0.95 * knee,
        1.05 * knee,
        (knee + high) / 2.0,
        (3.0 * high - knee) / 2.0,
    ])
}

/// Full subsidy from `y0 = 1/4`: thresholds, seven durations and paths.
pub fn example3() -> Result<Vec<Table>> {
    let p = example3_params();
    let y0 = EXAMPLE3_START;
    let base = full_subsidy_analysis(&p, y0, 0.0)?;
    let mut thresholds = Table::new("example3_thresholds", &["threshold", "level", "duration"]);
    let th = base.thresholds;
    thresholds.push(vec![
        "band_low".into(),
        p.band_low().into(),
        th.band_low.into(),
    ]);
    thresholds.push(vec!["knee".into(), p.knee()?.into(), th.knee.into()]);
    thresholds.push(vec![
        "band_high".into(),
        p.band_high().into(),
        th.band_high.into(),
    ]);

    let mut durations = Table::new(
        "example3_durations",
        &[
            "index",
            "T",
            "interval",
            "released_at",
            "final_equilibrium",
            "cost",
        ],
    );
    let mut paths = Table::new("example3_trajectories", &["index", "T", "t", "x", "phase"]);
    for (i, d) in example3_durations()?.into_iter().enumerate() {
        let r = full_subsidy_analysis(&p, y0, d)?;
        let idx = Cell::Int(i as i64 + 1);
        durations.push(vec![
            idx.clone(),
            d.into(),
            r.interval.as_str().into(),
            r.released_at.into(),
            r.final_equilibrium.into(),
            r.cost.into(),
        ]);
        for s in r.trajectory.sample(15.0, SAMPLE_STEP / p.gamma)? {
            paths.push(vec![
                idx.clone(),
                d.into(),
                s.t.into(),
                s.x.into(),
                s.phase.as_str().into(),
            ]);
        }
    }
    Ok(vec![thresholds, durations, paths])
}

pub fn example4_params() -> Params {
    Params::new(1.0, 2.0, 2.5, 3.0, 1.0).expect("valid example parameters")
}

pub const EXAMPLE4_STARTS: [f64; 2] = [0.0, 0.125];

pub fn example4_sweep(y0: f64) -> Result<SweepReport<f64>> {
    let p = example4_params();
    sweep(&p, y0, &default_grid(&p, y0, DEFAULT_GRID_POINTS)?)
}

/// Minimum-duration subsidies from `y0 ∈ {0, 1/8}`: bounds, sweep and
/// frontier.
pub fn example4() -> Result<Vec<Table>> {
    let p = example4_params();
    let e = p.externality;
    let mut summary = Table::new(
        "example4_summary",
        &[
            "y0",
            "s_min",
            "s_min_over_e",
            "decay_end_over_e",
            "direct_end_over_e",
            "crossing_end_over_e",
            "c_over_e",
            "cost_turn",
            "sign_pattern",
        ],
    );
    let mut rows = Table::new(
        "example4_sweep",
        &[
            "y0", "s", "s_over_e", "feasible", "T_hat", "S", "regime", "method", "frontier",
        ],
    );
    for y0 in EXAMPLE4_STARTS {
        let b = SubsidyBounds::new(&p, y0)?;
        let report = example4_sweep(y0)?;
        let pattern: Vec<&str> = report
            .sign_pattern
            .trends
            .iter()
            .map(|t| t.label())
            .collect();
        summary.push(vec![
            y0.into(),
            b.minimum.into(),
            (b.minimum / e).into(),
            (b.decay_end / e).into(),
            (b.direct_end / e).into(),
            (b.crossing_end / e).into(),
            (b.full / e).into(),
            report.sign_pattern.turn().into(),
            Cell::Text(pattern.join(";")),
        ]);
        for r in &report.rows {
            rows.push(vec![
                y0.into(),
                r.level.into(),
                r.level_over_e.into(),
                r.feasible().into(),
                r.duration.into(),
                r.cost.map(|c| c.value).into(),
                r.row.as_str().into(),
                r.cost.map_or("none", |c| c.method.as_str()).into(),
                r.frontier.into(),
            ]);
        }
    }
    Ok(vec![summary, rows])
}

pub fn reproduce(example: u32) -> Result<Vec<Table>> {
    match example {
        1 => example1(),
        2 => example2(),
        3 => example3(),
        4 => example4(),
        other => Err(Error::InvalidInput(format!(
            "unknown example {other}; expected 1 to 4"
        ))),
    }
}
