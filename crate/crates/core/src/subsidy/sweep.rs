//! Level sweeps of the minimum-duration plan: the cost/duration table, its
//! Pareto frontier and the monotonicity of the cost on each regime interval.

use std::cmp::Ordering;

use super::min_duration::{
    cost_row, min_duration, min_duration_cost, CostEstimate, CostRow, SubsidyBounds,
};
use crate::error::Result;
use crate::model::ModelParams;
use crate::scalar::Scalar;

pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub level: T,
    pub level_over_e: T,
    pub row: CostRow,
    pub duration: Option<T>,
    pub cost: Option<CostEstimate<T>>,
    pub frontier: bool,
}

impl<T: Scalar> SweepRow<T> {
    pub fn feasible(&self) -> bool {
        self.row.feasible()
    }
}

/// Indices into the sweep rows.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParetoFrontier {
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trend<T> {
    /// Fewer than two finite costs in the interval.
    Empty,
    Flat,
    Increasing,
    Decreasing,
    /// One sign change, from falling to rising, with the grid minimizer.
    DecreasingThenIncreasing {
        turn: T,
    },
    Mixed,
}

impl<T> Trend<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Empty => "empty",
            Self::Flat => "flat",
            Self::Increasing => "increasing",
            Self::Decreasing => "decreasing",
            Self::DecreasingThenIncreasing { .. } => "decreasing-then-increasing",
            Self::Mixed => "mixed",
        }
    }
}

/// Trend of the swept cost on each of `I1..I5`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPattern<T> {
    pub intervals: [(T, T); 5],
    pub trends: [Trend<T>; 5],
}

impl<T: Scalar> SignPattern<T> {
    /// Grid minimizer `s̃` of the cost on `I4`, if the cost turns there.
    pub fn turn(&self) -> Option<T> {
        match self.trends[3] {
            Trend::DecreasingThenIncreasing { turn } => Some(turn),
            _ => None,
        }
    }

    /// Rising on `I1` (flat when `y0 = 0`) and `I2`, falling on `I3`, one
    /// turn on `I4`, rising on `I5`. Empty intervals are skipped.
    pub fn matches_expected(&self) -> bool {
        use Trend::*;
        let ok = [
            matches!(self.trends[0], Empty | Flat | Increasing),
            matches!(self.trends[1], Empty | Increasing),
            matches!(self.trends[2], Empty | Decreasing),
            matches!(self.trends[3], Empty | DecreasingThenIncreasing { .. }),
            matches!(self.trends[4], Empty | Increasing),
        ];
        ok.iter().all(|&b| b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport<T> {
    pub bounds: SubsidyBounds<T>,
    pub rows: Vec<SweepRow<T>>,
    pub frontier: ParetoFrontier,
    pub sign_pattern: SignPattern<T>,
}

/// `n` evenly spaced levels on `[0, c]` plus the regime thresholds inside
/// it, sorted and deduplicated.
pub fn default_grid<T: Scalar>(params: &ModelParams<T>, y0: T, n: usize) -> Result<Vec<T>> {
    let bounds = SubsidyBounds::new(params, y0)?;
    let c = params.cost;
    let steps = n.max(2) - 1;
    let mut grid: Vec<T> = (0..=steps)
        .map(|i| c * T::lit(i as f64) / T::lit(steps as f64))
        .collect();
    grid.extend(
        bounds
            .thresholds()
            .into_iter()
            .filter(|&v| T::zero() < v && v < c),
    );
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    grid.dedup();
    Ok(grid)
}

/// Evaluates `T̂(s)` and `S(s)` on `grid`.
pub fn sweep<T: Scalar>(params: &ModelParams<T>, y0: T, grid: &[T]) -> Result<SweepReport<T>> {
    let bounds = SubsidyBounds::new(params, y0)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &s in grid {
        rows.push(SweepRow {
            level: s,
            level_over_e: s / params.externality,
            row: cost_row(params, y0, s)?,
            duration: min_duration(params, y0, s)?,
            cost: min_duration_cost(params, y0, s)?,
            frontier: false,
        });
    }
    let frontier = pareto(&rows);
    for &i in &frontier.members {
        rows[i].frontier = true;
    }
    let intervals = bounds.intervals();
    // I1 and I2 hold the infeasible levels, I3..I5 the feasible ones
    let mut k = 0;
    let trends = intervals.map(|(lo, hi)| {
        k += 1;
        trend(&rows, lo, hi, k > 2)
    });
    Ok(SweepReport {
        bounds,
        rows,
        frontier,
        sign_pattern: SignPattern { intervals, trends },
    })
}

/// Feasible rows not dominated in `(T̂, S)`.
fn pareto<T: Scalar>(rows: &[SweepRow<T>]) -> ParetoFrontier {
    let mut order: Vec<(usize, T, T)> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.feasible())
        .filter_map(|(i, r)| Some((i, r.duration?, r.cost?.value)))
        .collect();
    let key = |x: &(usize, T, T)| (x.1, x.2, rows[x.0].level);
    order.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.partial_cmp(&kb.0)
            .unwrap_or(Ordering::Equal)
            .then(ka.1.partial_cmp(&kb.1).unwrap_or(Ordering::Equal))
            .then(ka.2.partial_cmp(&kb.2).unwrap_or(Ordering::Equal))
    });
    let mut best: Option<T> = None;
    let mut members = Vec::new();
    for (i, _, cost) in order {
        if best.is_none_or(|b| cost < b) {
            best = Some(cost);
            members.push(i);
        }
    }
    members.sort_unstable();
    ParetoFrontier { members }
}

fn trend<T: Scalar>(rows: &[SweepRow<T>], lo: T, hi: T, feasible: bool) -> Trend<T> {
    let pts: Vec<(T, T)> = rows
        .iter()
        .filter(|r| lo <= r.level && r.level <= hi && r.feasible() == feasible)
        .filter_map(|r| Some((r.level, r.cost?.value)))
        .collect();
    if pts.len() < 2 {
        return Trend::Empty;
    }
    let signs: Vec<i8> = pts
        .windows(2)
        .map(|w| {
            let d = w[1].1 - w[0].1;
            let scale = T::max_of(w[0].1.abs(), w[1].1.abs());
            if d.abs() <= T::lit(1e-15) * scale {
                0
            } else if d > T::zero() {
                1
            } else {
                -1
            }
        })
        .collect();
    if signs.iter().all(|&s| s == 0) {
        return Trend::Flat;
    }
    if signs.iter().all(|&s| s > 0) {
        return Trend::Increasing;
    }
    if signs.iter().all(|&s| s < 0) {
        return Trend::Decreasing;
    }
    let first_up = signs.iter().position(|&s| s > 0).unwrap_or(signs.len());
    if signs[..first_up].iter().all(|&s| s < 0) && signs[first_up..].iter().all(|&s| s > 0) {
        return Trend::DecreasingThenIncreasing {
            turn: pts[first_up].0,
        };
    }
    Trend::Mixed
}
