//! Numerical ground truth for the closed forms: fixed-step RK4 on the
//! adoption ODE, Simpson quadrature of the subsidy cost, a grid scan for
//! equilibria, central differences and first-passage times.
//!
//! Nothing here calls into the closed-form modules; the only shared pieces
//! are the parameter types and the affinity distribution.

use crate::error::{Error, Result};
use crate::model::{AffinityDistribution, Equilibrium, ModelParams, Stability};
use crate::scalar::Scalar;

/// Largest accepted `gamma·dt`.
pub const MAX_SCALED_STEP: f64 = 1e-2;
/// Default `gamma·dt`.
pub const DEFAULT_SCALED_STEP: f64 = 1e-3;
/// Default horizon in units of `1/gamma`.
pub const DEFAULT_HORIZON: f64 = 60.0;

/// A subsidy `s(t, x)` applied to the cost. Breakpoints are the times where
/// `s` may jump; the integrator restarts there.
pub trait SubsidySchedule<T> {
    fn level(&self, t: T, x: T) -> T;

    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

/// `s ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSubsidy;

impl<T: Scalar> SubsidySchedule<T> for NoSubsidy {
    fn level(&self, _t: T, _x: T) -> T {
        T::zero()
    }
}

/// Uniform-step RK4 samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory<T> {
    pub start: T,
    pub step: T,
    pub levels: Vec<T>,
    /// States at schedule breakpoints that fall strictly inside the span.
    pub knots: Vec<(T, T)>,
}

impl<T: Scalar> SampledTrajectory<T> {
    pub fn time(&self, i: usize) -> T {
        self.start + self.step * T::from_usize(i).expect("index fits")
    }

    pub fn end(&self) -> T {
        self.time(self.levels.len() - 1)
    }

    pub fn final_level(&self) -> T {
        *self.levels.last().expect("non-empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, &x)| (self.time(i), x))
    }
}

/// Evaluates `s` at `t` as seen from inside `[a, b]`, so that a jump at an
/// endpoint takes the value of the piece being integrated.
fn level_inside<T: Scalar, S: SubsidySchedule<T> + ?Sized>(s: &S, t: T, x: T, a: T, b: T) -> T {
    let nudge = T::epsilon() * T::lit(8.0) * T::one().max(a.abs()).max(b.abs());
    let lo = (a + nudge).min((a + b) / T::lit(2.0));
    let hi = (b - nudge).max((a + b) / T::lit(2.0));
    s.level(t.max(lo).min(hi), x)
}

fn rhs<T: Scalar, D, S>(dist: &D, p: &ModelParams<T>, s: &S, t: T, x: T, a: T, b: T) -> T
where
    D: AffinityDistribution<T>,
    S: SubsidySchedule<T> + ?Sized,
{
    let subsidy = level_inside(s, t, x, a, b);
    p.gamma * (dist.ccdf(p.cost - subsidy - p.externality * x) - x)
}

fn rk4_step<T: Scalar, D, S>(dist: &D, p: &ModelParams<T>, s: &S, t: T, x: T, h: T) -> T
where
    D: AffinityDistribution<T>,
    S: SubsidySchedule<T> + ?Sized,
{
    let two = T::lit(2.0);
    let (a, b) = (t, t + h);
    let k1 = rhs(dist, p, s, t, x, a, b);
    let k2 = rhs(dist, p, s, t + h / two, x + h * k1 / two, a, b);
    let k3 = rhs(dist, p, s, t + h / two, x + h * k2 / two, a, b);
    let k4 = rhs(dist, p, s, t + h, x + h * k3, a, b);
    x + h * (k1 + two * k2 + two * k3 + k4) / T::lit(6.0)
}

/// Classic RK4 on `x' = gamma·(P(U > c - s(t, x) - e·x) - x)` with a fixed
/// step, restarting at schedule breakpoints.
pub fn integrate_ode<T, D, S>(
    params: &ModelParams<T>,
    dist: &D,
    schedule: &S,
    t0: T,
    x0: T,
    t_end: T,
    dt: T,
) -> Result<SampledTrajectory<T>>
where
    T: Scalar,
    D: AffinityDistribution<T>,
    S: SubsidySchedule<T> + ?Sized,
{
    if !(dt > T::zero()) || dt * params.gamma > T::lit(MAX_SCALED_STEP) * (T::one() + T::lit(1e-9))
    {
        return Err(Error::InvalidStep(format!(
            "need 0 < gamma·dt <= {MAX_SCALED_STEP}, got gamma·dt = {}",
            (dt * params.gamma).as_f64()
        )));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidInput(format!(
            "t_end ({t_end}) must exceed t0 ({t0})"
        )));
    }
    let n = ((t_end - t0) / dt - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let mut breaks: Vec<T> = schedule
        .breakpoints()
        .into_iter()
        .filter(|&b| b > t0)
        .collect();
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));

    let mut levels = Vec::with_capacity(n + 1);
    let mut knots = Vec::new();
    levels.push(x0);
    let mut x = x0;
    let mut next_break = breaks.iter().copied().peekable();
    for i in 0..n {
        let mut t = t0 + dt * T::from_usize(i).expect("index fits");
        let t_next = t0 + dt * T::from_usize(i + 1).expect("index fits");
        while let Some(&b) = next_break.peek() {
            if b >= t_next {
                break;
            }
            next_break.next();
            if b > t {
                x = rk4_step(dist, params, schedule, t, x, b - t);
                knots.push((b, x));
                t = b;
            }
        }
        x = rk4_step(dist, params, schedule, t, x, t_next - t);
        levels.push(x);
    }
    // breakpoints landing exactly on grid points
    let sampled = SampledTrajectory {
        start: t0,
        step: dt,
        levels,
        knots,
    };
    let mut knots = sampled.knots.clone();
    for b in breaks {
        let k = ((b - t0) / dt).round();
        let on_grid =
            (t0 + k * dt - b).abs() <= T::epsilon() * T::lit(16.0) * T::one().max(b.abs());
        if on_grid && b < sampled.end() && !knots.iter().any(|(t, _)| *t == b) {
            let idx = k.to_usize().expect("grid index");
            knots.push((b, sampled.levels[idx]));
        }
    }
    knots.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    Ok(SampledTrajectory { knots, ..sampled })
}

/// `∫ s(t, x(t))·x(t) dt` over the sampled span, split at the schedule's
/// breakpoints. Composite Simpson on the uniform interior, quadratic
/// interpolation on the partial steps next to a breakpoint.
pub fn integrate_cost<T, S>(sampled: &SampledTrajectory<T>, schedule: &S) -> T
where
    T: Scalar,
    S: SubsidySchedule<T> + ?Sized,
{
    let start = sampled.start;
    let end = sampled.end();
    let mut cuts = vec![start];
    cuts.extend(
        sampled
            .knots
            .iter()
            .map(|k| k.0)
            .filter(|&t| t > start && t < end),
    );
    cuts.push(end);

    let mut total = T::zero();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut nodes: Vec<(T, T)> = Vec::new();
        let at = |t: T| -> T {
            if let Some(&(_, x)) = sampled.knots.iter().find(|k| k.0 == t) {
                return x;
            }
            let i = ((t - start) / sampled.step)
                .round()
                .to_usize()
                .expect("grid index");
            sampled.levels[i]
        };
        nodes.push((a, at(a)));
        let first = ((a - start) / sampled.step).floor().to_usize().unwrap_or(0) + 1;
        let mut i = first;
        while i < sampled.levels.len() {
            let t = sampled.time(i);
            if t >= b {
                break;
            }
            if t > a {
                nodes.push((t, sampled.levels[i]));
            }
            i += 1;
        }
        nodes.push((b, at(b)));
        let g: Vec<(T, T)> = nodes
            .iter()
            .map(|&(t, x)| (t, level_inside(schedule, t, x, a, b) * x))
            .collect();
        total = total + integrate_nodes(&g, sampled.step);
    }
    total
}

/// Integrates tabulated `(t, g)` whose interior nodes are uniformly spaced by
/// `step`; the first and last gaps may be shorter.
fn integrate_nodes<T: Scalar>(g: &[(T, T)], step: T) -> T {
    let n = g.len();
    match n {
        0 | 1 => return T::zero(),
        2 => return (g[1].0 - g[0].0) * (g[0].1 + g[1].1) / T::lit(2.0),
        _ => {}
    }
    let tol = step * T::lit(1e-6);
    let lead_short = (g[1].0 - g[0].0 - step).abs() > tol;
    let tail_short = (g[n - 1].0 - g[n - 2].0 - step).abs() > tol;
    let lo = usize::from(lead_short);
    let hi = if tail_short { n - 2 } else { n - 1 };
    let mut total = T::zero();
    if lead_short {
        let k = 3.min(n);
        total = total + quadratic_piece(&g[0..k], g[0].0, g[1].0);
    }
    if tail_short && n - 2 >= lo {
        let k0 = n.saturating_sub(3);
        total = total + quadratic_piece(&g[k0..n], g[n - 2].0, g[n - 1].0);
    }
    if hi > lo {
        total = total + composite_simpson(&g[lo..=hi], step);
    }
    total
}

fn composite_simpson<T: Scalar>(g: &[(T, T)], h: T) -> T {
    let intervals = g.len() - 1;
    let three = T::lit(3.0);
    let simpson_end = if intervals.is_multiple_of(2) {
        intervals
    } else {
        intervals.saturating_sub(3)
    };
    let mut total = T::zero();
    let mut i = 0;
    while i + 2 <= simpson_end {
        total = total + h / three * (g[i].1 + T::lit(4.0) * g[i + 1].1 + g[i + 2].1);
        i += 2;
    }
    let rest = intervals - simpson_end;
    if rest == 3 {
        let j = simpson_end;
        total = total
            + T::lit(3.0 / 8.0)
                * h
                * (g[j].1 + three * g[j + 1].1 + three * g[j + 2].1 + g[j + 3].1);
    } else if rest == 1 {
        let j = simpson_end;
        total = total + h * (g[j].1 + g[j + 1].1) / T::lit(2.0);
    }
    total
}

/// Integral over `[lo, hi]` of the interpolating polynomial through `pts`
/// (two or three points).
fn quadratic_piece<T: Scalar>(pts: &[(T, T)], lo: T, hi: T) -> T {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let (x0, f0) = pts[0];
    let (x1, f1) = pts[1];
    let d1 = (f1 - f0) / (x1 - x0);
    // ∫ (t - x0) dt
    let lin = ((hi - x0).powi(2) - (lo - x0).powi(2)) / two;
    let mut total = f0 * (hi - lo) + d1 * lin;
    if let Some(&(x2, f2)) = pts.get(2) {
        let d2 = ((f2 - f1) / (x2 - x1) - d1) / (x2 - x0);
        // ∫ (t - x0)(t - x1) dt = ∫ u (u - (x1 - x0)) du with u = t - x0
        let w = x1 - x0;
        let prim = |u: T| u.powi(3) / three - w * u.powi(2) / two;
        total = total + d2 * (prim(hi - x0) - prim(lo - x0));
    }
    total
}

/// Fixed points of `h` on `[0, 1]` by sign scan of `h(x) - x` on `grid_n`
/// cells, refined by bisection to `1e-12`.
pub fn brute_force_equilibria<T: Scalar>(
    params: &ModelParams<T>,
    grid_n: usize,
) -> Result<Vec<Equilibrium<T>>> {
    if grid_n < 1000 {
        return Err(Error::InvalidInput(format!(
            "grid_n must be >= 1000, got {grid_n}"
        )));
    }
    let dist = params.affinity();
    let g = |x: T| dist.ccdf(params.cost - params.externality * x) - x;
    let n = T::from_usize(grid_n).expect("grid size");
    let xs: Vec<T> = (0..=grid_n)
        .map(|i| T::from_usize(i).expect("index") / n)
        .collect();
    let gs: Vec<T> = xs.iter().map(|&x| g(x)).collect();

    let nudge = T::lit(1e-6) / n;
    let mut roots: Vec<T> = Vec::new();
    for i in 0..=grid_n {
        if gs[i].is_zero() {
            roots.push(xs[i]);
        }
        if i == grid_n {
            continue;
        }
        // a root on a node can share its cell with another root; look for a
        // sign change just inside the cell instead
        let (mut lo, mut glo) = (xs[i], gs[i]);
        let (mut hi, mut ghi) = (xs[i + 1], gs[i + 1]);
        if glo.is_zero() {
            lo = lo + nudge;
            glo = g(lo);
        }
        if ghi.is_zero() {
            hi = hi - nudge;
            ghi = g(hi);
        }
        if glo * ghi < T::zero() {
            while hi - lo > T::lit(1e-13) {
                let mid = (lo + hi) / T::lit(2.0);
                let gm = g(mid);
                if gm.is_zero() {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (gm < T::zero()) == (glo < T::zero()) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push((lo + hi) / T::lit(2.0));
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-9));

    let probe = T::lit(1e-7);
    Ok(roots
        .into_iter()
        .map(|level| {
            let rises_below = level <= T::zero() || g(level - probe) > T::zero();
            let falls_above = level >= T::one() || g(level + probe) < T::zero();
            let stability = if rises_below && falls_above {
                Stability::Stable
            } else {
                Stability::Unstable
            };
            Equilibrium { level, stability }
        })
        .collect())
}

/// Central difference `(f(at + h) - f(at - h)) / 2h`.
pub fn finite_diff<T, E, F>(f: F, at: T, h: T) -> Result<T, E>
where
    T: Scalar,
    F: Fn(T) -> Result<T, E>,
{
    Ok((f(at + h)? - f(at - h)?) / (T::lit(2.0) * h))
}

/// First time the samples reach `target`, linearly interpolated, or `None`
/// if they never do within the span.
pub fn first_passage<T: Scalar>(sampled: &SampledTrajectory<T>, target: T) -> Option<T> {
    let levels = &sampled.levels;
    if levels[0] == target {
        return Some(sampled.start);
    }
    let side = (levels[0] - target).signum();
    for i in 1..levels.len() {
        let d = levels[i] - target;
        if d.is_zero() || d.signum() != side {
            let prev = levels[i - 1];
            let frac = (target - prev) / (levels[i] - prev);
            return Some(sampled.time(i - 1) + frac * sampled.step);
        }
    }
    None
}
