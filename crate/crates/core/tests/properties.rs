use adoption_core::closed_form::{band_exit_times, that, unsubsidized_trajectory, xhat};
use adoption_core::model::{classify_equilibria, EquilibriumCase, Stability};
use adoption_core::oracle::{integrate_ode, NoSubsidy};
use adoption_core::subsidy::{
    min_duration, min_duration_cost, min_duration_trajectory, min_subsidy, SubsidyBounds,
};
use adoption_core::{Exact, ExactParams, Params};
use proptest::prelude::*;

/// Bistable markets (`u_max < c < u_min + e`) with a start below the knee.
fn bistable() -> impl Strategy<Value = (Params, f64)> {
    (
        0.0..2.0f64,
        0.3..2.0f64,
        0.05..0.95f64,
        0.1..3.0f64,
        0.2..3.0f64,
        0.0..0.95f64,
    )
        .prop_map(|(u_min, spread, at, extra, gamma, frac)| {
            let u_max = u_min + spread;
            let e = spread + extra;
            let c = u_max + at * (u_min + e - u_max);
            let p = Params::new(u_min, u_max, c, e, gamma).unwrap();
            let y0 = frac * p.knee().unwrap();
            (p, y0)
        })
}

fn any_market() -> impl Strategy<Value = Params> {
    (
        0.0..2.0f64,
        0.3..2.0f64,
        0.0..4.0f64,
        0.0..4.0f64,
        0.2..3.0f64,
    )
        .prop_map(|(u_min, spread, c, e, gamma)| {
            Params::new(u_min, u_max(u_min, spread), c, e, gamma).unwrap()
        })
}

fn u_max(u_min: f64, spread: f64) -> f64 {
    u_min + spread
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn band_solution_round_trips((p, _) in bistable(), x0 in 0.0..1.0f64, frac in 0.0..1.0f64) {
        let (lo, hi) = (p.band_low().unwrap(), p.band_high().unwrap());
        let x0 = lo + x0 * (hi - lo);
        let knee = p.knee().unwrap();
        prop_assume!((x0 - knee).abs() > 1e-3);
        let exit = match band_exit_times(x0, p.cost, &p) {
            (Some(t), _) | (None, Some(t)) => t,
            _ => unreachable!("an off-knee start leaves the band"),
        };
        let t = frac * exit;
        let x = xhat(t, 0.0, x0, p.cost, &p);
        let back = that(x, 0.0, x0, p.cost, &p).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * (1.0 + t), "t = {t}, back = {back}");
    }

    #[test]
    fn unsubsidized_path_settles_on_a_stable_equilibrium(p in any_market(), x0 in 0.0..1.0f64) {
        let Ok(report) = classify_equilibria(&p) else { return Ok(()) };
        if let Some(knee) = report.interior {
            prop_assume!((x0 - knee).abs() > 1e-3 || report.case != EquilibriumCase::Bistable);
        }
        let path = unsubsidized_trajectory(&p, 0.0, x0).unwrap();
        let limit = path.limit().unwrap();
        let stable = report
            .equilibria
            .iter()
            .any(|eq| eq.stability == Stability::Stable && (eq.level - limit).abs() < 1e-12);
        prop_assert!(stable, "limit {limit} of {report:?}");
    }

    #[test]
    fn unsubsidized_path_matches_rk4(p in any_market(), x0 in 0.0..1.0f64) {
        if let Ok(knee) = p.knee() {
            prop_assume!((x0 - knee).abs() > 1e-2);
        }
        let dt = 1e-3 / p.gamma;
        let sampled = integrate_ode(&p, &p.affinity(), &NoSubsidy, 0.0, x0, 10.0 / p.gamma, dt).unwrap();
        let path = unsubsidized_trajectory(&p, 0.0, x0).unwrap();
        for (t, x) in sampled.iter() {
            prop_assert!((path.eval(t).unwrap() - x).abs() <= 1e-6, "t = {t}");
        }
    }

    #[test]
    fn minimum_duration_lands_on_the_knee((p, y0) in bistable(), frac in 0.02..1.0f64) {
        let lo = min_subsidy(&p, y0).unwrap();
        let s = lo + frac * (p.cost - lo);
        let plan = min_duration_trajectory(&p, y0, s).unwrap();
        let at = plan.trajectory.eval(plan.duration).unwrap();
        prop_assert!((at - p.knee().unwrap()).abs() <= 1e-9, "x(T̂) = {at}");
    }

    #[test]
    fn minimum_duration_cost_is_the_integral((p, y0) in bistable(), frac in 0.02..1.0f64) {
        let lo = min_subsidy(&p, y0).unwrap();
        let s = lo + frac * (p.cost - lo);
        let t = min_duration(&p, y0, s).unwrap().unwrap();
        let plan = min_duration_trajectory(&p, y0, s).unwrap();
        let area = plan.trajectory.integral(0.0, t, 1e-12).unwrap().value;
        let cost = min_duration_cost(&p, y0, s).unwrap().unwrap().value;
        prop_assert!((cost - s * area).abs() <= 1e-8 * (1.0 + cost), "{cost} vs {}", s * area);
    }

    #[test]
    fn intervals_tile_the_levels((p, y0) in bistable()) {
        let b = SubsidyBounds::new(&p, y0).unwrap();
        let knee = p.knee().unwrap();
        prop_assert!((b.minimum - b.decay_end - p.spread() * y0).abs() < 1e-12);
        prop_assert!((b.crossing_end - b.direct_end - p.externality * (knee - y0)).abs() < 1e-12);
        let iv = b.intervals();
        prop_assert_eq!(iv[0].0, 0.0);
        prop_assert_eq!(iv[4].1, p.cost);
        for w in iv.windows(2) {
            prop_assert!(w[0].0 <= w[0].1 && w[0].1 == w[1].0, "{iv:?}");
        }
    }

    #[test]
    fn exact_and_float_classification_agree(
        u_min in 0i64..8, spread in 1i64..8, c in 0i64..20, e in 0i64..20, k in 0u32..3,
    ) {
        let d = 1i64 << k;
        let r = |n: i64| Exact::new(n, d);
        let exact = ExactParams::new(r(u_min), r(u_min + spread), r(c), r(e), Exact::from_integer(1)).unwrap();
        let float = Params::new(
            u_min as f64 / d as f64,
            (u_min + spread) as f64 / d as f64,
            c as f64 / d as f64,
            e as f64 / d as f64,
            1.0,
        )
        .unwrap();
        match (classify_equilibria(&exact), classify_equilibria(&float)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.case, b.case);
                prop_assert_eq!(a.equilibria.len(), b.equilibria.len());
                for (x, y) in a.equilibria.iter().zip(&b.equilibria) {
                    let xf = *x.level.numer() as f64 / *x.level.denom() as f64;
                    prop_assert!((xf - y.level).abs() < 1e-12);
                    prop_assert_eq!(x.stability, y.stability);
                }
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}
