//! Adaptive Simpson quadrature with an accumulated error estimate.

use crate::scalar::Scalar;

const MAX_DEPTH: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    /// Sum of the Richardson error estimates of the accepted panels.
    pub error: T,
    pub evaluations: usize,
}

struct Panel<T> {
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Quadrature<T> {
    if a == b {
        return Quadrature {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        };
    }
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let mut out = Quadrature {
        value: T::zero(),
        error: T::zero(),
        evaluations: 3,
    };
    refine(
        &f,
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        tol,
        MAX_DEPTH,
        &mut out,
    );
    out
}

fn simpson<T: Scalar>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

fn refine<T: Scalar, F: Fn(T) -> T>(
    f: &F,
    p: Panel<T>,
    tol: T,
    depth: u32,
    out: &mut Quadrature<T>,
) {
    let two = T::lit(2.0);
    let m = (p.a + p.b) / two;
    let lm = (p.a + m) / two;
    let rm = (m + p.b) / two;
    let (flm, frm) = (f(lm), f(rm));
    out.evaluations += 2;
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    let fifteen = T::lit(15.0);
    if depth == 0 || delta.abs() <= fifteen * tol {
        out.value = out.value + left + right + delta / fifteen;
        out.error = out.error + delta.abs() / fifteen;
        return;
    }
    let half = tol / two;
    refine(
        f,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        },
        half,
        depth - 1,
        out,
    );
    refine(
        f,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        half,
        depth - 1,
        out,
    );
}
