//! Adaptive Simpson quadrature.

/// Default absolute tolerance for bound averaging.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default cap on the number of subintervals.
pub const DEFAULT_MAX_INTERVALS: usize = 1000;

const INITIAL_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the Richardson error estimates over accepted subintervals.
    pub error_estimate: f64,
    /// Number of accepted subintervals.
    pub intervals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Panels are refined depth-first until the local Simpson estimates agree, or
/// until `max_intervals` accepted panels would be exceeded, in which case the
/// remaining panels are accepted as they are.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_intervals: usize) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error_estimate: 0.0,
            intervals: 0,
        };
    }
    if b < a {
        let r = adaptive_simpson(f, b, a, tol, max_intervals);
        return Integral { value: -r.value, ..r };
    }

    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    // Start from a few equal panels so a narrow peak cannot slip between the
    // first three sample points.
    let pieces = INITIAL_PANELS.min(max_intervals.max(1));
    let width = (b - a) / pieces as f64;
    let mut stack: Vec<Panel> = (0..pieces)
        .rev()
        .map(|i| {
            let pa = a + width * i as f64;
            let pb = if i + 1 == pieces { b } else { pa + width };
            let (fa, fm, fb) = (f(pa), f(0.5 * (pa + pb)), f(pb));
            Panel {
                a: pa,
                b: pb,
                fa,
                fm,
                fb,
                whole: simpson(pa, pb, fa, fm, fb),
                tol: tol / pieces as f64,
            }
        })
        .collect();

    let mut value = 0.0;
    let mut comp = 0.0;
    let mut error_estimate = 0.0;
    let mut intervals = 0usize;
    let max_intervals = max_intervals.max(1);

    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;

        let budget_left = max_intervals.saturating_sub(intervals + stack.len() + 1);
        let converged = delta.abs() <= 15.0 * p.tol;
        let too_narrow = (p.b - p.a) <= f64::EPSILON * p.a.abs().max(p.b.abs()) * 8.0;
        if converged || too_narrow || budget_left < 1 {
            let accepted = left + right + delta / 15.0;
            // Neumaier summation keeps the total independent of panel count to ~1 ulp
            let t = value + accepted;
            if value.abs() >= accepted.abs() {
                comp += (value - t) + accepted;
            } else {
                comp += (accepted - t) + value;
            }
            value = t;
            error_estimate += delta.abs() / 15.0;
            intervals += 1;
        } else {
            let half = 0.5 * p.tol;
            // push right first so the left half is processed next
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                tol: half,
            });
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol: half,
            });
        }
    }

    Integral {
        value: value + comp,
        error_estimate,
        intervals,
    }
}

/// Integrates with the default tolerance and interval cap.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    adaptive_simpson(f, a, b, DEFAULT_TOL, DEFAULT_MAX_INTERVALS).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, 100);
        assert!((r.value - 16.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_functions() {
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI);
        assert!((r - 2.0).abs() < 1e-8);
        let r = integrate(|x: f64| (-x * x).exp(), -8.0, 8.0);
        assert!((r - std::f64::consts::PI.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn empty_and_reversed_intervals() {
        assert_eq!(integrate(|x| x, 2.0, 2.0), 0.0);
        assert!((integrate(|x| x, 1.0, 0.0) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn interval_cap_is_respected() {
        let r = adaptive_simpson(|x: f64| x.sqrt(), 0.0, 1.0, 1e-15, 50);
        assert!(r.intervals <= 50);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-4);
    }
}
