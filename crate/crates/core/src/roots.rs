//! Safeguarded Newton–bisection for strictly increasing scalar functions.

/// Hard cap on bracket expansions and on refinement steps.
pub const MAX_ITERATIONS: usize = 200;

/// Solves `g(x) = target` where `g` is continuous and strictly increasing.
///
/// `eval` returns `(g(x), g'(x))`. The search starts at `guess`, expands a
/// bracket geometrically until the residual changes sign, then alternates
/// Newton steps with bisection whenever Newton would leave the bracket.
/// Returns as soon as `|g(x) - target| <= tol` or the bracket has shrunk to a
/// few ulps; in the latter case the best point seen is returned.
pub fn solve_increasing<F>(eval: F, target: f64, guess: f64, tol: f64) -> f64
where
    F: Fn(f64) -> (f64, f64),
{
    let residual = |x: f64| {
        let (g, dg) = eval(x);
        (g - target, dg)
    };

    let (r0, d0) = residual(guess);
    if r0.abs() <= tol {
        return guess;
    }

    let mut best = (r0.abs(), guess);
    let mut step = guess.abs().max(1.0);
    let (mut lo, mut hi) = (guess, guess);
    if r0 < 0.0 {
        for _ in 0..MAX_ITERATIONS {
            hi = guess + step;
            let (r, _) = residual(hi);
            if r.abs() < best.0 {
                best = (r.abs(), hi);
            }
            if r >= 0.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
        }
    } else {
        for _ in 0..MAX_ITERATIONS {
            lo = guess - step;
            let (r, _) = residual(lo);
            if r.abs() < best.0 {
                best = (r.abs(), lo);
            }
            if r <= 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
        }
    }
    if best.0 <= tol {
        return best.1;
    }

    let (mut x, mut r, mut d) = (guess, r0, d0);
    for _ in 0..MAX_ITERATIONS {
        let newton = x - r / d;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let (rn, dn) = residual(next);
        if rn.abs() < best.0 {
            best = (rn.abs(), next);
        }
        if rn.abs() <= tol {
            return next;
        }
        if rn < 0.0 {
            lo = next;
        } else {
            hi = next;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        x = next;
        r = rn;
        d = dn;
    }
    best.1
}
