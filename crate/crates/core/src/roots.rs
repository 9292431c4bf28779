//! Safeguarded scalar root finding.

use crate::error::{Error, Result};

/// Newton iterations allowed before falling back to pure bisection.
pub const MAX_NEWTON: usize = 50;

/// Widens `[fixed, moving]` by pushing `moving` away from `fixed` until `f`
/// changes sign. Returns the bracket ordered as `(lo, hi)`.
pub fn expand_bracket<F: Fn(f64) -> f64>(f: &F, fixed: f64, moving: f64, factor: f64) -> Result<(f64, f64)> {
    let f0 = f(fixed);
    let mut m = moving;
    for _ in 0..200 {
        let fm = f(m);
        if f0 == 0.0 || fm == 0.0 || (f0 < 0.0) != (fm < 0.0) {
            return Ok(if fixed < m { (fixed, m) } else { (m, fixed) });
        }
        m = fixed + (m - fixed) * factor;
    }
    Err(Error::Bracket(format!("no sign change found from {fixed}")))
}

/// Root of `f` in `[a, b]` (sign change required) by Newton steps kept inside
/// a shrinking bracket, with bisection whenever a step leaves it.
pub fn bisect_newton<F, D>(f: &F, df: &D, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo < 0.0) == (fhi < 0.0) {
        return Err(Error::Bracket(format!("f({lo})={flo} and f({hi})={fhi} share a sign")));
    }
    let mut x = 0.5 * (lo + hi);
    let mut newton_steps = 0;
    for _ in 0..400 {
        let fx = f(x);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            return Ok(x);
        }
        let mut next = 0.5 * (lo + hi);
        if newton_steps < MAX_NEWTON {
            let d = df(x);
            if d.is_finite() && d != 0.0 {
                let cand = x - fx / d;
                if cand > lo && cand < hi {
                    if (cand - x).abs() <= 2.0 * f64::EPSILON * x.abs() {
                        return Ok(cand);
                    }
                    next = cand;
                    newton_steps += 1;
                }
            }
        }
        x = next;
    }
    Err(Error::Bracket("root iteration did not converge".into()))
}

/// Plain bisection on a sign change, to a bracket width `width`.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, width: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let flo = f(lo);
    let fhi = f(hi);
    if (flo < 0.0) == (fhi < 0.0) {
        return Err(Error::Bracket(format!("f({lo})={flo} and f({hi})={fhi} share a sign")));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect_newton(&|x: f64| x * x - 2.0, &|x: f64| 2.0 * x, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_derivative_falls_back_to_bisection() {
        let r = bisect_newton(&|x: f64| x.powi(3) - 0.5, &|_| 1e-300, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.5f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn bracket_expansion() {
        let (lo, hi) = expand_bracket(&|x: f64| x - 10.0, 0.0, 1.0, 2.0).unwrap();
        assert!(lo == 0.0 && hi >= 10.0);
        assert!(bisect_newton(&|x: f64| x * x + 1.0, &|x| 2.0 * x, -1.0, 1.0, 1e-12).is_err());
    }
}
