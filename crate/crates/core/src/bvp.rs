//! Undetermined coefficients for `Φ'' − ω²Φ = R(y)` with `R` in the term
//! class, used by both the Stokes expansion and the center-manifold solver.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::funcspace::{FrequencyVector, Lattice, TermFunction, TermKey, YKind, Y_POWER_CAP};

/// Polynomial `P` with `P'' + 2bP' + (b² − ω²)P = y^p`, as coefficients of
/// `y^0..`. `resonant` means `b² = ω²` exactly on the lattice.
fn poly_solve(b: f64, omega: f64, p: usize, resonant: bool) -> Vec<f64> {
    let mut c = vec![0.0; p + 3];
    let at = |c: &Vec<f64>, i: usize| c.get(i).copied().unwrap_or(0.0);
    if resonant {
        if b == 0.0 {
            c[p + 2] = 1.0 / ((p + 1) * (p + 2)) as f64;
            return c;
        }
        for r in (0..=p).rev() {
            let rhs = if r == p { 1.0 } else { 0.0 } - ((r + 2) * (r + 1)) as f64 * at(&c, r + 2);
            c[r + 1] = rhs / (2.0 * b * (r + 1) as f64);
        }
    } else {
        let d = b * b - omega * omega;
        for r in (0..=p).rev() {
            let rhs = if r == p { 1.0 } else { 0.0 }
                - 2.0 * b * (r + 1) as f64 * at(&c, r + 1)
                - ((r + 2) * (r + 1)) as f64 * at(&c, r + 2);
            c[r] = rhs / d;
        }
    }
    c
}

/// A particular solution of `Φ'' − ω²Φ = rhs` for a y-only `rhs`, where `ω`
/// is the value of `w` on `lat`. Rates equal to `±w` on the lattice get the
/// resonant (degree-raising) ansatz.
pub fn particular(lat: &Lattice, w: FrequencyVector, rhs: &TermFunction) -> Result<TermFunction> {
    let omega = lat.value(w);
    let (wn, _) = w.normalized();
    let mut out = TermFunction::zero();
    for t in rhs.terms() {
        if t.key.has_x() {
            return Err(Error::Domain("particular solution expects a y-only right side".into()));
        }
        let p = t.key.y_power as usize;
        let mut pieces: Vec<(YKind, f64, usize)> = Vec::new(); // (kind, coeff, power)
        match t.key.y_kind {
            YKind::Const => {
                let poly = poly_solve(0.0, omega, p, w.is_zero());
                for (r, v) in poly.iter().enumerate() {
                    if *v != 0.0 {
                        pieces.push((YKind::Const, *v, r));
                    }
                }
            }
            kind => {
                let a = lat.value(t.key.y_rate);
                let res = t.key.y_rate == wn;
                let pp = poly_solve(a, omega, p, res);
                let pm = poly_solve(-a, omega, p, res);
                for r in 0..pp.len() {
                    let (s, d) = (0.5 * (pp[r] + pm[r]), 0.5 * (pp[r] - pm[r]));
                    let (cc, sc) = if kind == YKind::Cosh { (s, d) } else { (d, s) };
                    if cc != 0.0 {
                        pieces.push((YKind::Cosh, cc, r));
                    }
                    if sc != 0.0 {
                        pieces.push((YKind::Sinh, sc, r));
                    }
                }
            }
        }
        for (kind, v, r) in pieces {
            if r as u32 > Y_POWER_CAP {
                return Err(Error::UnsupportedDegree(r as u32));
            }
            let rate = if kind == YKind::Const { FrequencyVector::ZERO } else { t.key.y_rate };
            out = &out
                + &TermFunction::from_terms([crate::funcspace::Term {
                    coeff: t.coeff * v,
                    key: TermKey { y_kind: kind, y_rate: rate, y_power: r as u32, ..TermKey::ONE },
                }]);
        }
    }
    Ok(out)
}

/// Homogeneous pair `(cosh(ωy), sinh(ωy))`, or `(1, y)` when `ω = 0`.
pub fn homogeneous(w: FrequencyVector) -> (TermFunction, TermFunction) {
    if w.is_zero() {
        (TermFunction::constant(1.0), TermFunction::poly_y(1.0, 1))
    } else {
        (TermFunction::cosh_y(1.0, w, 0), TermFunction::sinh_y(1.0, w, 0))
    }
}

/// Value of a y-only function at `y0`.
pub fn value_at(lat: &Lattice, f: &TermFunction, y0: f64) -> C64 {
    f.at_y(lat, y0).coeff(&TermKey::ONE)
}

/// `Φ_p + A·h_s` with `A` chosen so that the result has zero slope at `y = 0`.
pub fn neumann_at_bottom(lat: &Lattice, w: FrequencyVector, phi_p: &TermFunction) -> TermFunction {
    let (_, hs) = homogeneous(w);
    let slope_p = value_at(lat, &phi_p.dy(lat), 0.0);
    let slope_h = value_at(lat, &hs.dy(lat), 0.0);
    phi_p - &hs.scale(slope_p / slope_h)
}
