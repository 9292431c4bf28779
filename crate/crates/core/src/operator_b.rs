//! The expanded perturbation operators `B^(m,n)(x;σ)`, `1 ≤ m+n ≤ 2`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcspace::{Lattice, StateVec, TermFunction};
use crate::stokes::StokesExpansion;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BOrder {
    pub m: u32,
    pub n: u32,
}

impl BOrder {
    pub const SUPPORTED: [BOrder; 5] = [
        BOrder { m: 1, n: 0 },
        BOrder { m: 2, n: 0 },
        BOrder { m: 0, n: 1 },
        BOrder { m: 1, n: 1 },
        BOrder { m: 0, n: 2 },
    ];

    pub fn new(m: u32, n: u32) -> Result<Self> {
        let o = BOrder { m, n };
        if Self::SUPPORTED.contains(&o) {
            Ok(o)
        } else {
            Err(Error::Domain(format!("B^({m},{n}) is not available")))
        }
    }
}

/// Stokes fields and their traces at `y = 1`, precomputed once per wave.
#[derive(Clone, Debug)]
pub struct BContext {
    pub mu0: f64,
    pub mu2: f64,
    pub phibar2: f64,
    // traces, functions of x
    p1x1: TermFunction,
    p1y1: TermFunction,
    p1xx1: TermFunction,
    p1xy1: TermFunction,
    p2x1: TermFunction,
    p2y1: TermFunction,
    p2xx1: TermFunction,
    p2xy1: TermFunction,
    e1: TermFunction,
    e1x: TermFunction,
    e1xx: TermFunction,
    e2: TermFunction,
    e2x: TermFunction,
    // fields of (x, y)
    p1y: TermFunction,
    p1xy: TermFunction,
    p1yy: TermFunction,
    p2y: TermFunction,
    p2xy: TermFunction,
    p2yy: TermFunction,
    y: TermFunction,
}

impl BContext {
    pub fn new(se: &StokesExpansion) -> Self {
        let lat = &se.lat;
        let top = |f: &TermFunction| f.at_y(lat, 1.0);
        let (p1, p2) = (&se.phi[0], &se.phi[1]);
        let (p1x, p1y, p2x, p2y) = (p1.dx(lat), p1.dy(lat), p2.dx(lat), p2.dy(lat));
        let (p1xy, p2xy) = (p1y.dx(lat), p2y.dx(lat));
        let (e1, e2) = (se.eta[0].clone(), se.eta[1].clone());
        Self {
            mu0: se.mu[0],
            mu2: se.mu[2],
            phibar2: se.phibar[1],
            p1x1: top(&p1x),
            p1y1: top(&p1y),
            p1xx1: top(&p1x.dx(lat)),
            p1xy1: top(&p1xy),
            p2x1: top(&p2x),
            p2y1: top(&p2y),
            p2xx1: top(&p2x.dx(lat)),
            p2xy1: top(&p2xy),
            e1x: e1.dx(lat),
            e1xx: e1.dx(lat).dx(lat),
            e2x: e2.dx(lat),
            e1,
            e2,
            p1yy: p1y.dy(lat),
            p2yy: p2y.dy(lat),
            p1y,
            p1xy,
            p2y,
            p2xy,
            y: TermFunction::poly_y(1.0, 1),
        }
    }
}

/// `Σ cᵢ Πⱼ fᵢⱼ`.
fn combo(terms: &[(C64, &[&TermFunction])]) -> TermFunction {
    let mut out = TermFunction::zero();
    for (c, fs) in terms {
        let mut p = TermFunction::constant(*c);
        for f in fs.iter() {
            p = &p * *f;
        }
        out = &out + &p;
    }
    out
}

fn r(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// The pieces of `u` that appear in the formulas.
struct Jet {
    phi: TermFunction,
    phi_y: TermFunction,
    phi_yy: TermFunction,
    phi_1: TermFunction,
    phi_y1: TermFunction,
    ups: TermFunction,
    ups_y: TermFunction,
    ups_1: TermFunction,
    eta: TermFunction,
}

impl Jet {
    fn new(lat: &Lattice, u: &StateVec) -> Self {
        let phi_y = u.phi.dy(lat);
        Self {
            phi_1: u.phi.at_y(lat, 1.0),
            phi_y1: phi_y.at_y(lat, 1.0),
            phi_yy: phi_y.dy(lat),
            phi: u.phi.clone(),
            phi_y,
            ups_y: u.upsilon.dy(lat),
            ups_1: u.upsilon.at_y(lat, 1.0),
            ups: u.upsilon.clone(),
            eta: u.eta.clone(),
        }
    }
}

/// `B^(m,n)(x;σ)u`.
pub fn apply_b(ctx: &BContext, order: BOrder, lat: &Lattice, sigma: f64, u: &StateVec) -> Result<StateVec> {
    let order = BOrder::new(order.m, order.n)?;
    let m0 = ctx.mu0;
    let j = Jet::new(lat, u);
    let is = I * sigma;
    let out = match (order.m, order.n) {
        (1, 0) => StateVec::new(
            j.phi.clone(),
            &j.ups.scale(-1.0) - &j.phi.scale(2.0 * is / m0),
            j.eta.clone(),
        ),
        (2, 0) => StateVec::new(TermFunction::zero(), j.phi.scale(-1.0 / m0), TermFunction::zero()),
        (0, 1) => b01(ctx, &j, sigma),
        (1, 1) => b11(ctx, &j, sigma),
        _ => b02(ctx, &j, sigma),
    };
    Ok(out)
}

fn b01(c: &BContext, j: &Jet, s: f64) -> StateVec {
    let m0 = c.mu0;
    let is = I * s;
    let y = &c.y;
    let first = &(&(&(&combo(&[(is, &[&c.p1x1])]) * &j.phi
        + &combo(&[(r(1.0), &[y, &c.e1x]), (r(1.0), &[&c.p1y1])]) * &j.phi_y)
        - &(&combo(&[(r(1.0), &[y, &c.p1y])]) * &j.phi_y1))
        + &(&combo(&[(r(m0), &[&c.p1x1]), (-is, &[&c.p1y1])]) * &j.ups))
        + &(&combo(&[(is, &[y, &c.p1y])]) * &j.eta);
    let second = combo(&[
        (is * s * s / (m0 * m0), &[&c.p1y1]),
        (r(s * s / m0), &[&c.p1x1]),
        (-I * s / m0, &[&c.p1xx1]),
    ]) * j.phi.clone()
        + combo(&[(r(-1.0 / m0), &[&c.p1xy1]), (-2.0 * is / m0, &[&c.p1y1])]) * j.phi_y.clone()
        + combo(&[(r(1.0 / m0), &[&c.p1x1]), (r(2.0 / m0), &[&c.e1]), (-is / (m0 * m0), &[&c.p1y1])])
            * j.phi_yy.clone()
        + combo(&[(is / m0, &[y, &c.p1y]), (r(-1.0 / m0), &[y, &c.p1xy])]) * j.phi_y1.clone()
        + combo(&[(is / m0, &[&c.p1xy1]), (r(-1.0), &[&c.p1xx1]), (-I * s, &[&c.p1x1])]) * j.ups.clone()
        + combo(&[(r(1.0), &[y, &c.e1x]), (r(-1.0), &[&c.p1y1])]) * j.ups_y.clone()
        + combo(&[(r(2.0 / m0), &[&c.p1yy]), (r(s * s / m0), &[y, &c.p1y]), (is / m0, &[y, &c.p1xy])])
            * j.eta.clone();
    let third = combo(&[(is, &[&c.e1x])]) * j.phi_1.clone()
        + combo(&[(r(1.0), &[&c.e1]), (r(-1.0), &[&c.p1x1])]) * j.phi_y1.clone()
        + combo(&[(r(m0), &[&c.e1x])]) * j.ups_1.clone()
        + combo(&[(r(1.0), &[&c.p1y1]), (is, &[&c.p1x1])]) * j.eta.clone();
    StateVec::new(first, second, third)
}

fn b11(c: &BContext, j: &Jet, s: f64) -> StateVec {
    let m0 = c.mu0;
    let is = I * s;
    let y = &c.y;
    let first = combo(&[(r(1.0), &[&c.p1x1])]) * j.phi.clone()
        + combo(&[(r(-1.0), &[&c.p1y1])]) * j.ups.clone()
        + combo(&[(r(1.0), &[y, &c.p1y])]) * j.eta.clone();
    let second = combo(&[
        (r(3.0 * s * s / (m0 * m0)), &[&c.p1y1]),
        (r(-1.0 / m0), &[&c.p1xx1]),
        (-2.0 * is / m0, &[&c.p1x1]),
    ]) * j.phi.clone()
        + combo(&[(r(-2.0 / m0), &[&c.p1y1])]) * j.phi_y.clone()
        + combo(&[(r(-1.0 / (m0 * m0)), &[&c.p1y1])]) * j.phi_yy.clone()
        + combo(&[(r(1.0 / m0), &[y, &c.p1y])]) * j.phi_y1.clone()
        + combo(&[(r(1.0 / m0), &[&c.p1xy1]), (r(-1.0), &[&c.p1x1])]) * j.ups.clone()
        + combo(&[(r(1.0 / m0), &[y, &c.p1xy]), (-2.0 * is / m0, &[y, &c.p1y])]) * j.eta.clone();
    let third = combo(&[(r(1.0), &[&c.e1x])]) * j.phi_1.clone() + combo(&[(r(1.0), &[&c.p1x1])]) * j.eta.clone();
    StateVec::new(first, second, third)
}

fn b02(c: &BContext, j: &Jet, s: f64) -> StateVec {
    let m0 = c.mu0;
    let is = I * s;
    let y = &c.y;
    let pb = TermFunction::constant(c.phibar2);
    let one = TermFunction::constant(1.0);
    let (s2, s3, s4) = (s * s, s * s * s, s.powi(4));
    let m02 = m0 * m0;
    let m03 = m02 * m0;

    let first = combo(&[
        (is, &[&c.p1x1, &c.p1x1]),
        (is, &[&pb]),
        (is, &[&c.p2x1]),
        (-is, &[&c.p1y1, &c.e1x]),
    ]) * j.phi.clone()
        + combo(&[
            (r(1.0), &[&c.p2y1]),
            (r(1.0), &[&c.p1x1, &c.p1y1]),
            (r(-2.0), &[&c.p1y1, &c.e1]),
            (r(1.0), &[y, &c.e2x]),
            (r(-1.0), &[y, &c.e1, &c.e1x]),
        ]) * j.phi_y.clone()
        + combo(&[(is, &[y, &c.p1y, &c.e1x])]) * j.phi_1.clone()
        + combo(&[
            (r(2.0), &[y, &c.e1, &c.p1y]),
            (r(-1.0), &[y, &c.p1x1, &c.p1y]),
            (r(-1.0), &[y, &c.p2y]),
        ]) * j.phi_y1.clone()
        + combo(&[
            (r(c.mu2), &[&one]),
            (r(m0), &[&c.p1x1, &c.p1x1]),
            (r(m0), &[&pb]),
            (r(-1.0), &[&c.p1y1, &c.p1y1]),
            (r(m0), &[&c.p2x1]),
            (-is, &[&c.p2y1]),
            (r(-m0), &[&c.p1y1, &c.e1x]),
            (-is, &[&c.p1x1, &c.p1y1]),
            (is, &[&c.p1y1, &c.e1]),
        ]) * j.ups.clone()
        + combo(&[(r(m0), &[y, &c.p1y, &c.e1x])]) * j.ups_1.clone()
        + combo(&[
            (is, &[y, &c.p2y]),
            (r(-1.0), &[y, &c.p1y, &c.e1x]),
            (r(1.0), &[y, &c.p1y1, &c.p1y]),
            (is, &[y, &c.p1x1, &c.p1y]),
            (-is, &[y, &c.e1, &c.p1y]),
        ]) * j.eta.clone();

    let second = combo(&[
        (r(m02 * s2), &[&c.p1x1, &c.p1x1]),
        (r(-m0 * c.mu2 * s2), &[&one]),
        (r(-s4), &[&c.p1y1, &c.p1y1]),
        (r(m02 * s2), &[&pb]),
        (-I * m02 * s, &[&c.p2xx1]),
        (I * m0 * s3, &[&c.p2y1]),
        (r(m0 * s2), &[&c.p1y1, &c.p1y1]),
        (r(m02 * s2), &[&c.p2x1]),
        (I * m02 * s, &[&c.p1xy1, &c.e1x]),
        (-I * m02 * s, &[&c.p1x1, &c.p1xx1]),
        (r(m0 * s2), &[&c.p1y1, &c.p1xx1]),
        (I * m0 * s3, &[&c.p1x1, &c.p1y1]),
        (-I * m0 * s3, &[&c.p1y1, &c.e1]),
        (r(-m02 * s2), &[&c.p1y1, &c.e1x]),
        (I * m02 * s, &[&c.p1y1, &c.e1xx]),
    ])
    .scale(1.0 / m03)
        * j.phi.clone()
        + combo(&[
            (r(2.0 * s2), &[&c.p1y1, &c.p1y1]),
            (r(-m0), &[&c.p2xy1]),
            (-2.0 * I * m0 * s, &[&c.p2y1]),
            (r(-m0), &[&c.p1y1, &c.p1xx1]),
            (r(m0), &[&c.p1y1, &c.e1x]),
            (r(2.0 * m0), &[&c.e1, &c.p1xy1]),
            (-is, &[&c.p1y1, &c.p1xy1]),
            (-2.0 * I * m0 * s, &[&c.p1x1, &c.p1y1]),
            (4.0 * I * m0 * s, &[&c.p1y1, &c.e1]),
        ])
        .scale(1.0 / m02)
            * j.phi_y.clone()
        + combo(&[(r(s2), &[y, &c.p1y, &c.e1x]), (is, &[y, &c.e1x, &c.p1xy])]).scale(1.0 / m0) * j.phi_1.clone()
        + combo(&[
            (r(m02), &[&c.p2x1]),
            (r(-m0), &[&c.p1y1, &c.p1y1]),
            (r(2.0 * m02), &[&c.e2]),
            (r(m0 * c.mu2), &[&one]),
            (r(-m02), &[&c.p1y1, &c.p1y1]),
            (r(-3.0 * m02), &[&c.e1, &c.e1]),
            (r(s2), &[&c.p1y1, &c.p1y1]),
            (r(m02), &[&pb]),
            (-I * m0 * s, &[&c.p2y1]),
            (r(-m02), &[&c.p1y1, &c.e1x]),
            (r(-2.0 * m02), &[&c.p1x1, &c.e1]),
            (I * m0 * s, &[&c.p1x1, &c.p1y1]),
            (3.0 * I * m0 * s, &[&c.p1y1, &c.e1]),
        ])
        .scale(1.0 / m03)
            * j.phi_yy.clone()
        + combo(&[
            (r(m0), &[&c.p1y1, &c.p1y]),
            (r(-m0), &[y, &c.p2xy]),
            (r(m0), &[y, y, &c.e1x, &c.p1yy]),
            (r(m0), &[y, &c.p1y, &c.e1x]),
            (r(-s2), &[y, &c.p1y1, &c.p1y]),
            (r(2.0 * m0), &[y, &c.e1, &c.p1xy]),
            (r(m0), &[y, &c.p1y1, &c.p1yy]),
            (-is, &[y, &c.p1y1, &c.p1xy]),
            (I * m0 * s, &[y, &c.p2y]),
            (I * m0 * s, &[y, &c.p1x1, &c.p1y]),
            (-2.0 * I * m0 * s, &[y, &c.e1, &c.p1y]),
        ])
        .scale(1.0 / m02)
            * j.phi_y1.clone()
        + combo(&[
            (r(m02), &[&c.p1y1, &c.e1xx]),
            (r(-m02), &[&c.p2xx1]),
            (r(2.0 * m0), &[&c.p1y1, &c.p1xy1]),
            (-I * m02 * s, &[&c.p2x1]),
            (r(m02), &[&c.p1xy1, &c.e1x]),
            (r(-m02), &[&c.p1x1, &c.p1xx1]),
            (r(-s2), &[&c.p1y1, &c.p1xy1]),
            (-I * m02 * s, &[&c.p1x1, &c.p1x1]),
            (-I * m02 * s, &[&pb]),
            (I * m0 * s, &[&c.p2xy1]),
            (I * m02 * s, &[&c.p1y1, &c.e1x]),
            (-I * m0 * s, &[&c.p1y1, &c.e1x]),
            (-I * m0 * s, &[&c.e1, &c.p1xy1]),
        ])
        .scale(1.0 / m02)
            * j.ups.clone()
        + combo(&[
            (r(2.0), &[&c.p1y1, &c.e1]),
            (r(-1.0), &[&c.p1x1, &c.p1y1]),
            (r(-1.0), &[&c.p2y1]),
            (r(1.0), &[y, &c.e2x]),
            (r(-1.0), &[y, &c.e1, &c.e1x]),
        ]) * j.ups_y.clone()
        + combo(&[(r(1.0), &[y, &c.e1x, &c.p1xy]), (-is, &[y, &c.p1y, &c.e1x])]) * j.ups_1.clone()
        + combo(&[
            (r(2.0 * m0), &[&c.p2yy]),
            (r(-2.0 * m0), &[&c.p1x1, &c.p1yy]),
            (r(-6.0 * m0), &[&c.e1, &c.p1yy]),
            (2.0 * is, &[&c.p1y1, &c.p1yy]),
            (r(-s2), &[y, &c.p1y1, &c.p1xy]),
            (r(m0 * s2), &[y, &c.p2y]),
            (-I * m0 * s, &[&c.p1y1, &c.p1y]),
            (I * m0 * s, &[y, &c.p2xy]),
            (r(-m0), &[y, &c.e1x, &c.p1xy]),
            (I * s3, &[y, &c.p1y1, &c.p1y]),
            (r(m0), &[y, &c.p1y1, &c.p1xy]),
            (r(m0 * s2), &[y, &c.p1x1, &c.p1y]),
            (r(-m0 * s2), &[y, &c.e1, &c.p1y]),
            (-I * m0 * s, &[y, &c.e1, &c.p1xy]),
            (-I * m0 * s, &[y, &c.p1y1, &c.p1yy]),
            (-I * m0 * s, &[y, y, &c.e1x, &c.p1yy]),
            (-I * m0 * s, &[y, &c.p1y1, &c.p1y]),
        ])
        .scale(1.0 / m02)
            * j.eta.clone();

    let third = combo(&[(is, &[&c.e2x]), (2.0 * is, &[&c.p1x1, &c.e1x])]) * j.phi_1.clone()
        + combo(&[
            (r(1.0), &[&c.e2]),
            (r(-1.0), &[&c.p2x1]),
            (r(-1.0), &[&pb]),
            (r(1.0), &[&c.p1x1, &c.e1]),
            (r(-1.0), &[&c.p1x1, &c.p1x1]),
            (r(-1.0), &[&c.e1, &c.e1]),
            (r(2.0), &[&c.p1y1, &c.e1x]),
        ]) * j.phi_y1.clone()
        + combo(&[(r(m0), &[&c.e2x]), (r(2.0 * m0), &[&c.p1x1, &c.e1x]), (-is, &[&c.p1y1, &c.e1x])])
            * j.ups_1.clone()
        + combo(&[
            (is, &[&c.p1x1, &c.p1x1]),
            (r(1.0), &[&c.p2y1]),
            (r(1.0), &[&c.p1x1, &c.p1y1]),
            (r(-2.0), &[&c.p1y1, &c.e1]),
            (is, &[&pb]),
            (is, &[&c.p2x1]),
            (-is, &[&c.p1y1, &c.e1x]),
        ]) * j.eta.clone();
    StateVec::new(first, second, third)
}

/// Pointwise values of `u` needed by the full linearized system.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointJet {
    pub phi: C64,
    pub phi_y: C64,
    pub phi_yy: C64,
    pub phi_1: C64,
    pub phi_y1: C64,
    pub ups: C64,
    pub ups_y: C64,
    pub ups_1: C64,
    pub eta: C64,
}

impl PointJet {
    pub fn of(lat: &Lattice, u: &StateVec, x: f64, y: f64) -> Self {
        let py = u.phi.dy(lat);
        Self {
            phi: u.phi.eval(lat, x, y),
            phi_y: py.eval(lat, x, y),
            phi_yy: py.dy(lat).eval(lat, x, y),
            phi_1: u.phi.eval(lat, x, 1.0),
            phi_y1: py.eval(lat, x, 1.0),
            ups: u.upsilon.eval(lat, x, y),
            ups_y: u.upsilon.dy(lat).eval(lat, x, y),
            ups_1: u.upsilon.eval(lat, x, 1.0),
            eta: u.eta.eval(lat, x, 0.0),
        }
    }
}

/// Order-by-order values of the Stokes quantities that enter the linearized
/// system at one point `(x, y)`.
#[derive(Clone, Debug)]
pub struct StokesPoint {
    h: [C64; 3],
    hx: [C64; 3],
    py: [C64; 3],
    pyy: [C64; 3],
    uy: [C64; 3],
    py1: [C64; 3],
    py1x: [C64; 3],
    u1: [C64; 3],
    u1x: [C64; 3],
    mu: [f64; 4],
    y: f64,
}

impl StokesPoint {
    pub fn new(se: &StokesExpansion, x: f64, y: f64) -> Self {
        let lat = &se.lat;
        let at = |fs: &[TermFunction; 3], dx: usize, dy: usize, yy: f64| -> [C64; 3] {
            let mut out = [C64::new(0.0, 0.0); 3];
            for (o, f) in out.iter_mut().zip(fs) {
                let mut g = f.clone();
                for _ in 0..dx {
                    g = g.dx(lat);
                }
                for _ in 0..dy {
                    g = g.dy(lat);
                }
                *o = g.eval(lat, x, yy);
            }
            out
        };
        let (phi, eta, u) = (&se.phi, &se.eta, &se.u);
        Self {
            h: at(eta, 0, 0, 0.0),
            hx: at(eta, 1, 0, 0.0),
            py: at(phi, 0, 1, y),
            pyy: at(phi, 0, 2, y),
            uy: at(u, 0, 1, y),
            py1: at(phi, 0, 1, 1.0),
            py1x: at(phi, 1, 1, 1.0),
            u1: at(u, 0, 0, 1.0),
            u1x: at(u, 1, 0, 1.0),
            mu: se.mu,
            y,
        }
    }
}

/// `(φ_x, υ_x, η_x)` from the full linearized equations about the truncated
/// Stokes wave at complex amplitude `eps`, at the point of `sp`.
///
/// This goes back to the variable-coefficient system in `(φ, u, η)` and the
/// substitution `u ↔ υ`; it shares nothing with the expanded formulas above.
pub fn linearized_rhs_point(sp: &StokesPoint, lambda: C64, eps: C64, jet: &PointJet) -> [C64; 3] {
    let series = |c: &[C64; 3]| eps * (c[0] + eps * (c[1] + eps * c[2]));
    let y = sp.y;
    let h = 1.0 + series(&sp.h);
    let hx = series(&sp.hx);
    let py = series(&sp.py);
    let pyy = series(&sp.pyy);
    let uy = series(&sp.uy);
    let py1 = series(&sp.py1);
    let py1x = series(&sp.py1x);
    let u1 = series(&sp.u1);
    let u1x = series(&sp.u1x);
    let mu = sp.mu[0] + eps * (sp.mu[1] + eps * (sp.mu[2] + eps * sp.mu[3]));

    let m = mu - lambda * py1 / h - py1 * py1 / h.powu(3);
    let p = py1 / (h * h);
    let dd = 1.0 - u1;
    let m_x = -lambda * (py1x / h - py1 * hx / (h * h)) - (2.0 * py1 * py1x / h.powu(3) - 3.0 * py1 * py1 * hx / h.powu(4));
    let p_x = py1x / (h * h) - 2.0 * py1 * hx / h.powu(3);
    let dd_x = -u1x;

    let j = jet;
    let up = (m * j.ups + lambda * j.phi + p * j.phi_y) / dd;
    let up_y = (m * j.ups_y + lambda * j.phi_y + p * j.phi_yy) / dd;
    let up_1 = (m * j.ups_1 + lambda * j.phi_1 + p * j.phi_y1) / dd;

    // kinematic row, solved for η_x
    let eta_x = (lambda * j.eta + hx * up_1 - j.phi_y1 / h + p * j.eta) / dd;
    // first interior row, solved for φ_x
    let phi_x = y * hx / h * j.phi_y + y * py / h * eta_x - y * hx * py / (h * h) * j.eta + up;
    // its y-derivative
    let phi_xy = hx / h * j.phi_y + y * hx / h * j.phi_yy + (py + y * pyy) / h * eta_x
        - (hx * py + y * hx * pyy) / (h * h) * j.eta
        + up_y;
    // second interior row, solved for u_x
    let u_x = y * hx / h * up_y + y * uy / h * eta_x - (y * hx * uy / (h * h) - 2.0 * pyy / h.powu(3)) * j.eta
        - j.phi_yy / (h * h);
    // u = (Mυ + λφ + Pφ_y)/D differentiated in x, solved for υ_x
    let md_x = (m_x * dd - m * dd_x) / (dd * dd);
    let inv_x = -dd_x / (dd * dd);
    let pd_x = (p_x * dd - p * dd_x) / (dd * dd);
    let ups_x = (u_x - md_x * j.ups - lambda * inv_x * j.phi - lambda / dd * phi_x - pd_x * j.phi_y - p / dd * phi_xy)
        * dd
        / m;
    [phi_x, ups_x, eta_x]
}

/// `L(λ)u` at a point, from the same jet.
pub fn l_point(mu0: f64, lambda: C64, jet: &PointJet) -> [C64; 3] {
    [
        lambda * jet.phi + mu0 * jet.ups,
        -(jet.phi_yy + lambda * lambda * jet.phi + mu0 * lambda * jet.ups) / mu0,
        lambda * jet.eta - jet.phi_y1,
    ]
}

/// Taylor coefficient of `δ^m ε^n` in `G(iσ+δ, ε)u − L(iσ)u` at a point,
/// by a two-dimensional DFT on circles of radius `radius`.
pub fn b_taylor_point(
    se: &StokesExpansion,
    order: BOrder,
    sigma: f64,
    x: f64,
    y: f64,
    jet: &PointJet,
    radius: f64,
    nodes: usize,
) -> [C64; 3] {
    let mut acc = [C64::new(0.0, 0.0); 3];
    let base = l_point(se.mu[0], I * sigma, jet);
    let sp = StokesPoint::new(se, x, y);
    let tau = 2.0 * std::f64::consts::PI / nodes as f64;
    for a in 0..nodes {
        let da = C64::from_polar(radius, tau * a as f64);
        for b in 0..nodes {
            let eb = C64::from_polar(radius, tau * b as f64);
            let g = linearized_rhs_point(&sp, I * sigma + da, eb, jet);
            let w = da.powu(order.m).inv() * eb.powu(order.n).inv() / (nodes * nodes) as f64;
            for c in 0..3 {
                acc[c] += (g[c] - base[c]) * w;
            }
        }
    }
    acc
}
