//! Small-amplitude Stokes wave to third order.
//!
//! The closed forms are keyed in once and re-derived once by undetermined
//! coefficients; [`build_stokes`] refuses to return if the two disagree.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::bvp;
use crate::dispersion::WaveParams;
use crate::error::{Error, Result};
use crate::funcspace::{FrequencyVector, Lattice, TermFunction};

/// Relative agreement required between the closed forms and the re-derivation.
pub const CROSS_CHECK_TOL: f64 = 1e-10;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct StokesExpansion {
    pub wp: WaveParams,
    pub lat: Lattice,
    /// `φ̄₁, φ̄₂, φ̄₃`.
    pub phibar: [f64; 3],
    pub phi: [TermFunction; 3],
    pub eta: [TermFunction; 3],
    /// `μ₀..μ₃`. `μ` is even in `ε` (a half-period shift flips its sign), so
    /// the odd entries are zero.
    pub mu: [f64; 4],
    pub u: [TermFunction; 3],
}

fn k(n: i32) -> FrequencyVector {
    FrequencyVector::kappa(n)
}

/// `c·sin(nκx)·y^p·cosh(mκy)`.
fn sc(c: f64, n: i32, m: i32, p: u32) -> TermFunction {
    TermFunction::sin_x(c, k(n)) * TermFunction::cosh_y(1.0, k(m), p)
}

/// `c·sin(nκx)·y^p·sinh(mκy)`.
fn ss(c: f64, n: i32, m: i32, p: u32) -> TermFunction {
    TermFunction::sin_x(c, k(n)) * TermFunction::sinh_y(1.0, k(m), p)
}

fn first_order(wp: &WaveParams) -> (TermFunction, TermFunction) {
    (sc(1.0, 1, 1, 0), TermFunction::cos_x(wp.s, k(1)))
}

/// The expansion assembled from its closed forms.
pub fn closed_form_expansion(wp: &WaveParams) -> StokesExpansion {
    let (mu0, s, c) = (wp.mu0, wp.s, wp.c);
    let (s2, s4) = (s * s, s.powi(4));
    let s2k = (2.0 * wp.kappa).sinh();
    let (phi1, eta1) = first_order(wp);

    let phibar2 = mu0 * mu0 / 4.0 * wp.kappa.tanh().powi(2);
    let phi2 = sc(3.0 * mu0 / (8.0 * s * c), 2, 2, 0) + ss(mu0 * s2 / (2.0 * c), 2, 1, 1);
    let eta2 = TermFunction::cos_x(mu0 / 4.0 * (2.0 * s2 + 3.0), k(2));

    let m2 = mu0 * mu0;
    let phi3 = sc(-m2 * (4.0 * s2 - 9.0) / (16.0 * s2k * s2k), 3, 3, 0)
        + ss(3.0 * m2 * s / (8.0 * (s2 + 1.0)), 3, 2, 1)
        + ss(m2 * s * (2.0 * s2 + 3.0) / (8.0 * c), 3, 1, 1)
        + sc(m2 * s4 / (8.0 * (s2 + 1.0)), 3, 1, 2)
        + ss(3.0 * m2 * s / (8.0 * (s2 + 1.0)), 1, 2, 1)
        + ss(-m2 * s * (2.0 * s2 + 3.0) / (8.0 * c), 1, 1, 1)
        + sc(m2 * s4 / (8.0 * (s2 + 1.0)), 1, 1, 2);
    let eta3 = TermFunction::cos_x(
        m2 * (24.0 * s.powi(6) + 72.0 * s4 + 72.0 * s2 + 27.0) / (64.0 * (s.powi(3) + s)),
        k(3),
    ) + TermFunction::cos_x(m2 * s * (5.0 * s4 + 13.0 * s2 + 6.0) / (8.0 * (s2 + 1.0)), k(1));
    let mu2 = -mu0.powi(3) * (8.0 * s4 + 12.0 * s2 + 9.0) / (8.0 * (s2 + 1.0));

    assemble(wp, [0.0, phibar2, 0.0], [phi1, phi2, phi3], [eta1, eta2, eta3], [mu0, 0.0, mu2, 0.0])
}

fn assemble(
    wp: &WaveParams,
    phibar: [f64; 3],
    phi: [TermFunction; 3],
    eta: [TermFunction; 3],
    mu: [f64; 4],
) -> StokesExpansion {
    let lat = Lattice::kappa_only(wp.kappa);
    let u = velocities(&lat, &phibar, &phi, &eta);
    StokesExpansion { wp: *wp, lat, phibar, phi, eta, mu, u }
}

/// `u = φ_x − yη_x φ_y/(1+η)` expanded to third order.
fn velocities(lat: &Lattice, phibar: &[f64; 3], phi: &[TermFunction; 3], eta: &[TermFunction; 3]) -> [TermFunction; 3] {
    let d = |f: &TermFunction| f.dx(lat);
    let e1x = d(&eta[0]);
    let u1 = d(&phi[0]) + TermFunction::constant(phibar[0]);
    let u2 = d(&phi[1]) + TermFunction::constant(phibar[1]) - (&e1x * &phi[0].dy(lat)).times_y();
    let slope2 = &d(&eta[1]) - &(&eta[0] * &e1x);
    let u3 = d(&phi[2]) + TermFunction::constant(phibar[2])
        - (&(&e1x * &phi[1].dy(lat)) + &(&slope2 * &phi[0].dy(lat))).times_y();
    [u1, u2, u3]
}

/// Right sides of the order-`n` system: interior, kinematic and dynamic, the
/// boundary ones already restricted to `y = 1`. The dynamic side includes
/// `μ_{n−1}η₁` with the given `mu_prev`.
fn order_rhs(se_lat: &Lattice, phibar: &[f64; 3], phi: &[TermFunction; 3], eta: &[TermFunction; 3], n: usize, mu_prev: f64)
    -> (TermFunction, TermFunction, TermFunction)
{
    let lat = se_lat;
    let dx = |f: &TermFunction| f.dx(lat);
    let dy = |f: &TermFunction| f.dy(lat);
    let top = |f: &TermFunction| f.at_y(lat, 1.0);
    let (p1, e1) = (&phi[0], &eta[0]);
    let (p1x, p1y) = (dx(p1), dy(p1));
    let (p1xy, p1yy) = (dx(&p1y), dy(&p1y));
    let (e1x, e1xx) = (dx(e1), dx(&dx(e1)));
    match n {
        1 => (TermFunction::zero(), TermFunction::zero(), TermFunction::zero()),
        2 => {
            let r = &(&(e1 * &p1yy).scale(2.0) + &(&e1xx * &p1y).times_y()) + &(&e1x * &p1xy).times_y().scale(2.0);
            let kin = &(&e1x * &top(&p1x)) + &(e1 * &top(&p1y));
            let (tx, ty) = (top(&p1x), top(&p1y));
            let dyn_ = &(&(&e1x * &ty) + &(&(&tx * &tx) + &(&ty * &ty)).scale(0.5)) + &e1.scale(mu_prev);
            (r, kin, dyn_)
        }
        3 => {
            let (p2, e2) = (&phi[1], &eta[1]);
            let (p2x, p2y) = (dx(p2), dy(p2));
            let (p2xy, p2yy) = (dx(&p2y), dy(&p2y));
            let (e2x, e2xx) = (dx(e2), dx(&dx(e2)));
            let e1sq = e1 * e1;
            let e1xsq = &e1x * &e1x;
            let slope2 = &e2x - &(e1 * &e1x);
            let r = (&e1x * &p2xy).times_y().scale(2.0)
                + (e1 * &p2yy).scale(2.0)
                + (&e1xx * &p2y).times_y()
                + (&slope2 * &p1xy).times_y().scale(2.0)
                + &(&(&e2.scale(2.0) - &e1sq.scale(3.0)) - &e1xsq.times_y().times_y()) * &p1yy
                + (&(&(&e2xx - &e1xsq.scale(2.0)) - &(e1 * &e1xx)) * &p1y).times_y();
            let (t1x, t1y, t2x, t2y) = (top(&p1x), top(&p1y), top(&p2x), top(&p2y));
            let t2xb = &t2x + &TermFunction::constant(phibar[1]);
            let kin = &e1x * &t2xb
                + e1 * &t2y
                + &e2x * &t1x
                + &(&(e2 - &e1xsq) - &e1sq) * &t1y;
            let dyn_ = &t1x * &t2xb + &e1x * &t2y + &t1y * &(&t2y + &e2x)
                - &(&(e1 * &e1x) + &(&t1x * &e1x)) * &t1y
                - e1 * &(&t1y * &t1y)
                + e1.scale(mu_prev);
            (r, kin, dyn_)
        }
        _ => unreachable!("orders above 3 are not carried"),
    }
}

/// Residual functions of the order-`n` system as
/// `(interior, bottom, kinematic, dynamic)`.
pub fn order_residuals(se: &StokesExpansion, n: usize) -> Result<[TermFunction; 4]> {
    if !(1..=3).contains(&n) {
        return Err(Error::Domain(format!("order must be 1..3, got {n}")));
    }
    let lat = &se.lat;
    let (r, kin, dyn_) = order_rhs(lat, &se.phibar, &se.phi, &se.eta, n, se.mu[n - 1]);
    let p = &se.phi[n - 1];
    let e = &se.eta[n - 1];
    let lap = &p.dx(lat).dx(lat) + &p.dy(lat).dy(lat);
    let interior = &lap - &r;
    let bottom = p.dy(lat).at_y(lat, 0.0);
    let kinematic = &(&e.dx(lat) + &p.dy(lat).at_y(lat, 1.0)) - &kin;
    let dynamic = &(&(&TermFunction::constant(se.phibar[n - 1]) + &p.dx(lat).at_y(lat, 1.0)) - &e.scale(se.mu[0])) - &dyn_;
    Ok([interior, bottom, kinematic, dynamic])
}

/// Collocation grid for residual checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CollocationGrid {
    /// Chebyshev–Lobatto points in `y ∈ [0, 1]`.
    pub ny: usize,
    /// Equispaced points over one period in `x`.
    pub nx: usize,
}

impl Default for CollocationGrid {
    fn default() -> Self {
        Self { ny: 16, nx: 24 }
    }
}

impl CollocationGrid {
    pub fn y_nodes(&self) -> Vec<f64> {
        let m = (self.ny.max(2) - 1) as f64;
        (0..self.ny.max(2)).map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / m).cos())).collect()
    }

    pub fn x_nodes(&self, period: f64) -> Vec<f64> {
        (0..self.nx).map(|i| period * i as f64 / self.nx as f64).collect()
    }
}

/// Max absolute residual of the order-`order` equations on `grid`.
pub fn stokes_residual(se: &StokesExpansion, order: usize, grid: &CollocationGrid) -> Result<f64> {
    let res = order_residuals(se, order)?;
    let xs = grid.x_nodes(se.wp.period);
    let ys = grid.y_nodes();
    let mut worst = 0.0f64;
    for &x in &xs {
        for &y in &ys {
            worst = worst.max(res[0].eval(&se.lat, x, y).norm());
        }
        for r in &res[1..] {
            worst = worst.max(r.eval(&se.lat, x, 0.0).norm());
        }
    }
    Ok(worst)
}

/// Solves the order-`n` system given lower orders, with normalization: no
/// `sin(κx)cosh(κy)` component beyond first order, and zero-mean `η_n`.
/// Returns `(φ̄_n, φ_n, η_n, μ_{n−1})`.
fn solve_order(
    wp: &WaveParams,
    lat: &Lattice,
    phibar: &[f64; 3],
    phi: &[TermFunction; 3],
    eta: &[TermFunction; 3],
    n: usize,
) -> Result<(f64, TermFunction, TermFunction, f64)> {
    let (r, kin, dyn0) = order_rhs(lat, phibar, phi, eta, n, 0.0);
    let (r_m, k_m, d_m) = (r.split_x(), kin.split_x(), dyn0.split_x());
    let e1_m = eta[0].split_x();
    let mu0 = wp.mu0;
    let mut modes: Vec<i32> = r_m.keys().chain(k_m.keys()).chain(d_m.keys()).map(|(f, q)| {
        debug_assert_eq!(*q, 0);
        f.n_kappa
    }).collect();
    modes.push(1);
    modes.push(-1);
    modes.sort_unstable();
    modes.dedup();
    let get = |m: &std::collections::BTreeMap<(FrequencyVector, u32), TermFunction>, j: i32| -> C64 {
        m.get(&(k(j), 0)).map(|f| f.coeff(&crate::funcspace::TermKey::ONE)).unwrap_or_default()
    };
    let get_f = |j: i32| r_m.get(&(k(j), 0)).cloned().unwrap_or_default();

    // Solvability on the ±κ modes fixes μ_{n−1}.
    let mut base = std::collections::BTreeMap::new();
    let mut mu_est = Vec::new();
    for &m in &modes {
        let w = k(m);
        let om2 = lat.value(w).powi(2);
        let phi_p = bvp::neumann_at_bottom(lat, w, &bvp::particular(lat, w, &get_f(m))?);
        let bop = |f: &TermFunction| {
            bvp::value_at(lat, &f.dy(lat), 1.0) - bvp::value_at(lat, f, 1.0) * (om2 / mu0)
        };
        let imk = I * lat.value(w);
        if m.abs() == 1 {
            let e1 = get(&e1_m, m);
            // Φ'(1) − (κ²/μ₀)Φ(1) = K + iκ(D + μη₁)/μ₀ with C = 0.
            let rhs0 = get(&k_m, m) + imk * get(&d_m, m) / mu0;
            mu_est.push((bop(&phi_p) - rhs0) * mu0 / (imk * e1));
        }
        base.insert(m, phi_p);
    }
    let mu_prev = mu_est.iter().map(|v| v.re).sum::<f64>() / mu_est.len() as f64;
    for v in &mu_est {
        if (v - mu_prev).norm() > CROSS_CHECK_TOL * (1.0 + mu_prev.abs()) || v.im.abs() > CROSS_CHECK_TOL * (1.0 + mu_prev.abs()) {
            return Err(Error::Consistency(format!("order {n}: solvability conditions disagree ({mu_est:?})")));
        }
    }

    let mut phi_n = TermFunction::zero();
    let mut eta_n = TermFunction::zero();
    let mut phibar_n = 0.0;
    for &m in &modes {
        let w = k(m);
        let mut prof = base[&m].clone();
        let dm = get(&d_m, m) + mu_prev * get(&e1_m, m);
        if m == 0 {
            if prof.max_coeff() > 1e-12 || get(&k_m, 0).norm() > 1e-12 {
                return Err(Error::Consistency(format!("order {n}: nonzero mean forcing")));
            }
            phibar_n = dm.re;
            continue;
        }
        let om2 = lat.value(w).powi(2);
        let bop = |f: &TermFunction| {
            bvp::value_at(lat, &f.dy(lat), 1.0) - bvp::value_at(lat, f, 1.0) * (om2 / mu0)
        };
        let imk = I * lat.value(w);
        if m.abs() != 1 {
            let (hc, _) = bvp::homogeneous(w);
            let target = get(&k_m, m) + imk * dm / mu0;
            let c = (target - bop(&prof)) / bop(&hc);
            prof = &prof + &hc.scale(c);
        }
        let eta_c = (imk * bvp::value_at(lat, &prof, 1.0) - dm) / mu0;
        phi_n = &phi_n + &prof.with_x(w, 0);
        eta_n = &eta_n + &TermFunction::exp_x(eta_c, w);
    }
    Ok((phibar_n, phi_n, eta_n, mu_prev))
}

/// The expansion re-derived order by order from the first-order solution.
pub fn derived(wp: &WaveParams) -> Result<StokesExpansion> {
    let lat = Lattice::kappa_only(wp.kappa);
    let (phi1, eta1) = first_order(wp);
    let mut phibar = [0.0; 3];
    let mut phi = [phi1, TermFunction::zero(), TermFunction::zero()];
    let mut eta = [eta1, TermFunction::zero(), TermFunction::zero()];
    let mut mu = [wp.mu0, 0.0, 0.0, 0.0];
    for n in 2..=3 {
        let (pb, p, e, m) = solve_order(wp, &lat, &phibar, &phi, &eta, n)?;
        phibar[n - 1] = pb;
        phi[n - 1] = p;
        eta[n - 1] = e;
        mu[n - 1] = m;
    }
    Ok(assemble(wp, phibar, phi, eta, mu))
}

/// Largest coefficient difference relative to the larger of the two sizes.
fn rel_diff(a: &TermFunction, b: &TermFunction) -> f64 {
    (a - b).max_coeff() / a.max_coeff().max(b.max_coeff()).max(1.0)
}

/// Largest relative discrepancy between two expansions over all fields.
pub fn discrepancy(a: &StokesExpansion, b: &StokesExpansion) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        worst = worst.max(rel_diff(&a.phi[i], &b.phi[i]));
        worst = worst.max(rel_diff(&a.eta[i], &b.eta[i]));
        worst = worst.max((a.phibar[i] - b.phibar[i]).abs() / a.phibar[i].abs().max(1.0));
    }
    for i in 0..4 {
        worst = worst.max((a.mu[i] - b.mu[i]).abs() / a.mu[i].abs().max(1.0));
    }
    worst
}

/// The closed-form expansion, verified against the re-derivation.
pub fn build_stokes(wp: &WaveParams) -> Result<StokesExpansion> {
    let t = closed_form_expansion(wp);
    let d = derived(wp)?;
    let gap = discrepancy(&t, &d);
    if !(gap <= CROSS_CHECK_TOL) {
        return Err(Error::Consistency(format!(
            "Stokes coefficients disagree with re-derivation at kappa={} (relative {gap:.3e})",
            wp.kappa
        )));
    }
    Ok(t)
}

/// Pointwise wave quantities from the truncated expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WavePoint {
    pub phi: f64,
    pub u: f64,
    pub eta: f64,
    pub mu: f64,
}

/// `(φ, u, η, μ)` at `(x, y)` including the secular `φ̄ᵢ x` terms. The
/// expansion is only meaningful for small `|ε|` (about 0.1 or less).
pub fn eval_wave(se: &StokesExpansion, eps: f64, x: f64, y: f64) -> WavePoint {
    let mut out = WavePoint { phi: 0.0, u: 0.0, eta: 0.0, mu: se.mu[0] };
    let mut e = 1.0;
    for i in 0..3 {
        e *= eps;
        out.phi += e * (se.phibar[i] * x + se.phi[i].eval(&se.lat, x, y).re);
        out.u += e * se.u[i].eval(&se.lat, x, y).re;
        out.eta += e * se.eta[i].eval(&se.lat, x, 0.0).re;
    }
    out.mu += se.mu[1] * eps + se.mu[2] * eps * eps + se.mu[3] * eps.powi(3);
    out
}
