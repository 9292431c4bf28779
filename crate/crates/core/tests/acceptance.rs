//! Acceptance suite: one PASS/FAIL line per check, grouped by criterion.
//! Run with `cargo test --test acceptance` (add `--release` for timings that
//! reflect an optimized build).
//!
//! A check listed in `KNOWN_DEVIATIONS` prints FAIL but does not fail the
//! process; if such a check starts passing the process fails so the list is
//! kept honest.

use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use wavestab::dispersion::{resonance_sigma, Resonance, WaveParams};
use wavestab::eigensystem::{adjoint_eigen_residual, eigen_residual, modes_at, modes_on};
use wavestab::funcspace::{
    gauss_legendre01, inner, quad_oracle_inner, FrequencyVector, Lattice, StateVec, TermFunction,
};
use wavestab::indices::{
    bubble_coefficients, bubble_evans_residual, bubble_spectrum, f2_from_entries, f2_identity_literal, find_kappa1,
    find_kappa2, ind2_mu0_variant, resonance3_stability_check, series_at_resonance, series_at_zero,
    variant_sign_change,
};
use wavestab::monodromy::{a_closed, evans_value, series_for, ClosedRegime, ORDERS};
use wavestab::reduction::ReductionContext;
use wavestab::stokes::{build_stokes, stokes_residual, CollocationGrid};

const KAPPA1: f64 = 1.362782756726421;
const KAPPA1_TOL: f64 = 1e-9;
const MU0_AT_KAPPA1: f64 = 1.553848798953821;
const F_AT_KAPPA1: f64 = 0.802223946850146;
const MU0_F_TOL: f64 = 1e-8;
const KAPPA1_TIME: Duration = Duration::from_secs(1);

const KAPPA2: f64 = 1.849404083750;
const KAPPA2_TOL: f64 = 1e-5;
const KAPPA2_TIME: Duration = Duration::from_secs(300);

const F2_KAPPAS: [f64; 6] = [0.8, 1.0, 1.2, 1.362783, 1.5, 2.0];
const F2_REL: f64 = 1e-7;

const CLOSED_REL: f64 = 1e-8;

const RES_A01_TOL: f64 = 1e-10;
const RES3_OFFDIAG_TOL: f64 = 1e-9;
/// Off-resonant entries must exceed this to count as nonzero.
const NONZERO_FLOOR: f64 = 1e-6;

const STOKES_TOL: f64 = 1e-9;

const EIGEN_TOL: f64 = 1e-10;

const BUBBLE_KAPPA: f64 = 1.5;
const BUBBLE_EPS: f64 = 0.001;
const BUBBLE_REL: f64 = 1e-8;

const KAPPA_LOWER: f64 = 0.86430;
const KAPPA_UPPER: f64 = 1.00804;
const VARIANT_TOL: f64 = 5e-4;

const SYMMETRY_TOL: f64 = 1e-10;
/// At a leading-order bubble root, `|Δ|` relative to the size of its `ε⁴`
/// terms is `O(ε²)`; this bounds the constant.
const TRUNCATION_C: f64 = 10.0;
/// `Δ(0, Kκ; ε)` relative to `|Δ(ε, 0; ε)|`.
const TRANSLATION_TOL: f64 = 1e-10;

/// Checks that fail for a documented reason (see the decisions ledger).
const KNOWN_DEVIATIONS: [(&str, &str); 1] = [(
    "3/literal",
    "the literal f2 identity has the opposite sign to f2 assembled from the entries",
)];

struct Check {
    id: String,
    pass: bool,
    detail: String,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn check(&mut self, id: impl Into<String>, pass: bool, detail: impl Into<String>) {
        let c = Check { id: id.into(), pass, detail: detail.into() };
        println!("{} [{}] {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.detail);
        self.checks.push(c);
    }

    fn error(&mut self, id: impl Into<String>, e: impl std::fmt::Display) {
        self.check(id, false, format!("error: {e}"));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn wp(kappa: f64) -> WaveParams {
    WaveParams::new(kappa).expect("valid kappa")
}

fn criterion1(s: &mut Suite) {
    let t0 = Instant::now();
    match find_kappa1() {
        Ok(k) => {
            let dt = t0.elapsed();
            let w = wp(k);
            let f = 1.0 / w.mu0.sqrt();
            s.check("1/kappa1", (k - KAPPA1).abs() <= KAPPA1_TOL, format!("kappa1 = {k:.15} (|err| {:.2e})", (k - KAPPA1).abs()));
            s.check("1/mu0", (w.mu0 - MU0_AT_KAPPA1).abs() <= MU0_F_TOL, format!("mu0 = {:.15} (|err| {:.2e})", w.mu0, (w.mu0 - MU0_AT_KAPPA1).abs()));
            s.check("1/F", (f - F_AT_KAPPA1).abs() <= MU0_F_TOL, format!("F = {f:.15} (|err| {:.2e})", (f - F_AT_KAPPA1).abs()));
            s.check("1/time", dt < KAPPA1_TIME, format!("{dt:?} < {KAPPA1_TIME:?}"));
        }
        Err(e) => s.error("1/kappa1", e),
    }
}

fn criterion2(s: &mut Suite) {
    let t0 = Instant::now();
    match find_kappa2() {
        Ok(k) => {
            let dt = t0.elapsed();
            s.check(
                "2/kappa2",
                (k.kappa2 - KAPPA2).abs() <= KAPPA2_TOL,
                format!("kappa2 = {:.12} (|err| {:.2e})", k.kappa2, (k.kappa2 - KAPPA2).abs()),
            );
            s.check(
                "2/second-witness",
                (k.kappa2_second_witness - KAPPA2).abs() <= KAPPA2_TOL,
                format!("second witness root = {:.12}", k.kappa2_second_witness),
            );
            s.check("2/time", dt < KAPPA2_TIME, format!("{dt:?} < {KAPPA2_TIME:?}"));
        }
        Err(e) => s.error("2/kappa2", e),
    }
}

fn criterion3(s: &mut Suite) {
    let mut worst_lit = 0.0f64;
    let mut worst_neg = 0.0f64;
    for &k in &F2_KAPPAS {
        let w = wp(k);
        let f2 = match series_at_zero(&w, true).and_then(|ms| f2_from_entries(&ms)) {
            Ok(v) => v,
            Err(e) => return s.error("3/literal", e),
        };
        let id = f2_identity_literal(&w);
        let lit = (f2 - id).norm() / id.norm();
        let neg = (f2 + id).norm() / id.norm();
        println!("     kappa {k}: f2 = {f2:.10e}, identity = {id:.10e}");
        worst_lit = worst_lit.max(lit);
        worst_neg = worst_neg.max(neg);
    }
    s.check("3/literal", worst_lit <= F2_REL, format!("max relative error {worst_lit:.3e} (tol {F2_REL:.0e})"));
    s.check(
        "3/sign-corrected",
        worst_neg <= F2_REL,
        format!("with the identity negated: max relative error {worst_neg:.3e} (tol {F2_REL:.0e})"),
    );
}

/// Printed entries of `a^(m,n)(T)` against the pipeline. Printed zeros are
/// compared against the largest closed-form entry of the same matrix.
fn compare_closed(s: &mut Suite, id: &str, w: &WaveParams, ctx: ReductionContext, regime: ClosedRegime, orders: &[(u32, u32)]) {
    let ms = match series_for(ctx, orders, false) {
        Ok(m) => m,
        Err(e) => return s.error(id, e),
    };
    let mut worst = 0.0f64;
    let mut count = 0;
    for &(m, n) in orders {
        let Ok(cm) = a_closed(w, regime, m, n) else { continue };
        let pipe = ms.a(m, n).expect("order in series");
        let scale = cm.entries.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..cm.n {
            for j in 0..cm.n {
                if let Ok(v) = cm.get(i, j) {
                    let denom = if v.norm() > 0.0 { v.norm() } else { scale.max(1e-300) };
                    worst = worst.max((pipe.get(i, j) - v).norm() / denom);
                    count += 1;
                }
            }
        }
    }
    s.check(id, worst <= CLOSED_REL && count > 0, format!("{count} closed-form entries, max relative error {worst:.3e}"));
}

fn criterion4(s: &mut Suite) {
    for k in [1.0, 1.5] {
        let w = wp(k);
        match ReductionContext::new(&w, 0.0) {
            Ok(ctx) => compare_closed(s, &format!("4/sigma0/kappa={k}"), &w, ctx, ClosedRegime::Zero, &ORDERS),
            Err(e) => s.error(format!("4/sigma0/kappa={k}"), e),
        }
        for n in [2, 3] {
            let id = format!("4/res{n}/kappa={k}");
            match (ReductionContext::at_resonance(&w, n), resonance_sigma(&w, n)) {
                (Ok(ctx), Ok(r)) => compare_closed(s, &id, &w, ctx, ClosedRegime::Resonant(r), &[(1, 0)]),
                (Err(e), _) | (_, Err(e)) => s.error(id, e),
            }
        }
    }
}

fn criterion5(s: &mut Suite) {
    let w = wp(1.5);
    match series_at_resonance(&w, 2, false).and_then(|ms| Ok(ms.a(0, 1)?.max_abs())) {
        Ok(v) => s.check("5/a01-at-sigma2", v < RES_A01_TOL, format!("max |a^(0,1)(T)| = {v:.3e} at kappa 1.5")),
        Err(e) => s.error("5/a01-at-sigma2", e),
    }
    match resonance3_stability_check(&wp(1.0)) {
        Ok(r) => s.check(
            "5/a02-offdiag-at-sigma3",
            r.max_offdiag < RES3_OFFDIAG_TOL,
            format!("max off-diagonal {:.3e}, max diagonal {:.3e} at kappa 1", r.max_offdiag, r.max_diag),
        ),
        Err(e) => s.error("5/a02-offdiag-at-sigma3", e),
    }
    let off = (|| {
        let r2 = resonance_sigma(&w, 2)?;
        let r3 = resonance_sigma(&w, 3)?;
        let sigma = 0.5 * (r2.sigma_n + r3.sigma_n);
        let ms = series_for(ReductionContext::new(&w, sigma)?, &[(0, 1)], false)?;
        let a = ms.a(0, 1)?;
        Ok::<_, wavestab::Error>((sigma, a.get(0, 1).norm(), a.get(1, 0).norm()))
    })();
    match off {
        Ok((sigma, a12, a21)) => s.check(
            "5/a01-off-resonance",
            a12 > NONZERO_FLOOR && a21 > NONZERO_FLOOR,
            format!("sigma {sigma:.6}: |a12| = {a12:.3e}, |a21| = {a21:.3e}"),
        ),
        Err(e) => s.error("5/a01-off-resonance", e),
    }
}

fn criterion6(s: &mut Suite) {
    let g = CollocationGrid::default();
    let mut worst = (0.0f64, 0.0, 0);
    for i in 0..=20 {
        let k = 0.5 + 0.1 * i as f64;
        let se = match build_stokes(&wp(k)) {
            Ok(se) => se,
            Err(e) => return s.error("6/stokes", e),
        };
        for n in 1..=3 {
            match stokes_residual(&se, n, &g) {
                Ok(r) if r > worst.0 => worst = (r, k, n),
                Ok(_) => {}
                Err(e) => return s.error("6/stokes", e),
            }
        }
    }
    s.check(
        "6/stokes",
        worst.0 < STOKES_TOL,
        format!("max residual {:.3e} (kappa {:.1}, order {}) over kappa in [0.5, 2.5]", worst.0, worst.1, worst.2),
    );
}

fn criterion7(s: &mut Suite) {
    for k in [0.8, 1.0, 1.5] {
        let w = wp(k);
        let mut sigmas = vec![("0".to_string(), None)];
        for n in [2, 3] {
            match resonance_sigma(&w, n) {
                Ok(r) => sigmas.push((format!("sigma{n}"), Some(r))),
                Err(e) => s.error(format!("7/kappa={k}/sigma{n}"), e),
            }
        }
        for (name, r) in sigmas {
            let id = format!("7/kappa={k}/{name}");
            let pr = match r {
                None => modes_at(&w, 0.0),
                Some(Resonance { sigma_n, k4, order, .. }) => modes_on(&w, sigma_n, Lattice::resonant(k, k4, order)),
            };
            // At resonance the generic lattice must pass as well.
            let res = pr.and_then(|pr| {
                let b = pr.biorthogonality_error()?;
                let mut e = 0.0f64;
                for m in &pr.modes {
                    e = e.max(eigen_residual(&pr, m.j)?).max(adjoint_eigen_residual(&pr, m.j)?);
                }
                let b2 = match r {
                    Some(r) => modes_at(&w, r.sigma_n)?.biorthogonality_error()?,
                    None => 0.0,
                };
                Ok((b.max(b2), e, pr.modes.len()))
            });
            match res {
                Ok((b, e, dim)) => s.check(
                    id,
                    b < EIGEN_TOL && e < EIGEN_TOL,
                    format!("{dim} modes: biorthogonality {b:.3e}, eigen residual {e:.3e}"),
                ),
                Err(e) => s.error(id, e),
            }
        }
    }
}

fn criterion8(s: &mut Suite) {
    let w = wp(BUBBLE_KAPPA);
    let out = (|| {
        let ms = series_at_resonance(&w, 2, true)?;
        let bc = bubble_coefficients(&ms)?;
        let b = bubble_spectrum(&bc, BUBBLE_EPS, 401)?;
        Ok::<_, wavestab::Error>((ms, bc, b))
    })();
    let (ms, bc, b) = match out {
        Ok(v) => v,
        Err(e) => return s.error("8/bubble", e),
    };
    let e2 = BUBBLE_EPS * BUBBLE_EPS;
    let Some((lo, hi)) = b.interval else {
        return s.check("8/bubble", false, "empty bubble");
    };
    let want_max = bc.ind2.sqrt() * e2;
    s.check(
        "8/max-re",
        rel(b.max_re, want_max) <= BUBBLE_REL,
        format!("max Re delta = {:.15e}, sqrt(ind2) eps^2 = {want_max:.15e}", b.max_re),
    );
    let arg = b.points.iter().max_by(|p, q| p.delta.re.total_cmp(&q.delta.re)).expect("points");
    let want_gamma = -bc.alpha12 / (2.0 * bc.alpha20) * e2;
    s.check(
        "8/gamma-star",
        rel(arg.gamma, want_gamma) <= BUBBLE_REL,
        format!("argmax gamma = {:.15e}, -alpha12/(2 alpha20) eps^2 = {want_gamma:.15e}", arg.gamma),
    );
    let ends: Vec<f64> =
        b.points.iter().filter(|p| p.gamma == lo || p.gamma == hi).map(|p| p.delta.re.abs()).collect();
    let worst_end = ends.iter().copied().fold(0.0, f64::max);
    s.check(
        "8/endpoints",
        ends.len() == 4 && worst_end <= BUBBLE_REL * b.max_re,
        format!("{} endpoint samples, max |Re delta| = {worst_end:.3e}", ends.len()),
    );
    s.check("8/alpha20-negative", bc.alpha20 < 0.0, format!("alpha20 = {:.6e}", bc.alpha20));
    for eps in [BUBBLE_EPS, 0.1 * BUBBLE_EPS] {
        let id = format!("8/evans-root/eps={eps}");
        let g = bc.gamma_star_unit * eps * eps;
        match bubble_evans_residual(&ms, &bc, g, eps) {
            Ok(r) => s.check(
                id,
                r <= TRUNCATION_C * eps * eps,
                format!("relative |Delta| at the bubble top {r:.3e} = {:.3} eps^2", r / (eps * eps)),
            ),
            Err(e) => s.error(id, e),
        }
    }
}

fn criterion9(s: &mut Suite) {
    match ind2_mu0_variant(&wp(0.95)) {
        Ok(v) => s.check("9/positive-inside", v > 0.0, format!("variant(0.95) = {v:.6e}")),
        Err(e) => s.error("9/positive-inside", e),
    }
    for (id, a, b, want) in [("9/lower", 0.8, 0.95, KAPPA_LOWER), ("9/upper", 0.95, 1.1, KAPPA_UPPER)] {
        match variant_sign_change(a, b, 1e-7) {
            Ok(k) => s.check(id, (k - want).abs() <= VARIANT_TOL, format!("sign change at {k:.6} (|err| {:.2e})", (k - want).abs())),
            Err(e) => s.error(id, e),
        }
    }
}

/// Deterministic sample functions on a lattice with all rates present.
fn samples(lat: &Lattice) -> Vec<StateVec> {
    let fk = |n: i32| FrequencyVector::kappa(n);
    let mut out = Vec::new();
    for t in 0..4 {
        let c = C64::new(0.3 + 0.2 * t as f64, -0.1 * t as f64);
        let phi = &TermFunction::cosh_y(c, FrequencyVector::K2, t % 2) + &TermFunction::poly_y(C64::new(0.5, 0.25), 2);
        let ups = TermFunction::sinh_y(C64::new(-0.4, 0.1 * t as f64), fk(1), 1);
        let eta = TermFunction::constant(C64::new(0.0, 1.0 - 0.3 * t as f64));
        out.push(StateVec::new(phi, ups, eta).canonicalized(lat));
    }
    out
}

fn criterion10(s: &mut Suite) {
    // Closure under products and exact y-integration against quadrature.
    let lat = Lattice::new(1.3, 2.1, 0.4);
    let fs = samples(&lat);
    let mut worst = 0.0f64;
    for a in &fs {
        for b in &fs {
            let exact = inner(&lat, a, b);
            let quad = quad_oracle_inner(&lat, a, b, 48);
            match exact {
                Ok(v) => worst = worst.max((v - quad).norm() / quad.norm().max(1.0)),
                Err(e) => return s.error("10/funcspace", e),
            }
        }
    }
    let mut int_err = 0.0f64;
    for f in &fs {
        let g = &f.phi * &f.upsilon;
        let exact = g.integrate_y01(&lat).expect("x-free profile");
        let quad: C64 = gauss_legendre01(48).iter().map(|&(y, wt)| g.eval(&lat, 0.0, y) * wt).sum();
        int_err = int_err.max((exact - quad).norm() / quad.norm().max(1.0));
    }
    s.check(
        "10/funcspace",
        worst < 1e-12 && int_err < 1e-12,
        format!("inner product vs quadrature {worst:.3e}, y-integral vs quadrature {int_err:.3e}"),
    );

    // Roots at a bubble point come as δ and −δ*, and both zero the Evans function.
    let w = wp(BUBBLE_KAPPA);
    let sym = (|| {
        let ms = series_at_resonance(&w, 2, true)?;
        let bc = bubble_coefficients(&ms)?;
        let b = bubble_spectrum(&bc, BUBBLE_EPS, 41)?;
        let mut pair = 0.0f64;
        let mut evans = 0.0f64;
        for p in b.points.iter().take(b.points.len() / 2) {
            let roots = bc.delta(p.gamma, BUBBLE_EPS);
            for d in roots {
                let image = -d.conj();
                let miss = roots.iter().map(|r| (r - image).norm()).fold(f64::INFINITY, f64::min);
                pair = pair.max(miss / d.norm());
            }
            evans = evans.max(bubble_evans_residual(&ms, &bc, p.gamma, BUBBLE_EPS)?);
        }
        Ok::<_, wavestab::Error>((pair, evans))
    })();
    match sym {
        Ok((pair, evans)) => s.check(
            "10/evans-symmetry",
            pair < SYMMETRY_TOL && evans <= TRUNCATION_C * BUBBLE_EPS * BUBBLE_EPS,
            format!("root set closed under delta -> -conj(delta) to {pair:.3e}, relative |Delta| = {evans:.3e}"),
        ),
        Err(e) => s.error("10/evans-symmetry", e),
    }

    // Δ(0, Kκ; ε) = 0 for integer K, against the ε⁴ scale of Δ(ε, 0; ε).
    let tr = (|| {
        let mut worst = 0.0f64;
        for k in [0.8, 1.0, 1.5, 2.0] {
            let w = wp(k);
            let ms = series_at_zero(&w, true)?;
            for eps in [1e-2, 1e-3] {
                let scale = evans_value(&ms, C64::new(eps, 0.0), 0.0, eps)?.norm();
                for kk in -2..=2 {
                    let d = evans_value(&ms, C64::new(0.0, 0.0), kk as f64 * k, eps)?;
                    worst = worst.max(d.norm() / scale);
                }
            }
        }
        Ok::<_, wavestab::Error>(worst)
    })();
    match tr {
        Ok(v) => s.check("10/translation", v < TRANSLATION_TOL, format!("max |Delta(0, K kappa; eps)| / |Delta(eps, 0; eps)| = {v:.3e}")),
        Err(e) => s.error("10/translation", e),
    }
}

fn main() {
    let mut s = Suite { checks: Vec::new() };
    let t0 = Instant::now();
    let criteria: [(&str, fn(&mut Suite)); 10] = [
        ("kappa1 reproduction", criterion1),
        ("kappa2 reproduction", criterion2),
        ("f2 identity", criterion3),
        ("closed-form monodromy entries vs pipeline", criterion4),
        ("resonance structure", criterion5),
        ("Stokes residuals", criterion6),
        ("biorthogonality and eigen-residuals", criterion7),
        ("bubble reproduction", criterion8),
        ("index-variant window", criterion9),
        ("property suites", criterion10),
    ];
    for (i, (name, f)) in criteria.iter().enumerate() {
        println!("== criterion {}: {name}", i + 1);
        f(&mut s);
    }

    let known = |id: &str| KNOWN_DEVIATIONS.iter().find(|(k, _)| *k == id);
    let mut fatal = Vec::new();
    println!("== summary ({:?})", t0.elapsed());
    for c in &s.checks {
        match (c.pass, known(&c.id)) {
            (false, Some((_, why))) => println!("KNOWN [{}] {why}", c.id),
            (true, Some(_)) => {
                println!("STALE [{}] listed as a known deviation but passed", c.id);
                fatal.push(c.id.clone());
            }
            (false, None) => fatal.push(c.id.clone()),
            (true, None) => {}
        }
    }
    let passed = s.checks.iter().filter(|c| c.pass).count();
    println!("{passed}/{} checks passed", s.checks.len());
    if !fatal.is_empty() {
        println!("unexpected: {}", fatal.join(", "));
        std::process::exit(1);
    }
}
