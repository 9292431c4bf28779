//! Instability indices: the Benjamin–Feir index near the origin and the
//! bubble index at the second resonance, with the coefficients behind them.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dispersion::{sigma_branches, Resonance, WaveParams};
use crate::error::{Error, Result};
use crate::monodromy::{build_series, evans_value, series_for, MonodromySeries};
use crate::reduction::ReductionContext;
use crate::roots::bisect_newton;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Relative agreement demanded of the two routes to `f₂`.
pub const F2_TOL: f64 = 1e-7;
/// Bracket searched for `κ₁`.
pub const KAPPA1_BRACKET: (f64, f64) = (1.0, 2.0);
/// Bracket searched for `κ₂`.
pub const KAPPA2_BRACKET: (f64, f64) = (1.5, 2.2);
/// Final bracket width for `κ₂`.
pub const KAPPA2_WIDTH: f64 = 1e-10;

/// `ind₁(κ)`.
pub fn ind1(kappa: f64) -> f64 {
    let ch = (2.0 * kappa).cosh();
    let sh = (2.0 * kappa).sinh();
    let k = kappa;
    8.0 * ch + 24.0 * k * sh + 2.0 * k * (4.0 * k).sinh() + 19.0 * ch * ch
        - 8.0 * ch.powi(3)
        - 10.0 * ch.powi(4)
        - 8.0 * k * k * ch * ch
        - 28.0 * k * k
        + 8.0 * k * ch.powi(3) * sh
        - 9.0
}

/// Size of the largest term of `ind₁`, used to scale residuals.
pub fn ind1_scale(kappa: f64) -> f64 {
    let ch = (2.0 * kappa).cosh();
    10.0 * ch.powi(4) + 8.0 * kappa * ch.powi(3) * (2.0 * kappa).sinh() + 1.0
}

fn ind1_derivative(kappa: f64) -> f64 {
    let h = 1e-6 * kappa.max(1.0);
    (ind1(kappa + h) - ind1(kappa - h)) / (2.0 * h)
}

/// The unique zero `κ₁` of `ind₁` on [`KAPPA1_BRACKET`].
pub fn find_kappa1() -> Result<f64> {
    let (a, b) = KAPPA1_BRACKET;
    let k = bisect_newton(&ind1, &ind1_derivative, a, b, 0.0)?;
    Ok(k)
}

/// `ν(F) = −μ₀ ind₁/(32 s⁴(2s² − 6μ₀s² − 4μ₀s⁴ − 2μ₀ + s⁴ + μ₀² + 1))`.
pub fn nu_bridges_mielke(wp: &WaveParams) -> Result<f64> {
    let s2 = wp.kappa.sinh().powi(2);
    let mu = wp.mu0;
    let inner = 2.0 * s2 - 6.0 * mu * s2 - 4.0 * mu * s2 * s2 - 2.0 * mu + s2 * s2 + mu * mu + 1.0;
    let scale = 2.0 * s2 + 6.0 * mu * s2 + 4.0 * mu * s2 * s2 + 2.0 * mu + s2 * s2 + mu * mu + 1.0;
    if inner.abs() < 1e-12 * scale {
        return Err(Error::Domain(format!("nu has a pole at kappa = {}", wp.kappa)));
    }
    Ok(-mu * ind1(wp.kappa) / (32.0 * s2 * s2 * inner))
}

/// `iπ³(s²+1)²/(4s⁴(μ₀−1)(s²−μ₀+1)³)·ind₁` in its literal closed form.
pub fn f2_identity_literal(wp: &WaveParams) -> C64 {
    let s2 = wp.kappa.sinh().powi(2);
    let mu = wp.mu0;
    I * PI.powi(3) * (s2 + 1.0).powi(2) / (4.0 * s2 * s2 * (mu - 1.0) * (s2 - mu + 1.0).powi(3)) * ind1(wp.kappa)
}

/// `f₂` as a multiple of `ind₁`. The entries (closed-form or computed) give the
/// negative of the literal multiple; with the literal sign `(α^(1,1))²` would
/// be positive exactly when `ind₁ < 0`.
pub fn f2_identity(wp: &WaveParams) -> C64 {
    -f2_identity_literal(wp)
}

#[derive(Clone, Debug, Serialize)]
pub struct BFCoeffs {
    pub kappa: f64,
    /// `α_j^(1,0)`, `j = 1..4`.
    pub alpha10: [C64; 4],
    /// `α_j^(2,0)`, `j = 1, 2`, with the sign fixed by the dispersion curve.
    pub alpha20: [C64; 2],
    /// `+α^(1,1)`; the other branch is its negative.
    pub alpha11: C64,
    pub f1: C64,
    pub f2: C64,
    pub f2_identity: C64,
    pub ind1: f64,
    pub nu: f64,
}

/// Reads `a_{ij}^(m,n)` with 1-based indices.
fn ent(ms: &MonodromySeries, m: u32, n: u32, i: usize, j: usize) -> Result<C64> {
    Ok(ms.a(m, n)?.get(i - 1, j - 1))
}

/// `f₂` assembled from monodromy entries.
pub fn f2_from_entries(ms: &MonodromySeries) -> Result<C64> {
    let t = ms.period;
    let e = |m, n, i, j| ent(ms, m, n, i, j);
    let a11_02 = e(0, 2, 1, 1)?;
    let a11_10 = e(1, 0, 1, 1)?;
    let a33_10 = e(1, 0, 3, 3)?;
    let a44_10 = e(1, 0, 4, 4)?;
    let a34_20 = e(2, 0, 3, 4)?;
    let a14_11 = e(1, 1, 1, 4)?;
    let a31_11 = e(1, 1, 3, 1)?;
    let a13_01 = e(0, 1, 1, 3)?;
    let a41_01 = e(0, 1, 4, 1)?;
    Ok(a11_02 * a11_10 * a11_10 - t * a11_02 * a34_20 + t * a14_11 * a31_11 - a11_02 * a11_10 * a33_10
        + a11_10 * a13_01 * a31_11
        - a11_02 * a11_10 * a44_10
        + a11_10 * a14_11 * a41_01
        + a11_02 * a33_10 * a44_10
        - a13_01 * a31_11 * a44_10
        + a13_01 * a34_20 * a41_01
        - a14_11 * a33_10 * a41_01)
}

/// `f₁` from the first- and second-order entries.
pub fn f1_from_entries(ms: &MonodromySeries) -> Result<C64> {
    let t = ms.period;
    let a11 = ent(ms, 1, 0, 1, 1)?;
    let a33 = ent(ms, 1, 0, 3, 3)?;
    let a44 = ent(ms, 1, 0, 4, 4)?;
    let a34 = ent(ms, 2, 0, 3, 4)?;
    Ok(t * t * (t * a34 + a11 * a33 + a11 * a44 - a33 * a44 - a11 * a11))
}

/// `σ''(k)/2` on the branch through `(k, 0)`, by central differences.
fn half_curvature(wp: &WaveParams, k: f64) -> f64 {
    let branch = |x: f64| {
        let (p, m) = sigma_branches(wp, x);
        let (p0, m0) = sigma_branches(wp, k);
        if p0.abs() <= m0.abs() {
            p
        } else {
            m
        }
    };
    let h = 1e-4;
    (branch(k + h) - 2.0 * branch(k) + branch(k - h)) / (2.0 * h * h)
}

/// Benjamin–Feir coefficients from a series at `σ = 0` through order 2.
pub fn bf_coefficients(ms: &MonodromySeries) -> Result<BFCoeffs> {
    if ms.sigma != 0.0 || ms.dim != 4 {
        return Err(Error::Domain("Benjamin-Feir coefficients need the series at sigma = 0".into()));
    }
    let wp = WaveParams::new(ms.kappa)?;
    let t = ms.period;
    let a11_10 = ent(ms, 1, 0, 1, 1)?;
    let a33 = ent(ms, 1, 0, 3, 3)?;
    let a44 = ent(ms, 1, 0, 4, 4)?;
    let a34_20 = ent(ms, 2, 0, 3, 4)?;
    let a11_20 = ent(ms, 2, 0, 1, 1)?;
    let a12 = I * t / a11_10;
    let den = 2.0 * (t * a34_20 - a33 * a44);
    let root = (-a33 * a33 + 2.0 * a33 * a44 - a44 * a44 - 4.0 * t * a34_20).sqrt();
    let a3 = (-I * t * (a33 + a44) + t * root) / den;
    let a4 = (-I * t * (a33 + a44) - t * root) / den;
    let mag20 = t * t * (-a11_10 * a11_10 + 2.0 * a11_20) / (2.0 * a11_10.powi(3));
    // Pick the sign of each α_j^(2,0) to match the curvature of the
    // dispersion branch through k_j(0) = ∓κ.
    let sign_for = |k: f64| {
        let want = half_curvature(&wp, k);
        if (mag20.im - want).abs() <= (mag20.im + want).abs() {
            1.0
        } else {
            -1.0
        }
    };
    let alpha20 = [mag20 * sign_for(-wp.kappa), mag20 * sign_for(wp.kappa)];
    let f1 = f1_from_entries(ms)?;
    let f2 = f2_from_entries(ms)?;
    let f2_id = f2_identity(&wp);
    let scale = f2.norm().max(f2_id.norm()).max(1e-300);
    // Near κ₁ both sides vanish; compare against the size of the summands.
    let summand_scale = f2_summand_scale(ms)?;
    if (f2 - f2_id).norm() > F2_TOL * scale.max(1e-6 * summand_scale) {
        return Err(Error::Consistency(format!("f2 from entries {f2} disagrees with the identity {f2_id}")));
    }
    let c = t.powi(4) * (2.0 * a11_20 - a11_10 * a11_10) / a11_10.powi(4);
    let alpha11 = (c * f2 / f1).sqrt();
    Ok(BFCoeffs {
        kappa: ms.kappa,
        alpha10: [a12, a12, a3, a4],
        alpha20,
        alpha11,
        f1,
        f2,
        f2_identity: f2_id,
        ind1: ind1(ms.kappa),
        nu: nu_bridges_mielke(&wp)?,
    })
}

/// Magnitude of the largest product in the `f₂` sum.
pub fn f2_summand_scale(ms: &MonodromySeries) -> Result<f64> {
    let t = ms.period;
    let e = |m, n, i, j| ent(ms, m, n, i, j).map(|v| v.norm());
    let (a, b, c, d) = (e(0, 2, 1, 1)?, e(1, 0, 1, 1)?, e(1, 0, 3, 3)?, e(1, 0, 4, 4)?);
    let (f, g, h, k, l) = (e(2, 0, 3, 4)?, e(1, 1, 1, 4)?, e(1, 1, 3, 1)?, e(0, 1, 1, 3)?, e(0, 1, 4, 1)?);
    Ok([a * b * b, t * a * f, t * g * h, a * b * c, b * k * h, a * b * d, b * g * l, a * c * d, k * h * d, k * f * l, g * c * l]
        .into_iter()
        .fold(0.0, f64::max))
}

/// Series at `σ = 0` through order 2.
pub fn series_at_zero(wp: &WaveParams, prefer_closed: bool) -> Result<MonodromySeries> {
    let ctx = ReductionContext::new(wp, 0.0)?;
    if prefer_closed {
        build_series(ctx, 2)
    } else {
        series_for(ctx, &crate::monodromy::ORDERS, false)
    }
}

/// Series at the resonance of order `n` with the orders the bubble needs.
pub fn series_at_resonance(wp: &WaveParams, n: i32, prefer_closed: bool) -> Result<MonodromySeries> {
    let ctx = ReductionContext::at_resonance(wp, n)?;
    series_for(ctx, &[(1, 0), (0, 2)], prefer_closed)
}

#[derive(Clone, Debug, Serialize)]
pub struct BubbleCoeffs {
    pub kappa: f64,
    pub resonance: Resonance,
    pub d200: C64,
    pub d020: C64,
    pub d004: C64,
    pub d110: C64,
    pub d102: C64,
    pub d012: C64,
    pub alpha10: C64,
    pub alpha02: C64,
    pub alpha20: f64,
    pub alpha12: f64,
    pub alpha04: f64,
    /// `γ*/ε²`, the maximizer of `Q(·; ε)` in units of `ε²`.
    pub gamma_star_unit: f64,
    pub ind2: f64,
    /// `Im(a₁₂^(0,2)/a₁₁^(1,0))` and `Im(a₂₁^(0,2)/a₂₂^(1,0))`.
    pub witnesses: [f64; 2],
}

fn real_part_checked(name: &str, v: C64) -> Result<f64> {
    if v.im.abs() > 1e-8 * v.norm().max(1e-300) && v.im.abs() > 1e-14 {
        return Err(Error::Consistency(format!("{name} = {v} should be real")));
    }
    Ok(v.re)
}

/// `ind₂` and the bubble coefficients from a series at `σ₂`.
pub fn bubble_coefficients(ms: &MonodromySeries) -> Result<BubbleCoeffs> {
    let r = ms.resonance.ok_or_else(|| Error::Domain("bubble coefficients need a resonant series".into()))?;
    let t = ms.period;
    let a10 = ms.a(1, 0)?;
    let a02 = ms.a(0, 2)?;
    let e4 = (I * r.k4 * t).exp();
    let (p11, p22) = (a10.get(0, 0), a10.get(1, 1));
    let (q11, q12, q21, q22) = (a02.get(0, 0), a02.get(0, 1), a02.get(1, 0), a02.get(1, 1));
    let d200 = p11 * p22;
    let d020 = -t * t * e4 * e4;
    let d004 = q11 * q22 - q12 * q21;
    let d110 = -I * t * e4 * (p11 + p22);
    let d102 = q11 * p22 + q22 * p11;
    let d012 = -I * t * e4 * (q11 + q22);
    let alpha10 = -d110 / (2.0 * d200);
    let alpha02 = -d102 / (2.0 * d200);
    let alpha20 = real_part_checked("alpha20", (d110 * d110 - 4.0 * d200 * d020) / (4.0 * d200 * d200))?;
    let alpha12 = real_part_checked("alpha12", (d110 * d102 - 2.0 * d200 * d012) / (2.0 * d200 * d200))?;
    let alpha04 = real_part_checked("alpha04", (d102 * d102 - 4.0 * d200 * d004) / (4.0 * d200 * d200))?;
    let ind2 = real_part_checked("ind2", q12 * q21 / (p11 * p22))?;
    Ok(BubbleCoeffs {
        kappa: ms.kappa,
        resonance: r,
        d200,
        d020,
        d004,
        d110,
        d102,
        d012,
        alpha10,
        alpha02,
        alpha20,
        alpha12,
        alpha04,
        gamma_star_unit: -alpha12 / (2.0 * alpha20),
        ind2,
        witnesses: [(q12 / p11).im, (q21 / p22).im],
    })
}

/// `ind₂(κ)` with its coefficients.
pub fn ind2(wp: &WaveParams) -> Result<BubbleCoeffs> {
    bubble_coefficients(&series_at_resonance(wp, 2, true)?)
}

/// `((a₁₁^(0,2)a₂₂^(1,0) − a₁₁^(1,0)a₂₂^(0,2))² + 4a₁₂^(0,2)a₂₁^(0,2)a₁₁^(1,0)a₂₂^(1,0))/(a₁₁^(1,0)a₂₂^(1,0))²`.
pub fn ind2_mu0_variant_from(ms: &MonodromySeries) -> Result<f64> {
    let a10 = ms.a(1, 0)?;
    let a02 = ms.a(0, 2)?;
    let (p11, p22) = (a10.get(0, 0), a10.get(1, 1));
    let (q11, q12, q21, q22) = (a02.get(0, 0), a02.get(0, 1), a02.get(1, 0), a02.get(1, 1));
    let num = (q11 * p22 - p11 * q22).powi(2) + 4.0 * q12 * q21 * p11 * p22;
    real_part_checked("ind2 variant", num / (p11 * p22).powi(2))
}

pub fn ind2_mu0_variant(wp: &WaveParams) -> Result<f64> {
    ind2_mu0_variant_from(&series_at_resonance(wp, 2, true)?)
}

/// Bisection on a fallible function down to `width`.
fn bisect_fallible<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, width: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if (flo < 0.0) == (fhi < 0.0) {
        return Err(Error::Bracket(format!("no sign change on [{lo}, {hi}]: {flo}, {fhi}")));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if (f(mid)? < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Location of the sign changes of both witnesses.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Kappa2 {
    pub kappa2: f64,
    /// Root of the second witness, found independently.
    pub kappa2_second_witness: f64,
}

/// `κ₂`, where both witnesses change sign.
pub fn find_kappa2() -> Result<Kappa2> {
    let (a, b) = KAPPA2_BRACKET;
    let w = |i: usize| move |k: f64| -> Result<f64> { Ok(ind2(&WaveParams::new(k)?)?.witnesses[i]) };
    let k1 = bisect_fallible(&w(0), a, b, KAPPA2_WIDTH)?;
    let k2 = bisect_fallible(&w(1), a, b, KAPPA2_WIDTH)?;
    Ok(Kappa2 { kappa2: k1, kappa2_second_witness: k2 })
}

/// Sign changes of [`ind2_mu0_variant`] on a bracket, refined to `width`.
pub fn variant_sign_change(a: f64, b: f64, width: f64) -> Result<f64> {
    bisect_fallible(&|k: f64| ind2_mu0_variant(&WaveParams::new(k)?), a, b, width)
}

/// One sample of the bubble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BubblePoint {
    pub gamma: f64,
    pub delta: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bubble {
    pub eps: f64,
    /// Roots of `Q(·; ε)`, empty when `Q < 0` everywhere.
    pub interval: Option<(f64, f64)>,
    pub gamma_star: f64,
    pub max_re: f64,
    /// Upper branch over the interval, followed by the lower branch.
    pub points: Vec<BubblePoint>,
}

impl BubbleCoeffs {
    pub fn q(&self, gamma: f64, eps: f64) -> f64 {
        let e2 = eps * eps;
        self.alpha20 * gamma * gamma + self.alpha12 * gamma * e2 + self.alpha04 * e2 * e2
    }

    /// Both leading-order roots `δ±(γ, ε)`.
    pub fn delta(&self, gamma: f64, eps: f64) -> [C64; 2] {
        let drift = self.alpha10 * gamma + self.alpha02 * eps * eps;
        let r = C64::new(self.q(gamma, eps), 0.0).sqrt();
        [drift + r, drift - r]
    }
}

/// Leading-order bubble over `samples` points of the `γ`-interval where
/// `Q ≥ 0`; the maximizer `γ*` is always one of the samples.
pub fn bubble_spectrum(bc: &BubbleCoeffs, eps: f64, samples: usize) -> Result<Bubble> {
    if !(eps > 0.0 && eps <= 0.01) {
        return Err(Error::Domain(format!("eps must lie in (0, 0.01], got {eps}")));
    }
    let e2 = eps * eps;
    let gamma_star = bc.gamma_star_unit * e2;
    let disc = bc.alpha12 * bc.alpha12 - 4.0 * bc.alpha20 * bc.alpha04;
    if !(disc > 0.0) || bc.alpha20 >= 0.0 {
        return Ok(Bubble { eps, interval: None, gamma_star, max_re: 0.0, points: vec![] });
    }
    let sq = disc.sqrt() * e2;
    let g1 = (-bc.alpha12 * e2 + sq) / (2.0 * bc.alpha20);
    let g2 = (-bc.alpha12 * e2 - sq) / (2.0 * bc.alpha20);
    let (lo, hi) = (g1.min(g2), g1.max(g2));
    let n = samples.max(3);
    let mut gammas: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    gammas[0] = lo;
    gammas[n - 1] = hi;
    if !gammas.contains(&gamma_star) {
        gammas.push(gamma_star);
        gammas.sort_by(f64::total_cmp);
    }
    let mut points = Vec::with_capacity(2 * gammas.len());
    for branch in 0..2 {
        for &g in &gammas {
            points.push(BubblePoint { gamma: g, delta: bc.delta(g, eps)[branch] });
        }
    }
    let max_re = points.iter().map(|p| p.delta.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Bubble { eps, interval: Some((lo, hi)), gamma_star, max_re, points })
}

/// Largest off-diagonal `|a^(0,2)(T)|` at `σ₃`, next to the diagonal size.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Resonance3Report {
    pub max_offdiag: f64,
    pub max_diag: f64,
}

pub fn resonance3_stability_check(wp: &WaveParams) -> Result<Resonance3Report> {
    let ms = series_at_resonance(wp, 3, true)?;
    let a = ms.a(0, 2)?;
    Ok(Resonance3Report {
        max_offdiag: a.get(0, 1).norm().max(a.get(1, 0).norm()),
        max_diag: a.get(0, 0).norm().max(a.get(1, 1).norm()),
    })
}

/// `|Δ|` at each bubble root divided by `ε⁴` times the coefficient size.
pub fn bubble_evans_residual(ms: &MonodromySeries, bc: &BubbleCoeffs, gamma: f64, eps: f64) -> Result<f64> {
    let r = bc.resonance;
    let scale = (bc.d200.norm() + bc.d004.norm() + bc.d020.norm()) * eps.powi(4);
    let mut worst = 0.0f64;
    for d in bc.delta(gamma, eps) {
        let v = evans_value(ms, I * r.sigma_n + d, r.k4 + gamma, eps)?;
        worst = worst.max(v.norm() / scale);
    }
    Ok(worst)
}
