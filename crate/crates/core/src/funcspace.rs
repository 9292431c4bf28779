//! Exact algebra for finite sums of `x^q e^{iωx} y^p {1, cosh, sinh}(a y)`.
//!
//! Frequencies and rates are integer vectors over the basis `{κ, k₂, k₄, 1}`,
//! so zero tests and resonance detection are exact integer comparisons. Only
//! evaluation, differentiation and integration consult numeric values, via a
//! [`Lattice`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest supported power of `y` in any term.
pub const Y_POWER_CAP: u32 = 6;

/// Coefficients below this fraction of the largest one are dropped.
pub const PRUNE_RELATIVE: f64 = 1e-14;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Integer combination `n_kappa·κ + n_k2·k₂ + n_k4·k₄ + n_unit`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyVector {
    pub n_kappa: i32,
    pub n_k2: i32,
    pub n_k4: i32,
    /// The two negative roots present only for `0 < σ < σ_c`.
    pub n_k1: i32,
    pub n_k3: i32,
    /// Multiples of the unit rate; needed for the `cosh(y)` profile of the
    /// adjoint modes.
    pub n_unit: i32,
}

impl FrequencyVector {
    pub const ZERO: Self = Self::new(0, 0, 0, 0);
    pub const KAPPA: Self = Self::new(1, 0, 0, 0);
    pub const K2: Self = Self::new(0, 1, 0, 0);
    pub const K4: Self = Self::new(0, 0, 1, 0);
    pub const UNIT: Self = Self::new(0, 0, 0, 1);
    pub const K1: Self = Self { n_k1: 1, ..Self::ZERO };
    pub const K3: Self = Self { n_k3: 1, ..Self::ZERO };

    pub const fn new(n_kappa: i32, n_k2: i32, n_k4: i32, n_unit: i32) -> Self {
        Self { n_kappa, n_k2, n_k4, n_k1: 0, n_k3: 0, n_unit }
    }

    pub const fn kappa(n: i32) -> Self {
        Self::new(n, 0, 0, 0)
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    pub fn scale(self, k: i32) -> Self {
        Self {
            n_kappa: self.n_kappa * k,
            n_k2: self.n_k2 * k,
            n_k4: self.n_k4 * k,
            n_k1: self.n_k1 * k,
            n_k3: self.n_k3 * k,
            n_unit: self.n_unit * k,
        }
    }

    /// Sign normalization used for cosh/sinh rates: the first nonzero
    /// component is made positive. Returns the normalized vector and the sign
    /// that was applied.
    pub fn normalized(self) -> (Self, i32) {
        let first = [self.n_kappa, self.n_k2, self.n_k4, self.n_k1, self.n_k3, self.n_unit]
            .into_iter()
            .find(|&c| c != 0)
            .unwrap_or(0);
        if first < 0 {
            (-self, -1)
        } else {
            (self, 1)
        }
    }
}

impl Add for FrequencyVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            n_kappa: self.n_kappa + o.n_kappa,
            n_k2: self.n_k2 + o.n_k2,
            n_k4: self.n_k4 + o.n_k4,
            n_k1: self.n_k1 + o.n_k1,
            n_k3: self.n_k3 + o.n_k3,
            n_unit: self.n_unit + o.n_unit,
        }
    }
}

impl Sub for FrequencyVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for FrequencyVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1)
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{}", self.n_kappa, self.n_k2, self.n_k4, self.n_unit)?;
        if self.n_k1 != 0 || self.n_k3 != 0 {
            write!(f, ";k1:{},k3:{}", self.n_k1, self.n_k3)?;
        }
        write!(f, ")")
    }
}

/// Numeric values of the lattice basis, plus an optional resonance
/// constraint `k₂ = k₄ + Nκ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    pub kappa: f64,
    pub k2: f64,
    pub k4: f64,
    pub k1: f64,
    pub k3: f64,
    pub resonance: Option<i32>,
}

impl Lattice {
    /// Lattice in which only `κ` (and the unit rate) is used.
    pub fn kappa_only(kappa: f64) -> Self {
        Self::new(kappa, f64::NAN, f64::NAN)
    }

    pub fn new(kappa: f64, k2: f64, k4: f64) -> Self {
        Self { kappa, k2, k4, k1: f64::NAN, k3: f64::NAN, resonance: None }
    }

    /// Lattice carrying all four roots, for `0 < σ < σ_c`.
    pub fn with_negative_roots(kappa: f64, k1: f64, k2: f64, k3: f64, k4: f64) -> Self {
        Self { kappa, k2, k4, k1, k3, resonance: None }
    }

    /// Lattice under the constraint `k₂ = k₄ + Nκ`; `k₂` is re-derived from
    /// `k₄` so numeric evaluation agrees with the integer canonical form.
    pub fn resonant(kappa: f64, k4: f64, n: i32) -> Self {
        Self { resonance: Some(n), ..Self::new(kappa, k4 + n as f64 * kappa, k4) }
    }

    pub fn value(&self, v: FrequencyVector) -> f64 {
        let mut acc = 0.0;
        if v.n_kappa != 0 {
            acc += v.n_kappa as f64 * self.kappa;
        }
        if v.n_k2 != 0 {
            acc += v.n_k2 as f64 * self.k2;
        }
        if v.n_k4 != 0 {
            acc += v.n_k4 as f64 * self.k4;
        }
        if v.n_k1 != 0 {
            acc += v.n_k1 as f64 * self.k1;
        }
        if v.n_k3 != 0 {
            acc += v.n_k3 as f64 * self.k3;
        }
        acc + v.n_unit as f64
    }

    /// Eliminates `k₂` when a resonance constraint is active.
    pub fn canonicalize(&self, v: FrequencyVector) -> FrequencyVector {
        match self.resonance {
            Some(n) => FrequencyVector {
                n_kappa: v.n_kappa + n * v.n_k2,
                n_k2: 0,
                n_k4: v.n_k4 + v.n_k2,
                ..v
            },
            None => v,
        }
    }

    pub fn k2_vec(&self) -> FrequencyVector {
        self.canonicalize(FrequencyVector::K2)
    }

    pub fn k4_vec(&self) -> FrequencyVector {
        self.canonicalize(FrequencyVector::K4)
    }
}

/// Shape of the y-profile of a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum YKind {
    Const,
    Cosh,
    Sinh,
}

/// Everything in a term except its coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermKey {
    pub x_freq: FrequencyVector,
    pub x_power: u32,
    pub y_kind: YKind,
    pub y_rate: FrequencyVector,
    pub y_power: u32,
}

impl TermKey {
    pub const ONE: Self = Self {
        x_freq: FrequencyVector::ZERO,
        x_power: 0,
        y_kind: YKind::Const,
        y_rate: FrequencyVector::ZERO,
        y_power: 0,
    };

    pub fn has_y(&self) -> bool {
        self.y_kind != YKind::Const || self.y_power > 0
    }

    pub fn has_x(&self) -> bool {
        !self.x_freq.is_zero() || self.x_power > 0
    }
}

/// A single term `coeff · x^q e^{iωx} · y^p · Y(a y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub key: TermKey,
}

/// Canonical finite sum of terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TermFunction {
    terms: BTreeMap<TermKey, C64>,
}

fn ipow(x: f64, p: u32) -> f64 {
    x.powi(p as i32)
}

impl TermFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<C64>) -> Self {
        let mut f = Self::zero();
        f.push(c.into(), TermKey::ONE);
        f
    }

    /// `c·e^{iωx}`.
    pub fn exp_x(c: impl Into<C64>, freq: FrequencyVector) -> Self {
        Self::monomial(c, freq, 0, YKind::Const, FrequencyVector::ZERO, 0)
    }

    /// `c·y^p·cosh(a y)`.
    pub fn cosh_y(c: impl Into<C64>, rate: FrequencyVector, p: u32) -> Self {
        Self::monomial(c, FrequencyVector::ZERO, 0, YKind::Cosh, rate, p)
    }

    /// `c·y^p·sinh(a y)`.
    pub fn sinh_y(c: impl Into<C64>, rate: FrequencyVector, p: u32) -> Self {
        Self::monomial(c, FrequencyVector::ZERO, 0, YKind::Sinh, rate, p)
    }

    /// `c·y^p`.
    pub fn poly_y(c: impl Into<C64>, p: u32) -> Self {
        Self::monomial(c, FrequencyVector::ZERO, 0, YKind::Const, FrequencyVector::ZERO, p)
    }

    /// `c·x^q`.
    pub fn poly_x(c: impl Into<C64>, q: u32) -> Self {
        Self::monomial(c, FrequencyVector::ZERO, q, YKind::Const, FrequencyVector::ZERO, 0)
    }

    pub fn monomial(
        c: impl Into<C64>,
        x_freq: FrequencyVector,
        x_power: u32,
        y_kind: YKind,
        y_rate: FrequencyVector,
        y_power: u32,
    ) -> Self {
        let mut f = Self::zero();
        f.push(c.into(), TermKey { x_freq, x_power, y_kind, y_rate, y_power });
        f.prune();
        f
    }

    /// `sin(ωx)` written with exponentials.
    pub fn sin_x(c: impl Into<C64>, freq: FrequencyVector) -> Self {
        let c = c.into() / (2.0 * I);
        &Self::exp_x(c, freq) - &Self::exp_x(c, -freq)
    }

    /// `cos(ωx)` written with exponentials.
    pub fn cos_x(c: impl Into<C64>, freq: FrequencyVector) -> Self {
        let c = c.into() * 0.5;
        &Self::exp_x(c, freq) + &Self::exp_x(c, -freq)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut f = Self::zero();
        for t in terms {
            f.push(t.coeff, t.key);
        }
        f.prune();
        f
    }

    /// Adds a term, normalizing the rate sign and degenerate rates.
    fn push(&mut self, c: C64, mut key: TermKey) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let mut c = c;
        match key.y_kind {
            YKind::Const => key.y_rate = FrequencyVector::ZERO,
            kind => {
                if key.y_rate.is_zero() {
                    if kind == YKind::Sinh {
                        return;
                    }
                    key.y_kind = YKind::Const;
                } else {
                    let (r, sign) = key.y_rate.normalized();
                    key.y_rate = r;
                    if kind == YKind::Sinh && sign < 0 {
                        c = -c;
                    }
                }
            }
        }
        *self.terms.entry(key).or_insert(C64::new(0.0, 0.0)) += c;
    }

    /// Drops coefficients below [`PRUNE_RELATIVE`] of the largest.
    pub fn prune(&mut self) {
        let max = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let tol = max * PRUNE_RELATIVE;
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().map(|(k, c)| Term { coeff: *c, key: *k })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &TermKey) -> C64 {
        self.terms.get(key).copied().unwrap_or_default()
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn has_x(&self) -> bool {
        self.terms.keys().any(|k| k.has_x())
    }

    pub fn has_y(&self) -> bool {
        self.terms.keys().any(|k| k.has_y())
    }

    /// Distinct x-frequencies present.
    pub fn x_frequencies(&self) -> Vec<FrequencyVector> {
        let mut v: Vec<_> = self.terms.keys().map(|k| k.x_freq).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.prune();
        out
    }

    /// Product with degree checking.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let p = ka.y_power + kb.y_power;
                if p > Y_POWER_CAP {
                    return Err(Error::UnsupportedDegree(p));
                }
                let c = ca * cb;
                let x_freq = ka.x_freq + kb.x_freq;
                let x_power = ka.x_power + kb.x_power;
                let mk = |kind, rate| TermKey { x_freq, x_power, y_kind: kind, y_rate: rate, y_power: p };
                let (a, b) = (ka.y_rate, kb.y_rate);
                use YKind::*;
                match (ka.y_kind, kb.y_kind) {
                    (Const, kind) => out.push(c, mk(kind, b)),
                    (kind, Const) => out.push(c, mk(kind, a)),
                    (Cosh, Cosh) => {
                        out.push(0.5 * c, mk(Cosh, a + b));
                        out.push(0.5 * c, mk(Cosh, a - b));
                    }
                    (Sinh, Sinh) => {
                        out.push(0.5 * c, mk(Cosh, a + b));
                        out.push(-0.5 * c, mk(Cosh, a - b));
                    }
                    (Sinh, Cosh) => {
                        out.push(0.5 * c, mk(Sinh, a + b));
                        out.push(0.5 * c, mk(Sinh, a - b));
                    }
                    (Cosh, Sinh) => {
                        out.push(0.5 * c, mk(Sinh, a + b));
                        out.push(-0.5 * c, mk(Sinh, a - b));
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Multiplication by `y`.
    pub fn times_y(&self) -> Self {
        self.map_keys(|k, c| (TermKey { y_power: k.y_power + 1, ..k }, c))
    }

    /// Multiplication by `x`.
    pub fn times_x(&self) -> Self {
        self.map_keys(|k, c| (TermKey { x_power: k.x_power + 1, ..k }, c))
    }

    fn map_keys(&self, f: impl Fn(TermKey, C64) -> (TermKey, C64)) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let (k2, c2) = f(*k, *c);
            out.push(c2, k2);
        }
        out.prune();
        out
    }

    /// Complex conjugate for real `x` and `y`.
    pub fn conj(&self) -> Self {
        self.map_keys(|k, c| (TermKey { x_freq: -k.x_freq, ..k }, c.conj()))
    }

    /// Partial derivative in `x`.
    pub fn dx(&self, lat: &Lattice) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let w = lat.value(k.x_freq);
            if !k.x_freq.is_zero() {
                out.push(c * I * w, *k);
            }
            if k.x_power > 0 {
                out.push(c * k.x_power as f64, TermKey { x_power: k.x_power - 1, ..*k });
            }
        }
        out.prune();
        out
    }

    /// Partial derivative in `y`.
    pub fn dy(&self, lat: &Lattice) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            if k.y_power > 0 {
                out.push(c * k.y_power as f64, TermKey { y_power: k.y_power - 1, ..*k });
            }
            let a = lat.value(k.y_rate);
            match k.y_kind {
                YKind::Const => {}
                YKind::Cosh => out.push(c * a, TermKey { y_kind: YKind::Sinh, ..*k }),
                YKind::Sinh => out.push(c * a, TermKey { y_kind: YKind::Cosh, ..*k }),
            }
        }
        out.prune();
        out
    }

    /// Restriction to `y = y0`, leaving a function of `x` only.
    pub fn at_y(&self, lat: &Lattice, y0: f64) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let v = y_profile(lat, k, y0);
            out.push(c * v, TermKey { y_kind: YKind::Const, y_rate: FrequencyVector::ZERO, y_power: 0, ..*k });
        }
        out.prune();
        out
    }

    /// Restriction to `x = x0`, leaving a function of `y` only.
    pub fn at_x(&self, lat: &Lattice, x0: f64) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let v = x_profile(lat, k, x0);
            out.push(c * v, TermKey { x_freq: FrequencyVector::ZERO, x_power: 0, ..*k });
        }
        out.prune();
        out
    }

    pub fn eval(&self, lat: &Lattice, x: f64, y: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            acc += c * x_profile(lat, k, x) * y_profile(lat, k, y);
        }
        acc
    }

    /// `∫₀¹ f dy`, leaving a function of `x`.
    pub fn integrate_y(&self, lat: &Lattice) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let v = integral_y01(k.y_kind, lat.value(k.y_rate), k.y_power);
            out.push(c * v, TermKey { y_kind: YKind::Const, y_rate: FrequencyVector::ZERO, y_power: 0, ..*k });
        }
        out.prune();
        out
    }

    /// `∫₀¹ f dy` for a function without `x` dependence.
    pub fn integrate_y01(&self, lat: &Lattice) -> Result<C64> {
        if self.has_x() {
            return Err(Error::Domain("integrate_y01 requires an x-independent function".into()));
        }
        let mut acc = KahanSum::default();
        for (k, c) in &self.terms {
            acc.add(c * integral_y01(k.y_kind, lat.value(k.y_rate), k.y_power));
        }
        Ok(acc.total())
    }

    /// Antiderivative `∫₀^x f(x′,·) dx′`. Frequencies that are exactly zero on
    /// the lattice produce secular powers of `x`.
    pub fn integrate_x(&self, lat: &Lattice) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            let q = k.x_power;
            if k.x_freq.is_zero() {
                out.push(c / (q as f64 + 1.0), TermKey { x_power: q + 1, ..*k });
                continue;
            }
            let z = I * lat.value(k.x_freq);
            // ∫₀^x t^q e^{zt} dt = e^{zx} Σ_r (-1)^{q-r} q!/r! x^r / z^{q-r+1} - (-1)^q q!/z^{q+1}
            let mut fact_ratio = 1.0; // q!/r!
            for r in (0..=q).rev() {
                let sign = if (q - r) % 2 == 0 { 1.0 } else { -1.0 };
                let coef = c * sign * fact_ratio / z.powu(q - r + 1);
                out.push(coef, TermKey { x_power: r, ..*k });
                fact_ratio *= r.max(1) as f64;
            }
            let qfact: f64 = (1..=q).map(|v| v as f64).product();
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            out.push(
                -c * sign * qfact / z.powu(q + 1),
                TermKey { x_freq: FrequencyVector::ZERO, x_power: 0, ..*k },
            );
        }
        out.prune();
        out
    }

    /// Groups terms by `(x_freq, x_power)`; each group carries a y-profile.
    pub fn split_x(&self) -> BTreeMap<(FrequencyVector, u32), TermFunction> {
        let mut out: BTreeMap<(FrequencyVector, u32), TermFunction> = BTreeMap::new();
        for (k, c) in &self.terms {
            out.entry((k.x_freq, k.x_power)).or_default().push(
                *c,
                TermKey { x_freq: FrequencyVector::ZERO, x_power: 0, ..*k },
            );
        }
        out
    }

    /// Multiplies a y-profile by `x^q e^{iωx}`.
    pub fn with_x(&self, freq: FrequencyVector, q: u32) -> Self {
        self.map_keys(|k, c| {
            (TermKey { x_freq: k.x_freq + freq, x_power: k.x_power + q, ..k }, c)
        })
    }

    /// Re-expresses all vectors in the canonical form of `lat`.
    pub fn canonicalized(&self, lat: &Lattice) -> Self {
        self.map_keys(|k, c| {
            (
                TermKey { x_freq: lat.canonicalize(k.x_freq), y_rate: lat.canonicalize(k.y_rate), ..k },
                c,
            )
        })
    }
}

fn x_profile(lat: &Lattice, k: &TermKey, x: f64) -> C64 {
    let ph = if k.x_freq.is_zero() { C64::new(1.0, 0.0) } else { (I * lat.value(k.x_freq) * x).exp() };
    ph * ipow(x, k.x_power)
}

fn y_profile(lat: &Lattice, k: &TermKey, y: f64) -> f64 {
    let p = ipow(y, k.y_power);
    match k.y_kind {
        YKind::Const => p,
        YKind::Cosh => p * (lat.value(k.y_rate) * y).cosh(),
        YKind::Sinh => p * (lat.value(k.y_rate) * y).sinh(),
    }
}

/// `∫₀¹ y^p Y(a y) dy` in closed form, with a series branch for small `|a|`.
pub fn integral_y01(kind: YKind, a: f64, p: u32) -> f64 {
    match kind {
        YKind::Const => 1.0 / (p as f64 + 1.0),
        _ if a.abs() < 1.0 => {
            // Σ a^m/m! /(p+m+1) over even (cosh) or odd (sinh) m.
            let start = if kind == YKind::Cosh { 0 } else { 1 };
            let mut term = if start == 0 { 1.0 } else { a };
            let mut acc = term / (p as f64 + start as f64 + 1.0);
            let mut m = start;
            for _ in 0..40 {
                term *= a * a / (((m + 1) * (m + 2)) as f64);
                m += 2;
                let add = term / (p + m + 1) as f64;
                acc += add;
                if add.abs() < 1e-18 * acc.abs() {
                    break;
                }
            }
            acc
        }
        _ => {
            let (sh, ch) = (a.sinh(), a.cosh());
            let mut cp = sh / a;
            let mut sp = (ch - 1.0) / a;
            for q in 1..=p {
                let qa = q as f64 / a;
                let nc = sh / a - qa * sp;
                let ns = ch / a - qa * cp;
                cp = nc;
                sp = ns;
            }
            if kind == YKind::Cosh {
                cp
            } else {
                sp
            }
        }
    }
}

impl Add for &TermFunction {
    type Output = TermFunction;
    fn add(self, o: &TermFunction) -> TermFunction {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            *out.terms.entry(*k).or_insert(C64::new(0.0, 0.0)) += c;
        }
        out.prune();
        out
    }
}

impl Sub for &TermFunction {
    type Output = TermFunction;
    fn sub(self, o: &TermFunction) -> TermFunction {
        self + &(-o)
    }
}

impl Neg for &TermFunction {
    type Output = TermFunction;
    fn neg(self) -> TermFunction {
        self.scale(-1.0)
    }
}

impl Add for TermFunction {
    type Output = TermFunction;
    fn add(self, o: TermFunction) -> TermFunction {
        &self + &o
    }
}

impl Sub for TermFunction {
    type Output = TermFunction;
    fn sub(self, o: TermFunction) -> TermFunction {
        &self - &o
    }
}

impl Neg for TermFunction {
    type Output = TermFunction;
    fn neg(self) -> TermFunction {
        -&self
    }
}

/// Products inside the pipeline never exceed the degree cap; exceeding it is
/// a bug, so the operator form panics. Use [`TermFunction::try_mul`] to
/// handle the error instead.
impl Mul for &TermFunction {
    type Output = TermFunction;
    fn mul(self, o: &TermFunction) -> TermFunction {
        self.try_mul(o).expect("term product exceeded the y-degree cap")
    }
}

impl Mul for TermFunction {
    type Output = TermFunction;
    fn mul(self, o: TermFunction) -> TermFunction {
        &self * &o
    }
}

impl Mul<C64> for &TermFunction {
    type Output = TermFunction;
    fn mul(self, c: C64) -> TermFunction {
        self.scale(c)
    }
}

impl Mul<f64> for &TermFunction {
    type Output = TermFunction;
    fn mul(self, c: f64) -> TermFunction {
        self.scale(c)
    }
}

impl Mul<C64> for TermFunction {
    type Output = TermFunction;
    fn mul(self, c: C64) -> TermFunction {
        self.scale(c)
    }
}

impl Mul<f64> for TermFunction {
    type Output = TermFunction;
    fn mul(self, c: f64) -> TermFunction {
        self.scale(c)
    }
}

/// Neumaier-compensated complex sum.
#[derive(Default, Clone, Copy, Debug)]
pub struct KahanSum {
    sum: C64,
    comp: C64,
}

impl KahanSum {
    pub fn add(&mut self, v: C64) {
        self.sum.re = neumaier(self.sum.re, v.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, v.im, &mut self.comp.im);
    }

    pub fn total(&self) -> C64 {
        self.sum + self.comp
    }
}

fn neumaier(sum: f64, v: f64, comp: &mut f64) -> f64 {
    let t = sum + v;
    if sum.abs() >= v.abs() {
        *comp += (sum - t) + v;
    } else {
        *comp += (v - t) + sum;
    }
    t
}

/// The triple `(φ, υ, η)`; `eta` depends on `x` only.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateVec {
    pub phi: TermFunction,
    pub upsilon: TermFunction,
    pub eta: TermFunction,
}

impl StateVec {
    pub fn new(phi: TermFunction, upsilon: TermFunction, eta: TermFunction) -> Self {
        Self { phi, upsilon, eta }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        Self::new(self.phi.scale(c), self.upsilon.scale(c), self.eta.scale(c))
    }

    /// Multiplication of every component by a function of `x`.
    pub fn mul_x(&self, f: &TermFunction) -> Self {
        Self::new(&self.phi * f, &self.upsilon * f, &self.eta * f)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.phi.conj(), self.upsilon.conj(), self.eta.conj())
    }

    pub fn is_zero(&self) -> bool {
        self.phi.is_empty() && self.upsilon.is_empty() && self.eta.is_empty()
    }

    pub fn has_x(&self) -> bool {
        self.phi.has_x() || self.upsilon.has_x() || self.eta.has_x()
    }

    pub fn max_coeff(&self) -> f64 {
        self.phi.max_coeff().max(self.upsilon.max_coeff()).max(self.eta.max_coeff())
    }

    pub fn at_x(&self, lat: &Lattice, x: f64) -> Self {
        Self::new(self.phi.at_x(lat, x), self.upsilon.at_x(lat, x), self.eta.at_x(lat, x))
    }

    pub fn canonicalized(&self, lat: &Lattice) -> Self {
        Self::new(
            self.phi.canonicalized(lat),
            self.upsilon.canonicalized(lat),
            self.eta.canonicalized(lat),
        )
    }

    /// Residuals of the `dom(L)` conditions `η − υ(1)` and `φ_y(0)`, as
    /// maximum coefficient magnitudes.
    pub fn dom_residual(&self, lat: &Lattice) -> f64 {
        let r1 = &self.eta - &self.upsilon.at_y(lat, 1.0);
        let r2 = self.phi.dy(lat).at_y(lat, 0.0);
        r1.max_coeff().max(r2.max_coeff())
    }
}

impl Add for &StateVec {
    type Output = StateVec;
    fn add(self, o: &StateVec) -> StateVec {
        StateVec::new(&self.phi + &o.phi, &self.upsilon + &o.upsilon, &self.eta + &o.eta)
    }
}

impl Sub for &StateVec {
    type Output = StateVec;
    fn sub(self, o: &StateVec) -> StateVec {
        StateVec::new(&self.phi - &o.phi, &self.upsilon - &o.upsilon, &self.eta - &o.eta)
    }
}

impl Add for StateVec {
    type Output = StateVec;
    fn add(self, o: StateVec) -> StateVec {
        &self + &o
    }
}

impl Sub for StateVec {
    type Output = StateVec;
    fn sub(self, o: StateVec) -> StateVec {
        &self - &o
    }
}

/// `⟨u₁, u₂⟩` as a function of `x` (constant when neither input depends on
/// `x`).
pub fn inner_x(lat: &Lattice, u1: &StateVec, u2: &StateVec) -> TermFunction {
    let c = u2.conj();
    let a = &u1.phi * &c.phi;
    let b = &u1.phi.dy(lat) * &c.phi.dy(lat);
    let d = &u1.upsilon * &c.upsilon;
    let e = &u1.eta * &c.eta;
    &(&(&a + &b) + &d).integrate_y(lat) + &e
}

/// `⟨u₁, u₂⟩ = ∫₀¹(φ₁φ₂* + φ₁_yφ₂_y*) + ∫₀¹υ₁υ₂* + η₁η₂*` for inputs without
/// `x` dependence.
pub fn inner(lat: &Lattice, u1: &StateVec, u2: &StateVec) -> Result<C64> {
    if u1.has_x() || u2.has_x() {
        return Err(Error::Domain("inner requires x-independent inputs".into()));
    }
    let f = inner_x(lat, u1, u2);
    Ok(f.coeff(&TermKey::ONE))
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out.push((0.5 * (1.0 - z), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Inner product by Gauss–Legendre quadrature in `y`; independent of the
/// closed-form integrals.
pub fn quad_oracle_inner(lat: &Lattice, u1: &StateVec, u2: &StateVec, nodes: usize) -> C64 {
    let (p1, p1y) = (&u1.phi, u1.phi.dy(lat));
    let (p2, p2y) = (&u2.phi, u2.phi.dy(lat));
    let mut acc = KahanSum::default();
    for (y, w) in gauss_legendre01(nodes.max(16)) {
        let v = p1.eval(lat, 0.0, y) * p2.eval(lat, 0.0, y).conj()
            + p1y.eval(lat, 0.0, y) * p2y.eval(lat, 0.0, y).conj()
            + u1.upsilon.eval(lat, 0.0, y) * u2.upsilon.eval(lat, 0.0, y).conj();
        acc.add(v * w);
    }
    acc.add(u1.eta.eval(lat, 0.0, 0.0) * u2.eta.eval(lat, 0.0, 0.0).conj());
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: FrequencyVector = FrequencyVector::KAPPA;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn cosh_squared() {
        let f = TermFunction::cosh_y(1.0, K, 0);
        let g = &f * &f;
        let want = &TermFunction::cosh_y(0.5, K.scale(2), 0) + &TermFunction::constant(0.5);
        assert_eq!(g, want);
    }

    #[test]
    fn exponentials_cancel() {
        let f = &TermFunction::exp_x(1.0, K) * &TermFunction::exp_x(1.0, -K);
        assert_eq!(f, TermFunction::constant(1.0));
    }

    #[test]
    fn y_sinh_times_cosh() {
        let f = &TermFunction::sinh_y(1.0, K, 1) * &TermFunction::cosh_y(1.0, K, 0);
        assert_eq!(f, TermFunction::sinh_y(0.5, K.scale(2), 1));
    }

    #[test]
    fn integrals_match_closed_forms() {
        let lat = Lattice::kappa_only(1.3);
        let k = 1.3f64;
        let v = TermFunction::cosh_y(1.0, K, 0).integrate_y01(&lat).unwrap();
        assert!(close(v, (k.sinh() / k).into(), 1e-15));
        let v = TermFunction::sinh_y(1.0, K, 1).integrate_y01(&lat).unwrap();
        let want = (k * k.cosh() - k.sinh()) / (k * k);
        assert!(close(v, want.into(), 1e-15));
        assert_eq!(TermFunction::constant(1.0).integrate_y01(&lat).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn series_and_recursion_branches_agree_at_the_switch() {
        for p in 0..=6 {
            for kind in [YKind::Cosh, YKind::Sinh] {
                let a = integral_y01(kind, 1.0 - 1e-15, p);
                let b = integral_y01(kind, 1.0, p);
                assert!((a - b).abs() < 1e-13, "{kind:?} p={p}: {a} {b}");
            }
        }
    }

    #[test]
    fn full_period_integral_vanishes() {
        let lat = Lattice::kappa_only(0.9);
        let t = 2.0 * std::f64::consts::PI / 0.9;
        let f = TermFunction::exp_x(1.0, K.scale(3)).integrate_x(&lat);
        assert!(f.eval(&lat, t, 0.0).norm() < 1e-14);
        let g = TermFunction::constant(1.0).integrate_x(&lat);
        assert_eq!(g, TermFunction::poly_x(1.0, 1));
    }

    #[test]
    fn resonant_antiderivative() {
        // e^{i(k₂−k₄)x} sin(Nκx) with k₂ − k₄ = Nκ.
        let n = 2;
        let lat = Lattice::resonant(1.0, 0.37, n);
        let w = lat.canonicalize(FrequencyVector::K2 - FrequencyVector::K4);
        let f = &TermFunction::exp_x(1.0, w) * &TermFunction::sin_x(1.0, K.scale(n));
        let g = f.integrate_x(&lat);
        let nk = n as f64;
        for x in [0.3, 1.7, 4.0] {
            let want = I * 0.5 * x + (C64::new(1.0, 0.0) - (2.0 * I * nk * x).exp()) / (4.0 * nk);
            assert!(close(g.eval(&lat, x, 0.0), want, 1e-14));
        }
    }

    #[test]
    fn resonance_canonical_zero() {
        let lat = Lattice::resonant(1.2, 0.5, 3);
        let v = FrequencyVector::new(0, 1, -1, 0) - FrequencyVector::new(3, 0, 0, 0);
        assert!(lat.canonicalize(v).is_zero());
    }

    #[test]
    fn inner_examples() {
        let lat = Lattice::kappa_only(1.0);
        let e = StateVec::new(TermFunction::zero(), TermFunction::zero(), TermFunction::constant(1.0));
        assert_eq!(inner(&lat, &e, &e).unwrap(), C64::new(1.0, 0.0));
        let u = StateVec::new(TermFunction::cosh_y(1.0, K, 0), TermFunction::zero(), TermFunction::zero());
        let v = inner(&lat, &u, &u).unwrap();
        assert!(close(v, (2f64.sinh() / 2.0).into(), 1e-15));
        assert_eq!(inner(&lat, &StateVec::zero(), &u).unwrap(), C64::new(0.0, 0.0));
        assert!(close(quad_oracle_inner(&lat, &u, &u, 32), v, 1e-14));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let f = TermFunction::poly_y(1.0, 4);
        assert_eq!(f.try_mul(&f), Err(Error::UnsupportedDegree(8)));
    }

    #[test]
    fn gauss_legendre_weights_sum_to_one() {
        let s: f64 = gauss_legendre01(64).iter().map(|(_, w)| w).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
}
