//! Expansion coefficients `a^(m,n)(T)` of the monodromy matrix, their
//! closed forms, and the truncated periodic Evans function.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dispersion::{Resonance, WaveParams};
use crate::error::{Error, Result};
use crate::funcspace::{gauss_legendre01, quad_oracle_inner, StateVec, TermFunction};
use crate::reduction::{build_forcing, solve_w, ColumnData, ReductionContext};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Orders carried by the expansion, in dependency order.
pub const ORDERS: [(u32, u32); 5] = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// Above this size of `|δ|` or `|ε|` the truncated series is not trusted.
pub const VALIDITY_GUARD: f64 = 0.05;

/// Small dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Cofactor-expansion determinant; only orders 2 and 4 occur.
    pub fn det(&self) -> Result<C64> {
        let g = |i, j| self.get(i, j);
        match self.n {
            1 => Ok(g(0, 0)),
            2 => Ok(g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)),
            4 => {
                // Laplace expansion along the first two rows.
                let m2 = |r0: usize, r1: usize, c0: usize, c1: usize| g(r0, c0) * g(r1, c1) - g(r0, c1) * g(r1, c0);
                let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
                let mut acc = C64::new(0.0, 0.0);
                for &(a, b) in &pairs {
                    let rest: Vec<usize> = (0..4).filter(|c| *c != a && *c != b).collect();
                    let sign = if (a + b + 1) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * m2(0, 1, a, b) * m2(2, 3, rest[0], rest[1]);
                }
                Ok(acc)
            }
            n => Err(Error::Domain(format!("determinant of order {n} is not supported"))),
        }
    }
}

/// Where a matrix entry came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Pipeline,
}

/// A closed-form matrix in which some entries have no closed form (`None`).
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedMatrix {
    pub n: usize,
    pub entries: Vec<Option<C64>>,
}

impl ClosedMatrix {
    fn from_rows(rows: Vec<Vec<Option<C64>>>) -> Self {
        let n = rows.len();
        Self { n, entries: rows.into_iter().flatten().collect() }
    }

    /// Entry `(i, j)` in 0-based indices; absent entries are an error.
    pub fn get(&self, i: usize, j: usize) -> Result<C64> {
        self.entries[i * self.n + j].ok_or(Error::AbsentEntry(i + 1, j + 1))
    }

    pub fn has_closed_form(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j].is_some()
    }
}

/// Which family of closed forms applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedRegime {
    Zero,
    Resonant(Resonance),
}

fn re(v: f64) -> Option<C64> {
    Some(C64::new(v, 0.0))
}

fn cx(v: C64) -> Option<C64> {
    Some(v)
}

const Z: Option<C64> = Some(C64 { re: 0.0, im: 0.0 });
const ABSENT: Option<C64> = None;

/// Printed closed form of `a^(m,n)(T)`.
pub fn a_closed(wp: &WaveParams, regime: ClosedRegime, m: u32, n: u32) -> Result<ClosedMatrix> {
    match regime {
        ClosedRegime::Zero => a_closed_zero(wp, m, n),
        ClosedRegime::Resonant(r) => a_closed_resonant(wp, &r, m, n),
    }
}

fn a_closed_zero(wp: &WaveParams, m: u32, n: u32) -> Result<ClosedMatrix> {
    let kappa = wp.kappa;
    let mu = wp.mu0;
    let (s, c) = (kappa.sinh(), kappa.cosh());
    let (s2, c2) = (s * s, c * c);
    let rows = match (m, n) {
        (0, 0) => vec![
            vec![re(1.0), Z, Z, Z],
            vec![Z, re(1.0), Z, Z],
            vec![Z, Z, re(1.0), Z],
            vec![Z, Z, re(wp.period), re(1.0)],
        ],
        (1, 0) => {
            let d = re(4.0 * PI * c.powi(3) / (mu * s * (s2 - mu + 1.0)));
            let a41 = re(4.0 * PI * (s2 + 1.0) / (mu * (mu - 1.0) * s));
            vec![
                vec![d, Z, Z, Z],
                vec![Z, d, Z, Z],
                vec![Z, Z, re(2.0 * PI * c * (mu + 1.0) / (mu * s * (1.0 - mu))), Z],
                vec![a41, a41, re(4.0 * PI * PI * (s2 + 1.0) / (mu * mu * s2 * (1.0 - mu))), re(2.0 * PI / kappa)],
            ]
        }
        (0, 1) => {
            let a13 = re(PI * (2.0 * s2 + 3.0) / (s2 - mu + 1.0));
            let e2 = (2.0 * kappa).exp();
            let a41 = I * 4.0 * PI * e2 * (mu - 4.0 * c2) * (c2 - 1.0) / (((4.0 * kappa).exp() - 1.0) * (mu - 1.0));
            vec![
                vec![Z, Z, a13, Z],
                vec![Z, Z, a13, Z],
                vec![Z, Z, Z, Z],
                vec![cx(a41), cx(-a41), re(2.0 * PI * c * (mu * mu + mu + 1.0) / (mu * (mu - 1.0))), Z],
            ]
        }
        (2, 0) => {
            let a11 = C64::new(
                8.0 * PI * PI * c.powi(6) / (mu * mu * (mu - c2).powi(2) * (c2 - 1.0)),
                2.0 * PI * c.powi(4) * (c.powi(4) + 4.0 * mu * mu * c2 - 3.0 * mu * mu - 2.0 * mu * c2)
                    / (mu * mu * (mu - c2).powi(3) * (c2 - 1.0)),
            );
            let a31 = re(4.0 * PI * (s2 + 1.0) * (s2 - 3.0 * mu * s2 - 2.0 * mu + mu * mu + 1.0)
                / (mu * s * (mu - 1.0).powi(2) * (s2 - mu + 1.0)));
            let a34 = re(2.0 * PI * c * (c + s) / (mu + c * s + c2 - mu * c2 - mu * c * s - 1.0));
            let a44 = re(-2.0 * PI * PI * (s2 + 1.0) / (mu * mu * s2 * (mu - 1.0)));
            vec![
                vec![cx(a11), Z, ABSENT, Z],
                vec![Z, cx(a11.conj()), ABSENT, Z],
                vec![a31, a31, ABSENT, a34],
                vec![ABSENT, ABSENT, ABSENT, a44],
            ]
        }
        (1, 1) => {
            let a11 = re(-2.0 * PI * (c + 2.0 * c.powi(3)) / ((mu - c2) * (mu - 1.0)));
            let a14 = re(2.0 * PI * (s2 + 1.0) / (s2 - mu + 1.0));
            let c4 = c.powi(4);
            let num = (4.0 * c4 + 4.0 * s * c.powi(3) - 5.0 * c2 - 3.0 * s * c + 1.0)
                * (-2.0 * c4 * mu * mu - 4.0 * c4 * mu + 2.0 * c4 + 3.0 * c2 * mu * mu + 2.0 * c2 * mu - mu.powi(3));
            let den = c * (mu - 1.0).powi(2) * (mu - c2) * (-4.0 * c.powi(3) - 4.0 * s * c2 + 3.0 * c + s);
            let a31 = cx(-2.0 * PI * I * num / den);
            vec![
                vec![a11, a11, ABSENT, a14],
                vec![a11, a11, ABSENT, a14],
                vec![a31, ABSENT, ABSENT, Z],
                vec![ABSENT, ABSENT, ABSENT, ABSENT],
            ]
        }
        (0, 2) => {
            let (s4, s6) = (s2 * s2, s2 * s2 * s2);
            let num = 24.0 * s2 - 21.0 * mu * s2 - 20.0 * mu * s4 - 8.0 * mu * s6 - 9.0 * mu
                + 40.0 * s4
                + 16.0 * s6
                + 15.0 * mu * mu * s2
                + 16.0 * mu * mu * s4
                + 8.0 * mu * mu * s6
                + 9.0 * mu * mu;
            let a11 = cx(-I * mu * PI * num / (4.0 * (s2 + 1.0) * (mu - 1.0) * (s2 - mu + 1.0)));
            vec![
                vec![a11, ABSENT, ABSENT, Z],
                vec![ABSENT, ABSENT, ABSENT, Z],
                vec![ABSENT, ABSENT, ABSENT, Z],
                vec![ABSENT, ABSENT, ABSENT, Z],
            ]
        }
        _ => return Err(Error::Domain(format!("no closed form for order ({m},{n})"))),
    };
    Ok(ClosedMatrix::from_rows(rows))
}

/// Diagonal coefficient `2k s(2)/(k s(2) + σ s(2) + 2kσ − 2k²)` of `x e^{ikx}`.
fn a10_diag_slope(sigma: f64, k: f64) -> f64 {
    let s2 = (2.0 * k).sinh();
    2.0 * k * s2 / (k * s2 + sigma * s2 + 2.0 * k * sigma - 2.0 * k * k)
}

/// Constants of the off-diagonal `a^(1,0)` entries, `(a_{12,c}, a_{21,c})`.
pub fn a10_offdiag_consts(wp: &WaveParams, sigma: f64, k2: f64, k4: f64) -> (C64, C64) {
    let (s2, c2, s4, c4) = (k2.sinh(), k2.cosh(), k4.sinh(), k4.cosh());
    let (d2, d4) = ((2.0 * k2).sinh(), (2.0 * k4).sinh());
    let sg = sigma;
    let n12 = k2 * k4 * k4 * c4 * s2 + k2 * k2 * k4 * c2 * s4 + 2.0 * k2 * k2 * k4 * c4 * s2 - k2 * sg * sg * c4 * s2
        + k4 * sg * sg * c2 * s4
        - 2.0 * k2 * k4 * sg * c2 * s4
        - 2.0 * k2 * k4 * sg * c4 * s2;
    let d12 = wp.kappa * (k2 + k4) * (k2 - sg) * (k2 * d2 + sg * d2 + 2.0 * k2 * sg - 2.0 * k2 * k2);
    let n21 = 2.0 * k2 * k4 * k4 * c2 * s4 + k2 * k4 * k4 * c4 * s2 + k2 * k2 * k4 * c2 * s4 + k2 * sg * sg * c4 * s2
        - k4 * sg * sg * c2 * s4
        - 2.0 * k2 * k4 * sg * c2 * s4
        - 2.0 * k2 * k4 * sg * c4 * s2;
    let d21 = wp.kappa * (k2 + k4) * (k4 - sg) * (k4 * d4 + sg * d4 + 2.0 * k4 * sg - 2.0 * k4 * k4);
    (-I * n12 / d12, I * n21 / d21)
}

/// Printed `a^(1,0)(x)` above the critical frequency, as a 2×2 matrix at `x`.
pub fn a10_high_at(wp: &WaveParams, sigma: f64, k2: f64, k4: f64, x: f64) -> CMatrix {
    let (e2, e4) = ((I * k2 * x).exp(), (I * k4 * x).exp());
    let (c12, c21) = a10_offdiag_consts(wp, sigma, k2, k4);
    let mut m = CMatrix::zeros(2);
    m.set(0, 0, a10_diag_slope(sigma, k2) * x * e2);
    m.set(0, 1, c12 * (e2 - e4));
    m.set(1, 0, c21 * (e4 - e2));
    m.set(1, 1, a10_diag_slope(sigma, k4) * x * e4);
    m
}

fn a_closed_resonant(wp: &WaveParams, r: &Resonance, m: u32, n: u32) -> Result<ClosedMatrix> {
    let t = wp.period;
    let e4 = (I * r.k4 * t).exp();
    let rows = match (m, n) {
        (0, 0) => vec![vec![cx(e4), Z], vec![Z, cx(e4)]],
        (1, 0) => {
            let k2 = r.k4 + r.order as f64 * wp.kappa;
            let full = a10_high_at(wp, r.sigma_n, k2, r.k4, t);
            // e^{ik₂T} = e^{ik₄T} on resonance, so the off-diagonals vanish.
            vec![
                vec![cx(a10_diag_slope(r.sigma_n, k2) * t * e4), cx(full.get(0, 1) * 0.0)],
                vec![cx(full.get(1, 0) * 0.0), cx(a10_diag_slope(r.sigma_n, r.k4) * t * e4)],
            ]
        }
        (0, 1) => vec![vec![Z, Z], vec![Z, Z]],
        _ => return Err(Error::Domain(format!("no closed form for order ({m},{n}) at resonance"))),
    };
    Ok(ClosedMatrix::from_rows(rows))
}

/// Lower-order closure of a set of requested orders.
fn closure(orders: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let mut set = BTreeSet::new();
    for &(m, n) in orders {
        for a in 0..=m {
            for b in 0..=n {
                if a + b > 0 {
                    set.insert((a, b));
                }
            }
        }
    }
    let mut v: Vec<_> = set.into_iter().collect();
    v.sort_by_key(|&(m, n)| (m + n, std::cmp::Reverse(m)));
    v
}

/// The term-algebra expansion of every column through the requested orders.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub ctx: ReductionContext,
    pub columns: Vec<ColumnData>,
    pub forcing: Vec<BTreeMap<(u32, u32), StateVec>>,
    pub orders: Vec<(u32, u32)>,
}

/// `a_j(x) = e^{ik_j x}∫₀^x e^{−ik_j x′}F_j dx′`, with `a₄′ = a₃ + F₄` on the
/// Jordan pair.
pub fn solve_a(ctx: &ReductionContext, forcing: &StateVec) -> Vec<TermFunction> {
    let lat = ctx.lat();
    let f = ctx.pr.project_x(forcing);
    let mut a: Vec<TermFunction> = ctx
        .pr
        .modes
        .iter()
        .zip(&f)
        .map(|(md, fj)| {
            let rot = (fj * &TermFunction::exp_x(1.0, -md.k_vec)).canonicalized(lat);
            (&rot.integrate_x(lat) * &TermFunction::exp_x(1.0, md.k_vec)).canonicalized(lat)
        })
        .collect();
    if let Some((i3, i4)) = ctx.jordan() {
        a[i4] = (&a[i3] + &f[i4]).canonicalized(lat).integrate_x(lat);
    }
    a
}

fn dominated_by_other(o: (u32, u32), orders: &[(u32, u32)]) -> bool {
    orders.iter().any(|&(m, n)| m >= o.0 && n >= o.1 && (m, n) != o)
}

/// Runs the recursion for all columns through `orders` (closed downward).
pub fn run_pipeline(ctx: ReductionContext, orders: &[(u32, u32)]) -> Result<Pipeline> {
    let orders = closure(orders);
    if orders.iter().any(|&(m, n)| m + n > 2) {
        return Err(Error::UnsupportedDegree(orders.iter().map(|&(m, n)| m + n).max().unwrap_or(0)));
    }
    let dim = ctx.dim();
    let mut columns: Vec<ColumnData> = (0..dim).map(|k| ColumnData::new(&ctx, k)).collect();
    let mut forcing = vec![BTreeMap::new(); dim];
    for &(m, n) in &orders {
        for k in 0..dim {
            let f = build_forcing(&ctx, &columns[k], m, n)?;
            let a = solve_a(&ctx, &f);
            columns[k].a.insert((m, n), a);
            if dominated_by_other((m, n), &orders) {
                let wc = solve_w(&ctx, k, m, n, &f)?;
                columns[k].w.insert((m, n), wc.w);
            }
            forcing[k].insert((m, n), f);
        }
    }
    Ok(Pipeline { ctx, columns, forcing, orders })
}

impl Pipeline {
    pub fn period(&self) -> f64 {
        self.ctx.wp.period
    }

    /// `a^(m,n)(x)` evaluated at `x`.
    pub fn a_at(&self, m: u32, n: u32, x: f64) -> Result<CMatrix> {
        let dim = self.ctx.dim();
        let lat = self.ctx.lat();
        let mut out = CMatrix::zeros(dim);
        for (k, col) in self.columns.iter().enumerate() {
            let a = col.a.get(&(m, n)).ok_or_else(|| Error::Sequencing(format!("a^({m},{n}) not computed")))?;
            for (j, f) in a.iter().enumerate() {
                out.set(j, k, f.eval(lat, x, 0.0));
            }
        }
        Ok(out)
    }

    pub fn a_t(&self, m: u32, n: u32) -> Result<CMatrix> {
        self.a_at(m, n, self.period())
    }

    /// Column `k` of `a^(m,n)(T)` by Gauss–Legendre quadrature of the
    /// variation-of-parameters integral, with `ny`-node inner products.
    pub fn a_t_quadrature(&self, k: usize, m: u32, n: u32, nx: usize, ny: usize) -> Result<Vec<C64>> {
        let f = self.forcing[k].get(&(m, n)).ok_or_else(|| Error::Sequencing(format!("f^({m},{n}) missing")))?;
        let lat = self.ctx.lat();
        let t = self.period();
        let modes = &self.ctx.pr.modes;
        let mut acc = vec![C64::new(0.0, 0.0); modes.len()];
        let jordan = self.ctx.jordan();
        for (x01, w01) in gauss_legendre01(nx) {
            let x = x01 * t;
            let w = w01 * t;
            let fx = f.at_x(lat, x);
            let proj: Vec<C64> = modes.iter().map(|md| quad_oracle_inner(lat, &fx, &md.psi, ny)).collect();
            for (j, md) in modes.iter().enumerate() {
                acc[j] += w * (I * md.k * (t - x)).exp() * proj[j];
            }
            if let Some((i3, i4)) = jordan {
                acc[i4] += w * (t - x) * proj[i3];
            }
        }
        Ok(acc)
    }
}

/// `a^(m,n)(T)` matrices for one `σ`, with per-entry provenance.
#[derive(Clone, Debug, Serialize)]
pub struct MonodromySeries {
    pub kappa: f64,
    pub sigma: f64,
    pub dim: usize,
    pub period: f64,
    pub resonance: Option<Resonance>,
    pub coeffs: BTreeMap<String, CMatrix>,
    pub provenance: BTreeMap<String, Vec<Provenance>>,
}

pub fn order_key(m: u32, n: u32) -> String {
    format!("{m},{n}")
}

impl MonodromySeries {
    pub fn a(&self, m: u32, n: u32) -> Result<&CMatrix> {
        self.coeffs.get(&order_key(m, n)).ok_or_else(|| Error::Sequencing(format!("a^({m},{n}) not in series")))
    }

    pub fn max_order(&self) -> u32 {
        self.coeffs
            .keys()
            .filter_map(|k| {
                let (m, n) = k.split_once(',')?;
                Some(m.parse::<u32>().ok()? + n.parse::<u32>().ok()?)
            })
            .max()
            .unwrap_or(0)
    }

    /// `X(T) = Σ a^(m,n)(T) δ^m ε^n` over the stored orders.
    pub fn monodromy(&self, delta: C64, eps: f64) -> CMatrix {
        self.monodromy_complex(delta, C64::new(eps, 0.0))
    }

    /// As [`Self::monodromy`] with complex `ε`, for contour integrals.
    pub fn monodromy_complex(&self, delta: C64, eps: C64) -> CMatrix {
        let mut x = CMatrix::zeros(self.dim);
        for (key, a) in &self.coeffs {
            let (m, n) = key.split_once(',').expect("order key");
            let (m, n): (i32, i32) = (m.parse().expect("order"), n.parse().expect("order"));
            x = x.add(&a.scale(delta.powi(m) * eps.powi(n)));
        }
        x
    }
}

/// Builds the series at `σ = 0` or at the resonance carried by `ctx`, taking
/// closed-form entries where they exist and pipeline values elsewhere.
pub fn build_series(ctx: ReductionContext, max_order: u32) -> Result<MonodromySeries> {
    if max_order > 2 {
        return Err(Error::UnsupportedDegree(max_order));
    }
    let orders: Vec<_> = ORDERS.iter().copied().filter(|&(m, n)| m + n <= max_order).collect();
    series_for(ctx, &orders, true)
}

/// Series over the given orders (closed downward). With `prefer_closed`
/// unset every entry comes from the pipeline.
pub fn series_for(ctx: ReductionContext, orders: &[(u32, u32)], prefer_closed: bool) -> Result<MonodromySeries> {
    let regime = match (ctx.sigma(), ctx.resonance) {
        _ if !prefer_closed => None,
        (s, _) if s == 0.0 => Some(ClosedRegime::Zero),
        (_, Some(r)) => Some(ClosedRegime::Resonant(r)),
        _ => None,
    };
    let wp = ctx.wp;
    let sigma = ctx.sigma();
    let resonance = ctx.resonance;
    let dim = ctx.dim();
    let pipe = run_pipeline(ctx, orders)?;
    let mut coeffs = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    let mut all = vec![(0, 0)];
    all.extend(pipe.orders.iter().copied());
    for (m, n) in all {
        let mut out = pipe.a_t(m, n)?;
        let mut prov = vec![Provenance::Pipeline; dim * dim];
        if let Some(cm) = regime.and_then(|r| a_closed(&wp, r, m, n).ok()) {
            for i in 0..dim {
                for j in 0..dim {
                    if let Ok(v) = cm.get(i, j) {
                        out.set(i, j, v);
                        prov[i * dim + j] = Provenance::ClosedForm;
                    }
                }
            }
        }
        coeffs.insert(order_key(m, n), out);
        provenance.insert(order_key(m, n), prov);
    }
    Ok(MonodromySeries { kappa: wp.kappa, sigma, dim, period: wp.period, resonance, coeffs, provenance })
}

/// Periodic Evans function `det(e^{ikT}I − X(T))` of the truncated series at
/// `λ = iσ + δ`.
pub fn evans_value(ms: &MonodromySeries, lambda: C64, k: f64, eps: f64) -> Result<C64> {
    evans_value_complex(ms, lambda, C64::new(k, 0.0), C64::new(eps, 0.0))
}

/// [`evans_value`] continued to complex `k` and `ε`.
pub fn evans_value_complex(ms: &MonodromySeries, lambda: C64, k: C64, eps: C64) -> Result<C64> {
    let delta = lambda - I * ms.sigma;
    let x = ms.monodromy_complex(delta, eps);
    let m = CMatrix::identity(ms.dim).scale((I * k * ms.period).exp()).add(&x.scale(C64::new(-1.0, 0.0)));
    m.det()
}

/// True when `(δ, ε)` lies inside the trusted neighborhood.
pub fn within_guard(delta: C64, eps: f64) -> bool {
    delta.norm() <= VALIDITY_GUARD && eps.abs() <= VALIDITY_GUARD
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::resonance_sigma;

    fn rel(a: C64, b: C64, scale: f64) -> f64 {
        (a - b).norm() / b.norm().max(scale)
    }

    #[test]
    fn det_matches_permutation_sum() {
        let mut m = CMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                m.set(i, j, C64::new(((i * 7 + j * 3) as f64).sin() + 0.5, ((i * j) as f64 + 0.3).cos()));
            }
        }
        // Leibniz formula as the reference.
        let mut want = C64::new(0.0, 0.0);
        let perms = permutations(4);
        for p in perms {
            let mut sign = 1.0;
            for a in 0..4 {
                for b in a + 1..4 {
                    if p[a] > p[b] {
                        sign = -sign;
                    }
                }
            }
            let mut prod = C64::new(sign, 0.0);
            for (r, &c) in p.iter().enumerate() {
                prod *= m.get(r, c);
            }
            want += prod;
        }
        assert!((m.det().unwrap() - want).norm() < 1e-10 * want.norm(), "{} vs {want}", m.det().unwrap());
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = vec![];
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn closed_forms_flag_absent_entries() {
        let wp = WaveParams::new(1.2).unwrap();
        let a20 = a_closed(&wp, ClosedRegime::Zero, 2, 0).unwrap();
        assert_eq!(a20.get(0, 2), Err(Error::AbsentEntry(1, 3)));
        assert!((a20.get(1, 1).unwrap() - a20.get(0, 0).unwrap().conj()).norm() < 1e-15);
        let a10 = a_closed(&wp, ClosedRegime::Zero, 1, 0).unwrap();
        assert!((a10.get(3, 3).unwrap().re - 2.0 * PI / 1.2).abs() < 1e-14);
        let a02 = a_closed(&wp, ClosedRegime::Zero, 0, 2).unwrap();
        for j in 0..4 {
            assert_eq!(a02.get(j, 3).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn first_order_pipeline_matches_closed_forms() {
        for kappa in [0.9, 1.4] {
            let wp = WaveParams::new(kappa).unwrap();
            let ctx = ReductionContext::new(&wp, 0.0).unwrap();
            let p = run_pipeline(ctx, &[(1, 0), (0, 1)]).unwrap();
            for (m, n) in [(1, 0), (0, 1)] {
                let got = p.a_t(m, n).unwrap();
                let cm = a_closed(&wp, ClosedRegime::Zero, m, n).unwrap();
                let scale = got.max_abs();
                for i in 0..4 {
                    for j in 0..4 {
                        let e = rel(got.get(i, j), cm.get(i, j).unwrap(), scale);
                        assert!(e < 1e-9, "kappa {kappa} a^({m},{n})[{},{}]: {} vs {}", i + 1, j + 1, got.get(i, j), cm.get(i, j).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn quadrature_oracle_agrees_with_term_algebra() {
        let wp = WaveParams::new(1.1).unwrap();
        let ctx = ReductionContext::new(&wp, 0.0).unwrap();
        let p = run_pipeline(ctx, &[(1, 0), (0, 1)]).unwrap();
        for (m, n) in [(1, 0), (0, 1)] {
            let at = p.a_t(m, n).unwrap();
            for k in 0..4 {
                let q = p.a_t_quadrature(k, m, n, 128, 64).unwrap();
                for j in 0..4 {
                    assert!((q[j] - at.get(j, k)).norm() < 1e-9 * (1.0 + at.max_abs()), "({m},{n}) [{j},{k}]");
                }
            }
        }
    }

    #[test]
    fn resonant_first_order() {
        let wp = WaveParams::new(1.5).unwrap();
        let ctx = ReductionContext::at_resonance(&wp, 2).unwrap();
        let r = ctx.resonance.unwrap();
        let p = run_pipeline(ctx, &[(1, 0), (0, 1)]).unwrap();
        let a01 = p.a_t(0, 1).unwrap();
        assert!(a01.max_abs() < 1e-10, "{a01:?}");
        let got = p.a_t(1, 0).unwrap();
        let cm = a_closed(&wp, ClosedRegime::Resonant(r), 1, 0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel(got.get(i, j), cm.get(i, j).unwrap(), got.max_abs()) < 1e-9, "[{i},{j}] {:?}", got);
            }
        }
        // the closed-form a^(1,0)(x) at an interior point
        let x = 0.37 * wp.period;
        let full = a10_high_at(&wp, r.sigma_n, r.k4 + 2.0 * wp.kappa, r.k4, x);
        let gx = p.a_at(1, 0, x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel(gx.get(i, j), full.get(i, j), gx.max_abs()) < 1e-9, "x: [{i},{j}] {} vs {}", gx.get(i, j), full.get(i, j));
            }
        }
    }

    #[test]
    fn second_order_pipeline_matches_closed_forms() {
        let wp = WaveParams::new(1.2).unwrap();
        let ctx = ReductionContext::new(&wp, 0.0).unwrap();
        let p = run_pipeline(ctx, &ORDERS).unwrap();
        for (m, n) in [(2, 0), (1, 1), (0, 2)] {
            let got = p.a_t(m, n).unwrap();
            let cm = a_closed(&wp, ClosedRegime::Zero, m, n).unwrap();
            let scale = got.max_abs();
            for i in 0..4 {
                for j in 0..4 {
                    if let Ok(v) = cm.get(i, j) {
                        assert!(rel(got.get(i, j), v, scale) < 1e-9, "a^({m},{n})[{},{}]: {} vs {v}", i + 1, j + 1, got.get(i, j));
                    }
                }
            }
        }
        // Entries with no closed form still obey the structural facts.
        let a20 = p.a_t(2, 0).unwrap();
        assert!((a20.get(1, 1) - a20.get(0, 0).conj()).norm() < 1e-12 * a20.max_abs());
        for n in [1, 2] {
            let a = p.a_t(0, n).unwrap();
            for j in 0..4 {
                assert!(a.get(j, 3).norm() < 1e-12, "a^(0,{n})[{},4] = {}", j + 1, a.get(j, 3));
            }
        }
    }

    #[test]
    fn resonant_second_order_against_quadrature() {
        let wp = WaveParams::new(1.5).unwrap();
        for n in [2, 3] {
            let ctx = ReductionContext::at_resonance(&wp, n).unwrap();
            let p = run_pipeline(ctx, &[(1, 0), (0, 2)]).unwrap();
            let at = p.a_t(0, 2).unwrap();
            for k in 0..2 {
                let q = p.a_t_quadrature(k, 0, 2, 160, 64).unwrap();
                for j in 0..2 {
                    assert!((q[j] - at.get(j, k)).norm() < 1e-9 * (1.0 + at.max_abs()), "N={n} [{j},{k}] {} vs {}", q[j], at.get(j, k));
                }
            }
            // a_ij^(0,2) ∈ i·e^{ik₄T}·R
            let phase = (I * wp.period * p.ctx.resonance.unwrap().k4).exp();
            for i in 0..2 {
                for j in 0..2 {
                    let v = at.get(i, j) / (I * phase);
                    assert!(v.im.abs() < 1e-10 * at.max_abs(), "N={n} [{i},{j}] {v}");
                }
            }
        }
    }

    #[test]
    fn off_resonance_couples_the_modes() {
        let wp = WaveParams::new(1.5).unwrap();
        let r2 = resonance_sigma(&wp, 2).unwrap();
        let r3 = resonance_sigma(&wp, 3).unwrap();
        let ctx = ReductionContext::new(&wp, 0.5 * (r2.sigma_n + r3.sigma_n)).unwrap();
        let p = run_pipeline(ctx, &[(0, 1)]).unwrap();
        let a = p.a_t(0, 1).unwrap();
        assert!(a.get(0, 1).norm() > 1e-6 && a.get(1, 0).norm() > 1e-6, "{a:?}");
        let q = p.a_t_quadrature(1, 0, 1, 160, 64).unwrap();
        assert!((q[0] - a.get(0, 1)).norm() < 1e-9 * (1.0 + a.max_abs()));
    }

    #[test]
    fn translation_invariance() {
        for kappa in [0.8, 1.3, 2.0] {
            let wp = WaveParams::new(kappa).unwrap();
            let ms = build_series(ReductionContext::new(&wp, 0.0).unwrap(), 2).unwrap();
            for eps in [1e-2, 1e-3] {
                let scale = evans_value(&ms, C64::new(eps, 0.0), 0.0, eps).unwrap().norm();
                for k in -3..=3 {
                    let d = evans_value(&ms, C64::new(0.0, 0.0), k as f64 * kappa, eps).unwrap();
                    assert!(d.norm() < 1e-10 * scale, "kappa {kappa} K {k}: {d}");
                }
            }
        }
    }
}
