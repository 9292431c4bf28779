//! Center-manifold corrections `w_k^(m,n)(x;σ)`: forcing assembly and the
//! resolvent solve on the complement of the reduced space.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::bvp::{homogeneous, neumann_at_bottom, particular, value_at};
use crate::dispersion::{resonance_sigma, Resonance, WaveParams};
use crate::eigensystem::{modes_at, modes_on, Projector};
use crate::error::{Error, Result};
use crate::funcspace::{inner, FrequencyVector, Lattice, StateVec, TermFunction};
use crate::operator_b::{apply_b, BContext, BOrder};
use crate::stokes::{build_stokes, StokesExpansion};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Relative size of a boundary-condition defect accepted on a singular block.
pub const SOLVABILITY_TOL: f64 = 1e-8;

/// Everything the expansion at one `σ` needs: the wave, `B`, and the modes.
#[derive(Clone, Debug)]
pub struct ReductionContext {
    pub wp: WaveParams,
    pub se: StokesExpansion,
    pub b: BContext,
    pub pr: Projector,
    pub resonance: Option<Resonance>,
}

impl ReductionContext {
    pub fn new(wp: &WaveParams, sigma: f64) -> Result<Self> {
        let se = build_stokes(wp)?;
        let b = BContext::new(&se);
        let pr = modes_at(wp, sigma)?;
        Ok(Self { wp: *wp, se, b, pr, resonance: None })
    }

    /// At `σ_N`, on a lattice where `k₂ = k₄ + Nκ` holds exactly.
    pub fn at_resonance(wp: &WaveParams, n: i32) -> Result<Self> {
        let r = resonance_sigma(wp, n)?;
        let se = build_stokes(wp)?;
        let b = BContext::new(&se);
        let pr = modes_on(wp, r.sigma_n, Lattice::resonant(wp.kappa, r.k4, n))?;
        Ok(Self { wp: *wp, se, b, pr, resonance: Some(r) })
    }

    pub fn sigma(&self) -> f64 {
        self.pr.sigma
    }

    pub fn lat(&self) -> &Lattice {
        &self.pr.lat
    }

    pub fn dim(&self) -> usize {
        self.pr.modes.len()
    }

    /// Position of the Jordan pair `(3, 4)` at `σ = 0`, as `(idx3, idx4)`.
    pub fn jordan(&self) -> Option<(usize, usize)> {
        if self.sigma() != 0.0 {
            return None;
        }
        let i3 = self.pr.modes.iter().position(|m| m.j == 3)?;
        let i4 = self.pr.modes.iter().position(|m| m.j == 4)?;
        Some((i3, i4))
    }

    /// Column `k` of `a^(0,0)(x)`.
    pub fn base_column(&self, k: usize) -> Vec<TermFunction> {
        let mut col = vec![TermFunction::zero(); self.dim()];
        col[k] = TermFunction::exp_x(1.0, self.pr.modes[k].k_vec);
        if let Some((i3, i4)) = self.jordan() {
            if k == i3 {
                col[i4] = TermFunction::poly_x(1.0, 1);
            }
        }
        col
    }
}

/// One correction together with the forcing that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct WCorrection {
    pub k: usize,
    pub m: u32,
    pub n: u32,
    pub w: StateVec,
    pub forcing: StateVec,
}

/// Lower-order data of one column: `a_·k^(m,n)(x)` and `w_k^(m,n)(x)`.
#[derive(Clone, Debug, Default)]
pub struct ColumnData {
    pub a: BTreeMap<(u32, u32), Vec<TermFunction>>,
    pub w: BTreeMap<(u32, u32), StateVec>,
}

impl ColumnData {
    pub fn new(ctx: &ReductionContext, k: usize) -> Self {
        let mut c = Self::default();
        c.a.insert((0, 0), ctx.base_column(k));
        c.w.insert((0, 0), StateVec::zero());
        c
    }
}

/// `f_k^(m,n) = Σ B^(m′,n′)(w_k^(m−m′,n−n′) + Σ_j a_jk^(m−m′,n−n′) φ_j)`.
pub fn build_forcing(ctx: &ReductionContext, col: &ColumnData, m: u32, n: u32) -> Result<StateVec> {
    if m + n == 0 || m + n > 2 {
        return Err(Error::UnsupportedDegree(m + n));
    }
    let lat = ctx.lat();
    let mut f = StateVec::zero();
    for mp in 0..=m {
        for np in 0..=n {
            if mp + np == 0 {
                continue;
            }
            let lower = (m - mp, n - np);
            let a = col
                .a
                .get(&lower)
                .ok_or_else(|| Error::Sequencing(format!("a^({},{}) missing", lower.0, lower.1)))?;
            let w = col
                .w
                .get(&lower)
                .ok_or_else(|| Error::Sequencing(format!("w^({},{}) missing", lower.0, lower.1)))?;
            let u = w + &ctx.pr.reconstruct(a);
            if u.is_zero() {
                continue;
            }
            f = &f + &apply_b(&ctx.b, BOrder { m: mp, n: np }, lat, ctx.sigma(), &u)?;
        }
    }
    Ok(f.canonicalized(lat))
}

/// Groups a state vector into `(frequency, x-power)` blocks of y-profiles.
fn blocks(u: &StateVec) -> BTreeMap<(FrequencyVector, u32), StateVec> {
    let mut out: BTreeMap<(FrequencyVector, u32), StateVec> = BTreeMap::new();
    for (slot, f) in [&u.phi, &u.upsilon, &u.eta].into_iter().enumerate() {
        for (key, prof) in f.split_x() {
            let e = out.entry(key).or_insert_with(StateVec::zero);
            match slot {
                0 => e.phi = &e.phi + &prof,
                1 => e.upsilon = &e.upsilon + &prof,
                _ => e.eta = &e.eta + &prof,
            }
        }
    }
    out
}

/// `(iω − L(iσ))W = G` for y-only `G` in the complement, with `W` in the
/// complement as well.
pub fn resolve(ctx: &ReductionContext, wv: FrequencyVector, g: &StateVec) -> Result<StateVec> {
    let lat = ctx.lat();
    let mu0 = ctx.wp.mu0;
    let sigma = ctx.sigma();
    let omega = lat.value(wv);
    let rhs = g.upsilon.scale(mu0) + g.phi.scale(I * (omega + sigma));
    let phi_p = neumann_at_bottom(lat, wv, &particular(lat, wv, &rhs)?);
    let (hc, _) = homogeneous(wv);
    let assemble = |phi: &TermFunction, g1: &TermFunction| {
        let ups = (phi.scale(I * (omega - sigma)) - g1.clone()).scale(1.0 / mu0);
        let eta = TermFunction::constant(value_at(lat, &ups, 1.0));
        StateVec::new(phi.clone(), ups, eta)
    };
    let top = |phi: &TermFunction| {
        value_at(lat, &phi.dy(lat), 1.0) - value_at(lat, phi, 1.0) * (omega - sigma).powi(2) / mu0
    };
    let want = value_at(lat, &g.eta, 0.0) + I * (omega - sigma) / mu0 * value_at(lat, &g.phi, 1.0);
    let defect = top(&phi_p) - want;
    let dh = top(&hc);
    let wp_vec = assemble(&phi_p, &g.phi);
    let h_vec = assemble(&hc, &TermFunction::zero());

    let matched: Vec<_> = ctx.pr.modes.iter().filter(|md| lat.canonicalize(md.k_vec) == wv).collect();
    let scale = 1.0 + g.max_coeff();
    if matched.is_empty() {
        if dh.norm() < 1e-10 * (1.0 + omega.abs()) {
            return Err(Error::Consistency(format!("frequency {wv} is numerically singular")));
        }
        return Ok(&wp_vec + &h_vec.scale(-defect / dh));
    }
    // On an eigenfrequency the homogeneous part is fixed by the complement
    // condition and the boundary condition must hold on its own.
    let best = matched
        .iter()
        .map(|md| Ok((inner(lat, &h_vec, &md.psi)?, *md)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max_by(|a, b| a.0.norm().total_cmp(&b.0.norm()))
        .expect("nonempty");
    let c = -inner(lat, &wp_vec, &best.1.psi)? / best.0;
    let w = &wp_vec + &h_vec.scale(c);
    if (defect + c * dh).norm() > SOLVABILITY_TOL * scale {
        return Err(Error::Consistency(format!(
            "block at {wv} is not solvable: boundary defect {:.3e}",
            (defect + c * dh).norm()
        )));
    }
    for md in &matched {
        let r = inner(lat, &w, &md.psi)?;
        if r.norm() > SOLVABILITY_TOL * scale {
            return Err(Error::Consistency(format!("block at {wv} leaks into mode {}: {:.3e}", md.j, r.norm())));
        }
    }
    Ok(w)
}

/// Bounded solution of `w_x = L(iσ)w + (1 − Π)f` with `Πw = 0`.
pub fn solve_w(ctx: &ReductionContext, k: usize, m: u32, n: u32, forcing: &StateVec) -> Result<WCorrection> {
    let lat = ctx.lat();
    let g = ctx.pr.complement(forcing).canonicalized(lat);
    let mut by_freq: BTreeMap<FrequencyVector, BTreeMap<u32, StateVec>> = BTreeMap::new();
    for ((fr, q), b) in blocks(&g) {
        by_freq.entry(fr).or_default().insert(q, b);
    }
    let mut w = StateVec::zero();
    for (fr, powers) in by_freq {
        let top = *powers.keys().max().expect("nonempty");
        let mut above: Option<StateVec> = None;
        for r in (0..=top).rev() {
            let mut rhs = powers.get(&r).cloned().unwrap_or_else(StateVec::zero);
            if let Some(wa) = &above {
                rhs = &rhs - &wa.scale((r + 1) as f64);
            }
            let wr = resolve(ctx, fr, &rhs)?;
            w = &w + &StateVec::new(wr.phi.with_x(fr, r), wr.upsilon.with_x(fr, r), wr.eta.with_x(fr, r));
            above = Some(wr);
        }
    }
    Ok(WCorrection { k, m, n, w: w.canonicalized(lat), forcing: forcing.clone() })
}

/// `w_x − L(iσ)w − (1 − Π)f`, the residual of the correction equation.
pub fn w_residual(ctx: &ReductionContext, wc: &WCorrection) -> Result<StateVec> {
    let lat = ctx.lat();
    let lw = crate::eigensystem::apply_l(lat, ctx.wp.mu0, I * ctx.sigma(), &wc.w)?;
    let wx = StateVec::new(wc.w.phi.dx(lat), wc.w.upsilon.dx(lat), wc.w.eta.dx(lat));
    let g = ctx.pr.complement(&wc.forcing);
    Ok((&(&wx - &lw) - &g).canonicalized(lat))
}
