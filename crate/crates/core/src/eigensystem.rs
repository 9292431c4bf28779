//! `L(λ)`, its adjoint, the purely imaginary eigenmodes at `λ = iσ` and the
//! spectral projection onto them.

use num_complex::Complex64 as C64;

use crate::bvp;
use crate::dispersion::{roots_k, Regime, WaveParams};
use crate::error::{Error, Result};
use crate::funcspace::{inner, inner_x, FrequencyVector, Lattice, StateVec, TermFunction};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Width of the band around `κ = 1` where the adjoint modes at `σ = 0` use
/// the expanded (removable-singularity) form.
pub const KAPPA_ONE_BAND: f64 = 1e-6;

/// Tolerance for the a-posteriori biorthogonality check of constructed modes.
pub const BIORTH_ABORT: f64 = 1e-8;

/// Relative tolerance for the `dom(L)` precondition.
const DOM_TOL: f64 = 1e-10;

/// `L(λ)u = (λφ + μ₀υ, −μ₀⁻¹(φ_yy + λ²φ + μ₀λυ), λη − φ_y(1))`.
pub fn apply_l(lat: &Lattice, mu0: f64, lambda: C64, u: &StateVec) -> Result<StateVec> {
    let scale = u.max_coeff().max(1.0);
    if u.dom_residual(lat) > DOM_TOL * scale {
        return Err(Error::Domain("apply_l: input violates dom(L)".into()));
    }
    Ok(apply_l_unchecked(lat, mu0, lambda, u))
}

/// [`apply_l`] without the domain check, for callers that already know.
pub fn apply_l_unchecked(lat: &Lattice, mu0: f64, lambda: C64, u: &StateVec) -> StateVec {
    let phi_yy = u.phi.dy(lat).dy(lat);
    let first = &u.phi.scale(lambda) + &u.upsilon.scale(mu0);
    let second = (&(&phi_yy + &u.phi.scale(lambda * lambda)) + &u.upsilon.scale(mu0 * lambda)).scale(-1.0 / mu0);
    let third = &u.eta.scale(lambda) - &u.phi.dy(lat).at_y(lat, 1.0);
    StateVec::new(first, second, third)
}

/// `φ_p` with `φ_p'' − φ_p = μ₀⁻¹(1 + λ*²)υ` and zero slope at both ends.
pub fn phi_p(lat: &Lattice, mu0: f64, lambda: C64, upsilon: &TermFunction) -> Result<TermFunction> {
    let factor = (1.0 + lambda.conj() * lambda.conj()) / mu0;
    let unit = FrequencyVector::UNIT;
    let cosh1 = TermFunction::cosh_y(1.0, unit, 0);
    let mut out = TermFunction::zero();
    for ((freq, q), prof) in upsilon.split_x() {
        let part = bvp::particular(lat, unit, &prof.scale(factor))?;
        let part = bvp::neumann_at_bottom(lat, unit, &part);
        let slope = bvp::value_at(lat, &part.dy(lat), 1.0);
        let fixed = &part - &cosh1.scale(slope / 1f64.sinh());
        out = &out + &fixed.with_x(freq, q);
    }
    Ok(out)
}

/// `L(λ)†u = (λ*φ + μ₀⁻¹υ + φ_p, μ₀φ − μ₀φ_yy − λ*υ, μ₀φ_y(1) + λ*η)`.
pub fn apply_l_adjoint(lat: &Lattice, mu0: f64, lambda: C64, u: &StateVec) -> Result<StateVec> {
    let lc = lambda.conj();
    let pp = phi_p(lat, mu0, lambda, &u.upsilon)?;
    let first = &(&u.phi.scale(lc) + &u.upsilon.scale(1.0 / mu0)) + &pp;
    let second = &(&u.phi.scale(mu0) - &u.phi.dy(lat).dy(lat).scale(mu0)) - &u.upsilon.scale(lc);
    let third = &u.phi.dy(lat).at_y(lat, 1.0).scale(mu0) + &u.eta.scale(lc);
    Ok(StateVec::new(first, second, third))
}

/// Residual of the `dom(L†)` conditions `υ(1) + μ₀η = 0`, `φ_y(0) = 0`.
pub fn adjoint_dom_residual(lat: &Lattice, mu0: f64, u: &StateVec) -> f64 {
    let r1 = &u.upsilon.at_y(lat, 1.0) + &u.eta.scale(mu0);
    let r2 = u.phi.dy(lat).at_y(lat, 0.0);
    r1.max_coeff().max(r2.max_coeff())
}

/// An eigenmode `φ_j` of `L(iσ)` with its adjoint partner `ψ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModePair {
    pub j: usize,
    pub k: f64,
    /// `k_j` as a lattice vector (zero for the Jordan pair at `σ = 0`).
    pub k_vec: FrequencyVector,
    pub phi: StateVec,
    pub psi: StateVec,
    /// `p_j`, or `(p_{1,j}, p_{2,j})`; empty for modes with fixed constants.
    pub norm_consts: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    pub sigma: f64,
    pub wp: WaveParams,
    pub lat: Lattice,
    pub modes: Vec<ModePair>,
}

/// `φ_j(σ) = (μ₀cosh(k y), i(k − σ)cosh(k y), i(k − σ)cosh k)`.
fn phi_mode(wp: &WaveParams, sigma: f64, k: f64, kv: FrequencyVector) -> StateVec {
    let ch = TermFunction::cosh_y(1.0, kv, 0);
    let a = I * (k - sigma);
    StateVec::new(ch.scale(wp.mu0), ch.scale(a), TermFunction::constant(a * k.cosh()))
}

/// Adjoint profile `(p₁cosh y + p₂cosh(k y), −iμ₀p₂(k²−1)/(k+σ)·cosh(k y),
/// ip₂(k²−1)/(k+σ)·cosh k)`.
fn psi_two_const(wp: &WaveParams, sigma: f64, k: f64, kv: FrequencyVector, p1: C64, p2: C64) -> StateVec {
    let ch = TermFunction::cosh_y(1.0, kv, 0);
    let c = I * p2 * (k * k - 1.0) / (k + sigma);
    StateVec::new(
        &TermFunction::cosh_y(p1, FrequencyVector::UNIT, 0) + &ch.scale(p2),
        ch.scale(-wp.mu0 * c),
        TermFunction::constant(c * k.cosh()),
    )
}

/// `(p_{1,j}, p_{2,j})` in closed form.
pub fn high_constants(wp: &WaveParams, sigma: f64, k: f64) -> (f64, f64) {
    let s2k = (2.0 * k).sinh();
    let den = (k * k - 1.0) * (k * s2k + sigma * s2k + 2.0 * k * sigma - 2.0 * k * k);
    let p1 = 2.0 * k.cosh() * (sigma * sigma - 1.0) * (k - sigma).powi(2) / (wp.mu0 * wp.mu0 * 1f64.sinh() * den);
    let p2 = (2.0 * k * k - 2.0 * sigma * sigma) / (wp.mu0 * den);
    (p1, p2)
}

/// `ψ₁,₂(0)` first component `i k p/(μ₀²(1−k²))·(cosh k·cosh y/sinh 1 − μ₀cosh(k y))`,
/// switched to an expansion in `h = κ − 1` inside [`KAPPA_ONE_BAND`].
fn psi12_first(wp: &WaveParams, kj: f64, p: C64) -> TermFunction {
    let kappa = wp.kappa;
    let unit = FrequencyVector::UNIT;
    let h = kappa - 1.0;
    if h.abs() >= KAPPA_ONE_BAND {
        let pre = I * kj * p / (wp.mu0 * wp.mu0 * (1.0 - kj * kj));
        let prof = &TermFunction::cosh_y(kappa.cosh() / 1f64.sinh(), unit, 0)
            - &TermFunction::cosh_y(wp.mu0, FrequencyVector::KAPPA, 0);
        return prof.scale(pre);
    }
    // (cosh κ cosh y/sinh 1 − μ₀cosh κy)/(1 − κ) with f(κ) = κ/sinh κ:
    // cosh κ[(f′(1) + f″(1)h/2)cosh y + f y sinh y + (f h/2) y²cosh y] + O(h²).
    let (s1, c1) = (1f64.sinh(), 1f64.cosh());
    let f1 = (s1 - c1) / (s1 * s1);
    let f2 = (-s1.powi(3) - 2.0 * s1 * c1 * (s1 - c1)) / s1.powi(4);
    let f = kappa / kappa.sinh();
    let ck = kappa.cosh();
    let lim = TermFunction::cosh_y(ck * (f1 + 0.5 * f2 * h), unit, 0)
        + TermFunction::sinh_y(ck * f, unit, 1)
        + TermFunction::cosh_y(ck * f * h / 2.0, unit, 2);
    lim.scale(I * kj * p / (wp.mu0 * wp.mu0 * (1.0 + kappa)))
}

fn modes_at_zero(wp: &WaveParams) -> Vec<ModePair> {
    let mu0 = wp.mu0;
    let mut modes = Vec::with_capacity(4);
    for j in 1..=2usize {
        let sign = if j == 1 { -1 } else { 1 };
        let kj = sign as f64 * wp.kappa;
        let kv = FrequencyVector::kappa(sign);
        let ch = TermFunction::cosh_y(1.0, kv, 0);
        let phi = StateVec::new(ch.scale(mu0), ch.scale(I * kj), TermFunction::constant(I * kj * kj.cosh()));
        let p = -I * kj.cosh() / (kj.cosh().powi(2) * kj.sinh() - mu0 * kj.sinh());
        let psi = StateVec::new(psi12_first(wp, kj, p), ch.scale(p), TermFunction::constant(-p / mu0 * kj.cosh()));
        modes.push(ModePair { j, k: kj, k_vec: kv, phi, psi, norm_consts: vec![p] });
    }
    let phi3 = StateVec::new(TermFunction::zero(), TermFunction::constant(1.0), TermFunction::constant(1.0));
    let psi3 = StateVec::new(
        TermFunction::zero(),
        TermFunction::constant(mu0 / (mu0 - 1.0)),
        TermFunction::constant(-1.0 / (mu0 - 1.0)),
    );
    let phi4 = StateVec::new(TermFunction::constant(mu0), TermFunction::zero(), TermFunction::zero());
    let psi4 = StateVec::new(
        (&TermFunction::constant(mu0) - &TermFunction::cosh_y(1.0 / 1f64.sinh(), FrequencyVector::UNIT, 0))
            .scale(1.0 / ((mu0 - 1.0) * mu0)),
        TermFunction::zero(),
        TermFunction::zero(),
    );
    modes.push(ModePair { j: 3, k: 0.0, k_vec: FrequencyVector::ZERO, phi: phi3, psi: psi3, norm_consts: vec![] });
    modes.push(ModePair { j: 4, k: 0.0, k_vec: FrequencyVector::ZERO, phi: phi4, psi: psi4, norm_consts: vec![] });
    modes
}

/// Modes and adjoints at `σ ≥ 0` on the default lattice for that regime.
pub fn modes_at(wp: &WaveParams, sigma: f64) -> Result<Projector> {
    if sigma == 0.0 {
        return modes_on(wp, sigma, Lattice::kappa_only(wp.kappa));
    }
    let p = roots_k(wp, sigma)?;
    let lat = match (p.k1, p.k3) {
        (Some(k1), Some(k3)) if p.regime == Regime::BelowCritical => {
            Lattice::with_negative_roots(wp.kappa, k1, p.k2, k3, p.k4)
        }
        _ => Lattice::new(wp.kappa, p.k2, p.k4),
    };
    modes_on(wp, sigma, lat)
}

/// Modes and adjoints at `σ` with rates expressed on `lat` (which may carry a
/// resonance constraint). The lattice must hold the roots at `σ`.
pub fn modes_on(wp: &WaveParams, sigma: f64, lat: Lattice) -> Result<Projector> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        let pr = Projector { sigma, wp: *wp, lat, modes: modes_at_zero(wp) };
        pr.verify()?;
        return Ok(pr);
    }
    let p = roots_k(wp, sigma)?;
    let mut pairs: Vec<(usize, f64, FrequencyVector)> = vec![(2, p.k2, lat.k2_vec()), (4, p.k4, lat.k4_vec())];
    match p.regime {
        Regime::AtCritical => {
            return Err(Error::Domain("no projector at the critical frequency".into()));
        }
        Regime::BelowCritical => {
            pairs.insert(0, (1, p.k1.unwrap_or(f64::NAN), FrequencyVector::K1));
            pairs.insert(2, (3, p.k3.unwrap_or(f64::NAN), FrequencyVector::K3));
        }
        _ => {}
    }
    for &(_, k, kv) in &pairs {
        if (lat.value(kv) - k).abs() > 1e-9 * (1.0 + k.abs()) {
            return Err(Error::Domain(format!("lattice value {} does not match root {k}", lat.value(kv))));
        }
    }
    let mut modes: Vec<ModePair> = pairs
        .iter()
        .map(|&(j, k, kv)| ModePair {
            j,
            k,
            k_vec: kv,
            phi: phi_mode(wp, sigma, k, kv),
            psi: StateVec::zero(),
            norm_consts: vec![],
        })
        .collect();
    if p.regime == Regime::AboveCritical {
        for m in &mut modes {
            let (p1, p2) = high_constants(wp, sigma, m.k);
            m.psi = psi_two_const(wp, sigma, m.k, m.k_vec, p1.into(), p2.into());
            m.norm_consts = vec![p1.into(), p2.into()];
        }
    } else {
        // Fix (p₁, p₂) from ⟨φ_j, ψ_j⟩ = 1 and ⟨φ_{j′}, ψ_j⟩ = 0 for one other mode.
        let phis: Vec<StateVec> = modes.iter().map(|m| m.phi.clone()).collect();
        for (idx, m) in modes.iter_mut().enumerate() {
            let other = &phis[(idx + 1) % phis.len()];
            let b1 = psi_two_const(wp, sigma, m.k, m.k_vec, C64::new(1.0, 0.0), C64::new(0.0, 0.0));
            let b2 = psi_two_const(wp, sigma, m.k, m.k_vec, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
            // ⟨u, aψ⟩ = a*⟨u, ψ⟩, so solve for the conjugated constants.
            let a11 = inner(&lat, &m.phi, &b1)?;
            let a12 = inner(&lat, &m.phi, &b2)?;
            let a21 = inner(&lat, other, &b1)?;
            let a22 = inner(&lat, other, &b2)?;
            let det = a11 * a22 - a12 * a21;
            if det.norm() < 1e-300 {
                return Err(Error::Consistency("singular adjoint normalization".into()));
            }
            let q1 = a22 / det;
            let q2 = -a21 / det;
            let (p1, p2) = (q1.conj(), q2.conj());
            m.psi = psi_two_const(wp, sigma, m.k, m.k_vec, p1, p2);
            m.norm_consts = vec![p1, p2];
        }
    }
    let pr = Projector { sigma, wp: *wp, lat, modes };
    pr.verify()?;
    Ok(pr)
}

impl Projector {
    /// Largest `|⟨φ_j, ψ_{j′}⟩ − δ_{jj′}|`.
    pub fn biorthogonality_error(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, ma) in self.modes.iter().enumerate() {
            for (b, mb) in self.modes.iter().enumerate() {
                let v = inner(&self.lat, &ma.phi, &mb.psi)?;
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - want).norm());
            }
        }
        Ok(worst)
    }

    fn verify(&self) -> Result<()> {
        let e = self.biorthogonality_error()?;
        if !(e <= BIORTH_ABORT) {
            return Err(Error::Consistency(format!("biorthogonality error {e:.3e} at sigma={}", self.sigma)));
        }
        Ok(())
    }

    pub fn mode(&self, j: usize) -> Option<&ModePair> {
        self.modes.iter().find(|m| m.j == j)
    }

    /// `(⟨u, ψ_j⟩)_j` for an x-independent `u`.
    pub fn project(&self, u: &StateVec) -> Result<Vec<C64>> {
        self.modes.iter().map(|m| inner(&self.lat, u, &m.psi)).collect()
    }

    /// `(⟨u(x), ψ_j⟩)_j` as functions of `x`.
    pub fn project_x(&self, u: &StateVec) -> Vec<TermFunction> {
        self.modes.iter().map(|m| inner_x(&self.lat, u, &m.psi)).collect()
    }

    /// `Σ_j c_j(x) φ_j`.
    pub fn reconstruct(&self, coeffs: &[TermFunction]) -> StateVec {
        self.modes
            .iter()
            .zip(coeffs)
            .fold(StateVec::zero(), |acc, (m, c)| &acc + &m.phi.mul_x(c))
    }

    /// `(1 − Π)u`.
    pub fn complement(&self, u: &StateVec) -> StateVec {
        u - &self.reconstruct(&self.project_x(u))
    }
}

/// Fixed family of test vectors in `dom(L)` built on `lat`.
pub fn dom_samples(lat: &Lattice) -> Vec<StateVec> {
    let k = FrequencyVector::KAPPA;
    let mk = |phi: TermFunction, ups: TermFunction| {
        let eta = ups.at_y(lat, 1.0);
        StateVec::new(phi, ups, eta)
    };
    vec![
        mk(TermFunction::cosh_y(1.0, k.scale(2), 0), TermFunction::poly_y(1.0, 1)),
        mk(TermFunction::poly_y(C64::new(0.3, -0.7), 2), TermFunction::sinh_y(1.0, k, 0)),
        mk(TermFunction::constant(C64::new(0.0, 1.5)), TermFunction::cosh_y(C64::new(0.2, 0.4), k, 1)),
        mk(
            &TermFunction::sinh_y(1.0, k.scale(3), 1) + &TermFunction::poly_y(-0.4, 4),
            TermFunction::constant(C64::new(-1.0, 0.25)),
        ),
    ]
}

/// `max_u |⟨(L(iσ) − ik_j)u, ψ_j⟩|` over [`dom_samples`].
pub fn adjoint_eigen_residual(pr: &Projector, j: usize) -> Result<f64> {
    let m = pr.mode(j).ok_or_else(|| Error::Domain(format!("mode {j} not present at sigma={}", pr.sigma)))?;
    let lambda = I * pr.sigma;
    let mut worst = 0.0f64;
    for u in dom_samples(&pr.lat) {
        let lu = apply_l(&pr.lat, pr.wp.mu0, lambda, &u)?;
        let r = &lu - &u.scale(I * m.k);
        // The Jordan pair at σ = 0: ψ₃ is an eigenvector of L(0)†, ψ₄ is generalized.
        let v = if pr.sigma == 0.0 && j == 4 {
            inner(&pr.lat, &r, &m.psi)? - inner(&pr.lat, &u, &pr.mode(3).expect("mode 3").psi)?
        } else {
            inner(&pr.lat, &r, &m.psi)?
        };
        worst = worst.max(v.norm() / u.max_coeff().max(1.0));
    }
    Ok(worst)
}

/// `‖(L(iσ) − ik_j)φ_j‖` as the largest coefficient.
pub fn eigen_residual(pr: &Projector, j: usize) -> Result<f64> {
    let m = pr.mode(j).ok_or_else(|| Error::Domain(format!("mode {j} not present")))?;
    let lu = apply_l(&pr.lat, pr.wp.mu0, I * pr.sigma, &m.phi)?;
    let target = if pr.sigma == 0.0 && j == 3 { pr.mode(4).expect("mode 4").phi.clone() } else { m.phi.scale(I * m.k) };
    Ok((&lu - &target).max_coeff())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{critical_point, resonance_sigma};
    use crate::funcspace::quad_oracle_inner;

    fn wp(k: f64) -> WaveParams {
        WaveParams::new(k).unwrap()
    }

    #[test]
    fn jordan_pair_at_zero() {
        let w = wp(1.3);
        let pr = modes_at(&w, 0.0).unwrap();
        let z = C64::new(0.0, 0.0);
        let l3 = apply_l(&pr.lat, w.mu0, z, &pr.mode(3).unwrap().phi).unwrap();
        assert_eq!((&l3 - &pr.mode(4).unwrap().phi).max_coeff(), 0.0);
        let l4 = apply_l(&pr.lat, w.mu0, z, &pr.mode(4).unwrap().phi).unwrap();
        assert!(l4.is_zero());
        for j in 1..=4 {
            assert!(eigen_residual(&pr, j).unwrap() < 1e-12);
        }
    }

    #[test]
    fn biorthogonal_across_kappa_and_sigma() {
        for kappa in [0.7, 1.0, 1.0 + 3e-7, 1.3, 1.849, 2.2] {
            let w = wp(kappa);
            let mut sigmas = vec![0.0];
            for n in [2, 3] {
                if let Ok(r) = resonance_sigma(&w, n) {
                    sigmas.push(r.sigma_n);
                }
            }
            for s in sigmas {
                let pr = modes_at(&w, s).unwrap();
                let e = pr.biorthogonality_error().unwrap();
                assert!(e < 1e-10, "kappa {kappa} sigma {s}: {e:e}");
            }
        }
    }

    #[test]
    fn below_critical_matches_closed_constants() {
        let w = wp(1.2);
        let (_, sc) = critical_point(&w).unwrap();
        let pr = modes_at(&w, 0.5 * sc).unwrap();
        assert_eq!(pr.modes.len(), 4);
        assert!(pr.biorthogonality_error().unwrap() < 1e-10);
        for m in &pr.modes {
            let (p1, p2) = high_constants(&w, pr.sigma, m.k);
            assert!((m.norm_consts[0] - p1).norm() < 1e-9 * (1.0 + p1.abs()), "j={} {:?} {p1}", m.j, m.norm_consts);
            assert!((m.norm_consts[1] - p2).norm() < 1e-9 * (1.0 + p2.abs()));
            assert!(eigen_residual(&pr, m.j).unwrap() < 1e-10);
            assert!(adjoint_eigen_residual(&pr, m.j).unwrap() < 1e-10);
        }
    }

    #[test]
    fn adjoint_residuals() {
        let w = wp(1.1);
        let pr = modes_at(&w, 0.0).unwrap();
        for j in 1..=4 {
            assert!(adjoint_eigen_residual(&pr, j).unwrap() < 1e-10, "j={j}");
        }
        let (_, sc) = critical_point(&w).unwrap();
        let pr = modes_at(&w, 2.0 * sc).unwrap();
        assert!(inner(&pr.lat, &pr.mode(2).unwrap().phi, &pr.mode(4).unwrap().psi).unwrap().norm() < 1e-12);
        for j in [2, 4] {
            assert!(adjoint_eigen_residual(&pr, j).unwrap() < 1e-10);
            assert!(eigen_residual(&pr, j).unwrap() < 1e-10);
        }
        assert!(adjoint_eigen_residual(&pr, 1).is_err());
    }

    #[test]
    fn kappa_one_limit() {
        let w = wp(1.0);
        let pr = modes_at(&w, 0.0).unwrap();
        assert!(pr.biorthogonality_error().unwrap() < 1e-10);
        let near = modes_at(&wp(1.0 + 1e-5), 0.0).unwrap();
        let a = pr.mode(2).unwrap().psi.phi.eval(&pr.lat, 0.0, 0.6);
        let b = near.mode(2).unwrap().psi.phi.eval(&near.lat, 0.0, 0.6);
        assert!((a - b).norm() < 1e-4);
    }

    #[test]
    fn adjoint_pairing_with_phi_p() {
        let w = wp(0.9);
        let lat = Lattice::kappa_only(w.kappa);
        let lambda = C64::new(0.3, 0.8);
        let k = FrequencyVector::KAPPA;
        let ups = &TermFunction::cosh_y(C64::new(1.0, 0.5), k, 0) + &TermFunction::poly_y(0.7, 2);
        let eta = ups.at_y(&lat, 1.0).scale(-1.0 / w.mu0);
        let u2 = StateVec::new(TermFunction::cosh_y(0.4, k.scale(2), 0), ups, eta);
        assert!(adjoint_dom_residual(&lat, w.mu0, &u2) < 1e-14);
        let l2 = apply_l_adjoint(&lat, w.mu0, lambda, &u2).unwrap();
        for u1 in dom_samples(&lat) {
            let l1 = apply_l(&lat, w.mu0, lambda, &u1).unwrap();
            let lhs = quad_oracle_inner(&lat, &l1, &u2, 40);
            let rhs = quad_oracle_inner(&lat, &u1, &l2, 40);
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()), "{lhs} {rhs}");
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let w = wp(1.4);
        let (_, sc) = critical_point(&w).unwrap();
        let pr = modes_at(&w, 1.5 * sc).unwrap();
        let u = &pr.mode(2).unwrap().phi.scale(3.0) + &pr.mode(4).unwrap().phi.scale(5.0);
        let c = pr.project(&u).unwrap();
        assert!((c[0] - 3.0).norm() < 1e-10 && (c[1] - 5.0).norm() < 1e-10);
        for v in dom_samples(&pr.lat) {
            let pv = pr.reconstruct(&pr.project_x(&v));
            let ppv = pr.reconstruct(&pr.project_x(&pv));
            assert!((&pv - &ppv).max_coeff() < 1e-10 * (1.0 + pv.max_coeff()));
            let rest = pr.project(&pr.complement(&v)).unwrap();
            assert!(rest.iter().all(|r| r.norm() < 1e-10));
        }
        assert!(apply_l(&pr.lat, w.mu0, C64::new(0.0, 1.0), &StateVec::new(
            TermFunction::poly_y(1.0, 1), TermFunction::zero(), TermFunction::zero())).is_err());
    }
}
