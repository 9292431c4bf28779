//! Linear dispersion relation `(σ − k)² = μ₀ k tanh k`, its branch roots, the
//! critical point and the resonant frequencies `σ_N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::{bisect_newton, expand_bracket};

/// Width of the band around `σ_c` treated as critical. Roots themselves are
/// polished until Newton stalls at machine precision.
pub const ROOT_TOL: f64 = 1e-12;

/// Wave number and derived constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WaveParams {
    pub kappa: f64,
    /// `μ₀ = κ coth κ`.
    pub mu0: f64,
    /// `sinh κ`.
    pub s: f64,
    /// `cosh κ`.
    pub c: f64,
    /// `T = 2π/κ`.
    pub period: f64,
}

impl WaveParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
        }
        let mu0 = if kappa < 1e-8 { 1.0 + kappa * kappa / 3.0 } else { kappa / kappa.tanh() };
        Ok(Self {
            kappa,
            mu0,
            s: kappa.sinh(),
            c: kappa.cosh(),
            period: 2.0 * std::f64::consts::PI / kappa,
        })
    }
}

/// Convenience alias matching the operation name used by the CLI.
pub fn make_wave_params(kappa: f64) -> Result<WaveParams> {
    WaveParams::new(kappa)
}

/// `k tanh k`, nonnegative for all real `k`.
fn ktanh(k: f64) -> f64 {
    k * k.tanh()
}

/// `(σ₊(k), σ₋(k)) = k ± √(μ₀ k tanh k)`.
pub fn sigma_branches(wp: &WaveParams, k: f64) -> (f64, f64) {
    let r = (wp.mu0 * ktanh(k)).sqrt();
    (k + r, k - r)
}

/// `d/dk √(μ₀ k tanh k)`, with the `k → 0` one-sided limit handled.
fn root_derivative(wp: &WaveParams, k: f64) -> f64 {
    if k == 0.0 {
        return wp.mu0.sqrt();
    }
    let t = k.tanh();
    let g = k * t;
    let dg = t + k * (1.0 - t * t);
    0.5 * wp.mu0 * dg / (wp.mu0 * g).sqrt()
}

/// `(σ₊′(k), σ₋′(k))`.
pub fn sigma_branch_derivatives(wp: &WaveParams, k: f64) -> (f64, f64) {
    let d = root_derivative(wp, k);
    (1.0 + d, 1.0 - d)
}

/// Location of the stationary point of `σ₊` on `k < 0` and its value.
pub fn critical_point(wp: &WaveParams) -> Result<(f64, f64)> {
    // σ₊′ → 1 − √μ₀ < 0 as k → 0⁻ and σ₊′ → 1 as k → −∞.
    let f = |k: f64| sigma_branch_derivatives(wp, k).0;
    let (lo, hi) = expand_bracket(&f, -1e-9, -1.0, 2.0)?;
    let second = |k: f64| {
        let h = 1e-6 * (1.0 + k.abs());
        (f(k + h) - f(k - h)) / (2.0 * h)
    };
    let kc = bisect_newton(&f, &second, lo, hi, 0.0)?;
    Ok((kc, sigma_branches(wp, kc).0))
}

/// Position of `σ` relative to the critical frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    AtZero,
    BelowCritical,
    AtCritical,
    AboveCritical,
}

/// Roots `k_j(σ)` of the dispersion relation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub sigma: f64,
    pub regime: Regime,
    pub k1: Option<f64>,
    pub k2: f64,
    pub k3: Option<f64>,
    pub k4: f64,
    pub sigma_c: f64,
    pub k_c: f64,
}

/// All roots at `σ ≥ 0`.
pub fn roots_k(wp: &WaveParams, sigma: f64) -> Result<DispersionPoint> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    let (k_c, sigma_c) = critical_point(wp)?;
    if sigma == 0.0 {
        return Ok(DispersionPoint {
            sigma,
            regime: Regime::AtZero,
            k1: Some(-wp.kappa),
            k2: wp.kappa,
            k3: Some(0.0),
            k4: 0.0,
            sigma_c,
            k_c,
        });
    }
    let minus = |k: f64| sigma_branches(wp, k).1 - sigma;
    let dminus = |k: f64| sigma_branch_derivatives(wp, k).1;
    let plus = |k: f64| sigma_branches(wp, k).0 - sigma;
    let dplus = |k: f64| sigma_branch_derivatives(wp, k).0;

    // σ₋ < 0 on (0, κ) and increases to +∞ beyond κ, so k₂ > max(κ, σ).
    let lo2 = wp.kappa.max(sigma);
    let (a, b) = expand_bracket(&minus, lo2, lo2 + wp.mu0 * (1.0 + sigma), 2.0)?;
    let k2 = bisect_newton(&minus, &dminus, a, b, 0.0)?;
    // σ₊ increases on (0, ∞) from 0, and σ₊(k) ≥ k.
    let k4 = bisect_newton(&plus, &dplus, 0.0, sigma, 0.0)?;

    let (regime, k1, k3) = if (sigma - sigma_c).abs() < ROOT_TOL {
        (Regime::AtCritical, Some(k_c), Some(k_c))
    } else if sigma < sigma_c {
        // σ₊ falls from σ_c to 0 on (k_c, 0) and rises from −∞ to σ_c below k_c.
        let k3 = bisect_newton(&plus, &dplus, k_c, 0.0, 0.0)?;
        let (a, b) = expand_bracket(&plus, k_c - 1.0, k_c, 2.0)?;
        let k1 = bisect_newton(&plus, &dplus, a, b, 0.0)?;
        (Regime::BelowCritical, Some(k1), Some(k3))
    } else {
        (Regime::AboveCritical, None, None)
    };
    Ok(DispersionPoint { sigma, regime, k1, k2, k3, k4, sigma_c, k_c })
}

/// `σ_N` with `k₂(σ_N) − k₄(σ_N) = Nκ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Resonance {
    pub order: i32,
    pub sigma_n: f64,
    pub k2: f64,
    pub k4: f64,
}

pub fn resonance_sigma(wp: &WaveParams, order: i32) -> Result<Resonance> {
    if order < 2 {
        return Err(Error::Domain(format!("resonance order must be at least 2, got {order}")));
    }
    let (_, sigma_c) = critical_point(wp)?;
    let target = order as f64 * wp.kappa;
    let gap = |s: f64| -> f64 {
        match roots_k(wp, s) {
            Ok(p) => p.k2 - p.k4 - target,
            Err(_) => f64::NAN,
        }
    };
    // The gap is increasing above σ_c; bracket from just above σ_c.
    let lo = sigma_c * (1.0 + 1e-9) + 1e-12;
    if gap(lo) > 0.0 {
        return Err(Error::Bracket(format!("no resonance of order {order} above sigma_c")));
    }
    let mut hi = lo + wp.kappa;
    while gap(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::Bracket("resonance bracket diverged".into()));
        }
    }
    // dk/dσ on each branch: k₂′ = 1/σ₋′(k₂), k₄′ = 1/σ₊′(k₄).
    let dgap = |s: f64| -> f64 {
        let p = roots_k(wp, s).expect("bracketed sigma is valid");
        1.0 / sigma_branch_derivatives(wp, p.k2).1 - 1.0 / sigma_branch_derivatives(wp, p.k4).0
    };
    let sigma_n = bisect_newton(&gap, &dgap, lo, hi, 0.0)?;
    let p = roots_k(wp, sigma_n)?;
    Ok(Resonance { order, sigma_n, k2: p.k2, k4: p.k4 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu0_values() {
        let wp = WaveParams::new(1.0).unwrap();
        assert!((wp.mu0 - 1.0f64 / 1.0f64.tanh()).abs() < 1e-15);
        assert!((wp.mu0 - 1.3130352854993313).abs() < 1e-13);
        assert!((wp.period - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        let tiny = WaveParams::new(1e-10).unwrap();
        assert!((tiny.mu0 - 1.0).abs() < 1e-15);
        assert!(WaveParams::new(0.0).is_err());
        assert!(WaveParams::new(-1.0).is_err());
    }

    #[test]
    fn branch_values() {
        let wp = WaveParams::new(1.4).unwrap();
        assert_eq!(sigma_branches(&wp, 0.0), (0.0, 0.0));
        assert!(sigma_branches(&wp, wp.kappa).1.abs() < 1e-15);
        assert!(sigma_branches(&wp, -wp.kappa).0.abs() < 1e-15);
    }

    #[test]
    fn critical_point_is_double_root() {
        let wp = WaveParams::new(1.0).unwrap();
        let (kc, sc) = critical_point(&wp).unwrap();
        assert!(kc < 0.0 && sc > 0.0);
        assert!(sigma_branch_derivatives(&wp, kc).0.abs() < 1e-12);
        let h = 1e-4;
        for hh in [h, -h] {
            let d = sigma_branches(&wp, kc + hh).0 - sc;
            assert!(d.abs() < 10.0 * h * h);
        }
        let p = roots_k(&wp, sc).unwrap();
        let gap = p.k2 - p.k4;
        assert!(gap > wp.kappa && gap < 2.0 * wp.kappa, "gap {gap}");
    }

    #[test]
    fn roots_at_zero_and_residuals() {
        let wp = WaveParams::new(1.0).unwrap();
        let p = roots_k(&wp, 0.0).unwrap();
        assert_eq!((p.k1, p.k2, p.k3, p.k4), (Some(-1.0), 1.0, Some(0.0), 0.0));
        for f in [0.5, 2.0] {
            let s = f * p.sigma_c;
            let q = roots_k(&wp, s).unwrap();
            assert!((sigma_branches(&wp, q.k2).1 - s).abs() < 1e-12);
            assert!((sigma_branches(&wp, q.k4).0 - s).abs() < 1e-12);
            if let (Some(k1), Some(k3)) = (q.k1, q.k3) {
                assert!((sigma_branches(&wp, k1).0 - s).abs() < 1e-12);
                assert!((sigma_branches(&wp, k3).0 - s).abs() < 1e-12);
                assert!(k1 < k3 && k3 < 0.0 && 0.0 < q.k4 && q.k4 < q.k2);
            } else {
                assert_eq!(q.regime, Regime::AboveCritical);
            }
        }
    }

    #[test]
    fn resonances_are_ordered() {
        let wp = WaveParams::new(1.0).unwrap();
        let (_, sc) = critical_point(&wp).unwrap();
        let r2 = resonance_sigma(&wp, 2).unwrap();
        let r3 = resonance_sigma(&wp, 3).unwrap();
        assert!((r2.k2 - r2.k4 - 2.0).abs() < 1e-12);
        assert!(sc < r2.sigma_n && r2.sigma_n < r3.sigma_n);
        assert!(resonance_sigma(&wp, 1).is_err());
    }
}
