//! C ABI over `wavestab`.
//!
//! Every fallible function returns a [`WsStatus`] and writes results through
//! out-pointers. The message for the last failure on the calling thread is
//! available from [`ws_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wavestab::dispersion::{roots_k, WaveParams};
use wavestab::indices::{bubble_spectrum, find_kappa1, find_kappa2, ind1, ind2, BubbleCoeffs};
use wavestab::Error;

/// Status codes. The numeric values match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    /// Null pointer or otherwise malformed call.
    InvalidArgument = 1,
    /// Input outside the supported domain.
    Domain = 2,
    /// Any other library failure, including caught panics.
    Internal = 3,
}

/// Opaque wave handle for one wavenumber `κ`. Caches the bubble coefficients.
pub struct WsWave {
    wp: WaveParams,
    bubble: Option<BubbleCoeffs>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WsStatus {
    match e {
        Error::Domain(_) | Error::UnsupportedDegree(_) => WsStatus::Domain,
        _ => WsStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic.
fn guard<F: FnOnce() -> Result<(), (WsStatus, String)>>(f: F) -> WsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WsStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside wavestab".into());
            WsStatus::Internal
        }
    }
}

fn lib<T>(r: wavestab::Result<T>) -> Result<T, (WsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (WsStatus, String) {
    (WsStatus::InvalidArgument, format!("{name} is null"))
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ws_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a wave handle. Free it with [`ws_wave_free`].
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_wave_new(kappa: f64, out: *mut *mut WsWave) -> WsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let wp = lib(WaveParams::new(kappa))?;
        *out = Box::into_raw(Box::new(WsWave { wp, bubble: None }));
        Ok(())
    })
}

/// # Safety
/// `wave` must be null or a handle from [`ws_wave_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_wave_free(wave: *mut WsWave) {
    if !wave.is_null() {
        drop(Box::from_raw(wave));
    }
}

/// # Safety
/// `wave` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_wave_kappa(wave: *const WsWave, out: *mut f64) -> WsStatus {
    guard(|| {
        let w = wave.as_ref().ok_or_else(|| null("wave"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = w.wp.kappa;
        Ok(())
    })
}

/// The four roots `k₁..k₄` of the dispersion relation at `σ ≥ 0`. `k₁` and `k₃`
/// exist only below the critical frequency and are written as NaN above it.
///
/// # Safety
/// `wave` must be a live handle; `out` valid for four writes.
#[no_mangle]
pub unsafe extern "C" fn ws_wave_dispersion_roots(wave: *const WsWave, sigma: f64, out: *mut f64) -> WsStatus {
    guard(|| {
        let w = wave.as_ref().ok_or_else(|| null("wave"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = lib(roots_k(&w.wp, sigma))?;
        let vals = [p.k1.unwrap_or(f64::NAN), p.k2, p.k3.unwrap_or(f64::NAN), p.k4];
        ptr::copy_nonoverlapping(vals.as_ptr(), out, 4);
        Ok(())
    })
}

/// `ind₁(κ)`.
///
/// # Safety
/// `wave` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_wave_ind1(wave: *const WsWave, out: *mut f64) -> WsStatus {
    guard(|| {
        let w = wave.as_ref().ok_or_else(|| null("wave"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = ind1(w.wp.kappa);
        Ok(())
    })
}

fn bubble_of(w: &mut WsWave) -> Result<&BubbleCoeffs, (WsStatus, String)> {
    if w.bubble.is_none() {
        w.bubble = Some(lib(ind2(&w.wp))?);
    }
    Ok(w.bubble.as_ref().unwrap())
}

/// `ind₂(κ)`.
///
/// # Safety
/// `wave` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_wave_ind2(wave: *mut WsWave, out: *mut f64) -> WsStatus {
    guard(|| {
        let w = wave.as_mut().ok_or_else(|| null("wave"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = bubble_of(w)?.ind2;
        Ok(())
    })
}

/// Largest real part on the leading-order bubble at amplitude `ε ∈ (0, 0.01]`,
/// and the Floquet offset `γ*` where it is attained. Both are zero when the
/// wave is stable there.
///
/// # Safety
/// `wave` must be a live handle; `max_re` valid for writes; `gamma_star`
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_wave_bubble_max(wave: *mut WsWave, eps: f64, max_re: *mut f64, gamma_star: *mut f64) -> WsStatus {
    guard(|| {
        let w = wave.as_mut().ok_or_else(|| null("wave"))?;
        let max_re = max_re.as_mut().ok_or_else(|| null("max_re"))?;
        let b = lib(bubble_spectrum(bubble_of(w)?, eps, 3))?;
        let stable = b.interval.is_none();
        *max_re = if stable { 0.0 } else { b.max_re };
        if let Some(g) = gamma_star.as_mut() {
            *g = if stable { 0.0 } else { b.gamma_star };
        }
        Ok(())
    })
}

/// The zero `κ₁` of `ind₁`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_find_kappa1(out: *mut f64) -> WsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(find_kappa1())?;
        Ok(())
    })
}

/// The threshold `κ₂` of the bubble index.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_find_kappa2(out: *mut f64) -> WsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(find_kappa2())?.kappa2;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last() -> String {
        unsafe { CStr::from_ptr(ws_last_error()).to_string_lossy().into_owned() }
    }

    #[test]
    fn handle_lifecycle() {
        let mut w = ptr::null_mut();
        unsafe {
            assert_eq!(ws_wave_new(1.5, &mut w), WsStatus::Ok);
            let mut k = 0.0;
            assert_eq!(ws_wave_kappa(w, &mut k), WsStatus::Ok);
            assert_eq!(k, 1.5);
            let mut v = 0.0;
            assert_eq!(ws_wave_ind1(w, &mut v), WsStatus::Ok);
            assert_eq!(v, ind1(1.5));
            assert_eq!(ws_wave_ind2(w, &mut v), WsStatus::Ok);
            assert_eq!(v, ind2(&WaveParams::new(1.5).unwrap()).unwrap().ind2);
            ws_wave_free(w);
            ws_wave_free(ptr::null_mut());
        }
    }

    #[test]
    fn errors_map_to_codes() {
        let mut w = ptr::null_mut();
        unsafe {
            assert_eq!(ws_wave_new(-1.0, &mut w), WsStatus::Domain);
            assert!(w.is_null());
            assert!(last().contains("domain"));
            assert_eq!(ws_wave_new(1.0, ptr::null_mut()), WsStatus::InvalidArgument);
            assert_eq!(last(), "out is null");
            assert_eq!(ws_wave_ind1(ptr::null(), &mut 0.0), WsStatus::InvalidArgument);
            assert_eq!(ws_wave_new(1.0, &mut w), WsStatus::Ok);
            assert_eq!(ws_wave_bubble_max(w, 0.5, &mut 0.0, ptr::null_mut()), WsStatus::Domain);
            assert_eq!(ws_wave_dispersion_roots(w, -1.0, [0.0; 4].as_mut_ptr()), WsStatus::Domain);
            ws_wave_free(w);
        }
    }

    #[test]
    fn dispersion_roots_absent_above_critical_are_nan() {
        let mut w = ptr::null_mut();
        let mut r = [0.0; 4];
        unsafe {
            ws_wave_new(1.0, &mut w);
            assert_eq!(ws_wave_dispersion_roots(w, 0.0, r.as_mut_ptr()), WsStatus::Ok);
            assert_eq!(r, [-1.0, 1.0, 0.0, 0.0]);
            let sc = roots_k(&WaveParams::new(1.0).unwrap(), 0.0).unwrap().sigma_c;
            for (sigma, present) in [(0.5 * sc, true), (2.0 * sc, false)] {
                let p = roots_k(&WaveParams::new(1.0).unwrap(), sigma).unwrap();
                assert_eq!(ws_wave_dispersion_roots(w, sigma, r.as_mut_ptr()), WsStatus::Ok);
                assert_eq!(!r[0].is_nan(), present);
                assert_eq!(!r[2].is_nan(), present);
                assert_eq!((r[1], r[3]), (p.k2, p.k4));
            }
            ws_wave_free(w);
        }
    }

    #[test]
    fn bubble_matches_core() {
        unsafe {
            for kappa in [1.2, 2.0] {
                let mut w = ptr::null_mut();
                ws_wave_new(kappa, &mut w);
                let (mut m, mut g) = (f64::NAN, f64::NAN);
                assert_eq!(ws_wave_bubble_max(w, 1e-3, &mut m, &mut g), WsStatus::Ok);
                let bc = ind2(&WaveParams::new(kappa).unwrap()).unwrap();
                let b = bubble_spectrum(&bc, 1e-3, 3).unwrap();
                assert_eq!(m > 0.0, bc.ind2 > 0.0);
                assert_eq!((m, g), (b.max_re, b.gamma_star));
                ws_wave_free(w);
            }
        }
    }

    #[test]
    fn thresholds() {
        let mut k = 0.0;
        unsafe {
            assert_eq!(ws_find_kappa1(&mut k), WsStatus::Ok);
            assert_eq!(k, find_kappa1().unwrap());
            assert_eq!(ws_find_kappa2(&mut k), WsStatus::Ok);
            assert!((k - 1.84940408).abs() < 1e-7);
        }
    }
}
