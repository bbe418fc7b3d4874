//! C ABI over `zrp-core`.
//!
//! Objects are opaque handles created by `*_new` functions and released by
//! the matching `*_free`. Every fallible call returns a [`ZrpStatus`]; on
//! failure a message is available from [`zrp_last_error`] on the calling
//! thread until the next failing call. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use zrp_core::equilibrium::ExactChain;
use zrp_core::hydro::{self, HydroSolution, Profile};
use zrp_core::sim::{Dynamics, FastSimulator};
use zrp_core::{OccupancyConfig, RateFunction, ZrpError};

/// Result code of every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZrpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    StateSpaceTooLarge = 3,
    Io = 4,
    Panic = 5,
}

/// Rate function handle.
pub struct ZrpRate {
    inner: RateFunction,
}

/// Hydrodynamic solution for one profile.
pub struct ZrpHydro {
    inner: HydroSolution,
}

/// Exact generator and stationary law of a small system.
pub struct ZrpExactChain {
    inner: ExactChain,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: ZrpStatus,
    message: String,
}

impl From<ZrpError> for Failure {
    fn from(e: ZrpError) -> Self {
        let status = match e {
            ZrpError::StateSpaceTooLarge { .. } => ZrpStatus::StateSpaceTooLarge,
            ZrpError::Io(_) | ZrpError::Json(_) | ZrpError::Csv(_) => ZrpStatus::Io,
            _ => ZrpStatus::InvalidArgument,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: ZrpStatus::NullPointer,
        message: format!("`{what}` is null"),
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F>(body: F) -> ZrpStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ZrpStatus::Ok,
        Ok(Err(f)) => {
            set_last_error(f.message);
            f.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            ZrpStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn zrp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Clears the last error message of this thread.
#[no_mangle]
pub extern "C" fn zrp_clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Builds a rate function from its normalized head `r(1..=len)`.
///
/// # Safety
/// `head` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_rate_new(
    head: *const f64,
    len: usize,
    out: *mut *mut ZrpRate,
) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        let head = as_slice(head, len, "head")?;
        let inner = RateFunction::new(head)?;
        *out = Box::into_raw(Box::new(ZrpRate { inner }));
        Ok(())
    })
}

/// Builds a preset rate function (`"rate-one"`, `"threshold-<k>"`).
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_rate_preset(name: *const c_char, out: *mut *mut ZrpRate) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| Failure {
            status: ZrpStatus::InvalidArgument,
            message: "preset name is not UTF-8".into(),
        })?;
        let inner = RateFunction::preset(name)?;
        *out = Box::into_raw(Box::new(ZrpRate { inner }));
        Ok(())
    })
}

/// # Safety
/// `rate` must come from `zrp_rate_new`/`zrp_rate_preset` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn zrp_rate_free(rate: *mut ZrpRate) {
    if !rate.is_null() {
        drop(Box::from_raw(rate));
    }
}

/// `r(k)`.
///
/// # Safety
/// `rate` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_rate_value(rate: *const ZrpRate, k: u64, out: *mut f64) -> ZrpStatus {
    guard(|| {
        *as_out(out, "out")? = as_ref(rate, "rate")?.inner.rate(k);
        Ok(())
    })
}

/// Inverse density map `Ψ^{-1}(s)`.
///
/// # Safety
/// `rate` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_psi_inv(rate: *const ZrpRate, s: f64, out: *mut f64) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        *out = as_ref(rate, "rate")?.inner.psi_inv(s)?;
        Ok(())
    })
}

/// `Φ(t) = ∫_0^t ds / (1 - Ψ^{-1}(s))`.
///
/// # Safety
/// `rate` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_phi(rate: *const ZrpRate, t: f64, out: *mut f64) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        *out = hydro::phi(&as_ref(rate, "rate")?.inner, t)?;
        Ok(())
    })
}

/// `γ = Φ(ρ)`.
///
/// # Safety
/// `rate` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_gamma(rate: *const ZrpRate, rho: f64, out: *mut f64) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        *out = hydro::gamma(&as_ref(rate, "rate")?.inner, rho)?;
        Ok(())
    })
}

/// Solves the dissolution problem for profile `u[0..len]` at density `rho`.
///
/// # Safety
/// `rate` must be a live handle, `u` must point to `len` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_hydro_new(
    rate: *const ZrpRate,
    u: *const f64,
    len: usize,
    rho: f64,
    out: *mut *mut ZrpHydro,
) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        let rate = as_ref(rate, "rate")?;
        let profile = Profile::new(as_slice(u, len, "u")?.to_vec(), rho)?;
        let inner = HydroSolution::new(&rate.inner, &profile);
        *out = Box::into_raw(Box::new(ZrpHydro { inner }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `zrp_hydro_new` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn zrp_hydro_free(h: *mut ZrpHydro) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dissolution function `f(t)`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_hydro_f(h: *const ZrpHydro, t: f64, out: *mut f64) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        if !(t >= 0.0) {
            return Err(ZrpError::Domain {
                name: "t",
                reason: "must be nonnegative".into(),
            }
            .into());
        }
        *out = as_ref(h, "hydro")?.inner.f(t);
        Ok(())
    })
}

/// Rescaled mixing time `f^{-1}(u_1)` (zero without a solid phase).
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_hydro_prediction(h: *const ZrpHydro, out: *mut f64) -> ZrpStatus {
    guard(|| {
        *as_out(out, "out")? = as_ref(h, "hydro")?.inner.mixing_prediction();
        Ok(())
    })
}

/// Breakpoints `t_1..t_L`. Writes at most `cap` values and stores `L` in
/// `len_out`.
///
/// # Safety
/// `h` must be a live handle, `buf` must have room for `cap` doubles (may
/// be null if `cap` is 0) and `len_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_hydro_breakpoints(
    h: *const ZrpHydro,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> ZrpStatus {
    guard(|| {
        let len_out = as_out(len_out, "len_out")?;
        let t = as_ref(h, "hydro")?.inner.t_seq();
        let k = t.len().min(cap);
        if k > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            slice::from_raw_parts_mut(buf, k).copy_from_slice(&t[..k]);
        }
        *len_out = t.len();
        Ok(())
    })
}

/// Builds the exact chain on `n` sites with `m` particles.
///
/// # Safety
/// `rate` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_exact_new(
    rate: *const ZrpRate,
    n: usize,
    m: u64,
    out: *mut *mut ZrpExactChain,
) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        let inner = ExactChain::new(&as_ref(rate, "rate")?.inner, n, m)?;
        *out = Box::into_raw(Box::new(ZrpExactChain { inner }));
        Ok(())
    })
}

/// # Safety
/// `c` must come from `zrp_exact_new` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn zrp_exact_free(c: *mut ZrpExactChain) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of states.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_exact_len(c: *const ZrpExactChain, out: *mut usize) -> ZrpStatus {
    guard(|| {
        *as_out(out, "out")? = as_ref(c, "chain")?.inner.len();
        Ok(())
    })
}

unsafe fn config_arg(x: *const u32, n: usize) -> Result<OccupancyConfig, Failure> {
    Ok(OccupancyConfig::new(as_slice(x, n, "x")?.to_vec())?)
}

/// Total variation between the law at time `t` from `x[0..n]` and `π`.
///
/// # Safety
/// `c` must be a live handle, `x` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_exact_tv(
    c: *const ZrpExactChain,
    x: *const u32,
    n: usize,
    t: f64,
    out: *mut f64,
) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        let chain = &as_ref(c, "chain")?.inner;
        let x0 = config_arg(x, n)?;
        *out = chain.tv_curve(&x0, &[t])?[0];
        Ok(())
    })
}

/// Mixing time from `x[0..n]` at level `eps`.
///
/// # Safety
/// `c` must be a live handle, `x` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zrp_exact_tmix(
    c: *const ZrpExactChain,
    x: *const u32,
    n: usize,
    eps: f64,
    out: *mut f64,
) -> ZrpStatus {
    guard(|| {
        let out = as_out(out, "out")?;
        let chain = &as_ref(c, "chain")?.inner;
        *out = chain.tmix(&config_arg(x, n)?, eps)?;
        Ok(())
    })
}

/// Runs the process from `x[0..n]` for time `t` and writes the final
/// configuration back into `x`.
///
/// # Safety
/// `rate` must be a live handle and `x` must point to `n` writable values.
#[no_mangle]
pub unsafe extern "C" fn zrp_simulate(
    rate: *const ZrpRate,
    x: *mut u32,
    n: usize,
    t: f64,
    seed: u64,
) -> ZrpStatus {
    guard(|| {
        let rate = &as_ref(rate, "rate")?.inner;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(ZrpError::Domain {
                name: "t",
                reason: "must be finite and nonnegative".into(),
            }
            .into());
        }
        let x0 = config_arg(x, n)?;
        let mut sim = FastSimulator::new(rate, x0, seed);
        sim.advance_to(t);
        slice::from_raw_parts_mut(x, n).copy_from_slice(sim.config().occupancies());
        Ok(())
    })
}
