//! C ABI over `circle-response`.
//!
//! Maps and response contexts are opaque heap handles created by
//! `cr_map_preset`, `cr_map_from_json` and `cr_context_new`, and released with
//! `cr_map_free` and `cr_context_free`. Every fallible
//! call returns a [`CrStatus`]; on failure the message is kept per thread and
//! can be read with [`cr_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use circle_response::fourier::{forward_dft, inverse_dft, GridSamples};
use circle_response::transfer::essential_bound;
use circle_response::{
    optimal_eigenvalue_perturbation, optimal_expectation_perturbation, CircleMap, DerivativeScheme, Error,
    ErrorClass, FourierVector, ResponseContext,
};
use num_complex::Complex64 as C64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Degenerate = 4,
    Validation = 5,
    Panic = 6,
}

/// Differentiation scheme used inside the response formulas.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrScheme {
    CentralDifference = 0,
    Spectral = 1,
}

/// Opaque expanding circle map.
pub struct CrMap(CircleMap);

/// Opaque response context: assembled operator, invariant density, resolvent
/// and, once requested, an isolated eigenvalue.
pub struct CrContext(ResponseContext);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CrStatus {
    match e.class() {
        ErrorClass::Config => CrStatus::InvalidArgument,
        ErrorClass::Numerical => CrStatus::Numerical,
        ErrorClass::Degenerate => CrStatus::Degenerate,
        ErrorClass::Validation => CrStatus::Validation,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CrStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CrStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller guarantees `p` is null or a live handle of type T.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and NUL-terminated per the caller contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("{what} is not valid UTF-8"))))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: caller provides `len` writable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and writable per the caller contract.
    unsafe { p.write(value) };
    Ok(())
}

fn real_samples(v: &FourierVector, out: &mut [f64]) -> Result<(), Failure> {
    let s = inverse_dft(v, out.len())?;
    for (o, z) in out.iter_mut().zip(s.values()) {
        *o = z.re;
    }
    Ok(())
}

/// Copies the last error message of the calling thread into `buf` (NUL
/// terminated, truncated to `cap`) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cr_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            // SAFETY: `buf` has `cap` bytes and `n < cap`.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a preset map: `doubling`, `sticky2x`, `gapmap12`, `gapmap12-smooth`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_map_preset(name: *const c_char, out: *mut *mut CrMap) -> CrStatus {
    guard(|| {
        let map = CircleMap::preset(unsafe { c_str(name, "name") }?)?;
        unsafe { write_out(out, Box::into_raw(Box::new(CrMap(map))), "out") }
    })
}

/// Creates a map from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_map_from_json(json: *const c_char, out: *mut *mut CrMap) -> CrStatus {
    guard(|| {
        let map = CircleMap::from_json(unsafe { c_str(json, "json") }?)?;
        unsafe { write_out(out, Box::into_raw(Box::new(CrMap(map))), "out") }
    })
}

/// Releases a map; null is ignored.
///
/// # Safety
/// `map` must be null or a handle from `cr_map_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_map_free(map: *mut CrMap) {
    if !map.is_null() {
        // SAFETY: handle created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(map) });
    }
}

/// `T(x) mod 1`.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_map_evaluate(map: *const CrMap, x: f64, out: *mut f64) -> CrStatus {
    guard(|| {
        let map = unsafe { deref(map, "map") }?;
        unsafe { write_out(out, map.0.evaluate(x), "out") }
    })
}

/// `1/inf|T'|`, the essential spectral radius bound.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_essential_bound(map: *const CrMap, out: *mut f64) -> CrStatus {
    guard(|| {
        let map = unsafe { deref(map, "map") }?;
        let b = essential_bound(&map.0)?;
        unsafe { write_out(out, b, "out") }
    })
}

/// Assembles the `modes × modes` operator of `map` and its invariant density.
/// The map is copied; the handle may be freed afterwards.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_context_new(
    map: *const CrMap,
    modes: usize,
    fine_factor: usize,
    scheme: CrScheme,
    out: *mut *mut CrContext,
) -> CrStatus {
    guard(|| {
        let map = unsafe { deref(map, "map") }?;
        let scheme = match scheme {
            CrScheme::CentralDifference => DerivativeScheme::CentralDifference,
            CrScheme::Spectral => DerivativeScheme::Spectral,
        };
        let ctx = ResponseContext::new(map.0.clone(), modes, fine_factor, scheme)?;
        unsafe { write_out(out, Box::into_raw(Box::new(CrContext(ctx))), "out") }
    })
}

/// Releases a context; null is ignored.
///
/// # Safety
/// `ctx` must be null or a handle from [`cr_context_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_context_free(ctx: *mut CrContext) {
    if !ctx.is_null() {
        // SAFETY: handle created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(ctx) });
    }
}

/// Locates the real isolated eigenvalue nearest `target` and stores it with
/// its adjoint functional in the context; writes it to `lambda0`.
///
/// # Safety
/// `ctx` must be a live handle; `lambda0` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_context_set_eigenvalue(ctx: *mut CrContext, target: f64, lambda0: *mut f64) -> CrStatus {
    guard(|| {
        // SAFETY: null or a live handle per the caller contract.
        let ctx = unsafe { ctx.as_mut() }.ok_or(Failure::Null("ctx"))?;
        let l = ctx.0.set_eigenvalue(target)?.lambda0;
        unsafe { write_out(lambda0, l, "lambda0") }
    })
}

/// Writes up to `cap` eigenvalues, largest modulus first, into `re`/`im` and
/// their count into `written`.
///
/// # Safety
/// `ctx` must be a live handle; `re` and `im` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn cr_spectrum(
    ctx: *const CrContext,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    written: *mut usize,
) -> CrStatus {
    guard(|| {
        let ctx = unsafe { deref(ctx, "ctx") }?;
        let re = unsafe { out_slice(re, cap, "re") }?;
        let im = unsafe { out_slice(im, cap, "im") }?;
        let values = ctx.0.operator().spectrum(cap.min(ctx.0.size()))?;
        for (k, z) in values.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        unsafe { write_out(written, values.len(), "written") }
    })
}

/// Invariant density at `x_j = j/len`.
///
/// # Safety
/// `ctx` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cr_density_samples(ctx: *const CrContext, out: *mut f64, len: usize) -> CrStatus {
    guard(|| {
        let ctx = unsafe { deref(ctx, "ctx") }?;
        let out = unsafe { out_slice(out, len, "out") }?;
        real_samples(ctx.0.density(), out)
    })
}

/// Optimal perturbation for the expectation of the observable given by
/// `obs_len` samples at `x_j = j/obs_len`. Writes `Ṫ` at `x_j = j/tdot_len`
/// and the optimal response to `objective`.
///
/// # Safety
/// `ctx` must be a live handle; `observable` must hold `obs_len` doubles and
/// `tdot` must hold `tdot_len` doubles; `objective` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_optimize_expectation(
    ctx: *const CrContext,
    observable: *const f64,
    obs_len: usize,
    gamma: f64,
    tdot: *mut f64,
    tdot_len: usize,
    objective: *mut f64,
) -> CrStatus {
    guard(|| {
        let ctx = unsafe { deref(ctx, "ctx") }?;
        if observable.is_null() {
            return Err(Failure::Null("observable"));
        }
        // SAFETY: caller provides `obs_len` readable doubles.
        let samples = unsafe { std::slice::from_raw_parts(observable, obs_len) };
        let c = forward_dft(&GridSamples::new(samples.iter().map(|&v| C64::new(v, 0.0)).collect()))?
            .resize(ctx.0.size())?;
        let out = unsafe { out_slice(tdot, tdot_len, "tdot") }?;
        let r = optimal_expectation_perturbation(&ctx.0, &c, gamma)?;
        real_samples(&r.tdot, out)?;
        unsafe { write_out(objective, r.objective, "objective") }
    })
}

/// Optimal perturbation for the eigenvalue set by [`cr_context_set_eigenvalue`].
///
/// # Safety
/// `ctx` must be a live handle; `tdot` must hold `tdot_len` doubles;
/// `objective` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cr_optimize_eigenvalue(
    ctx: *const CrContext,
    gamma: f64,
    tdot: *mut f64,
    tdot_len: usize,
    objective: *mut f64,
) -> CrStatus {
    guard(|| {
        let ctx = unsafe { deref(ctx, "ctx") }?;
        let out = unsafe { out_slice(tdot, tdot_len, "tdot") }?;
        let r = optimal_eigenvalue_perturbation(&ctx.0, gamma)?;
        real_samples(&r.tdot, out)?;
        unsafe { write_out(objective, r.objective, "objective") }
    })
}
