//! C ABI over `nsk`: opaque parameter and state handles, status codes, and a
//! thread-local last-error message.
//!
//! Every function returns an [`NskStatus`]; outputs go through pointers.
//! Handles from `*_new`/`*_read`/`nsk_propagate`/`nsk_simulate` are released
//! with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use nsk::field::{forward_transform, inverse_transform, Grid, SpectralState};
use nsk::integrator::{run_simulation, IntegratorConfig};
use nsk::decay::{FieldSel, NormRequest};
use nsk::lp::{DyadicPartition, Index};
use nsk::{FluidParams, NskError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NskStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Blow-up or vacuum.
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

/// Opaque fluid parameters.
pub struct NskParams(FluidParams);

/// Opaque spectral state `(a, m)`.
pub struct NskState(SpectralState);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Null(&'static str),
    Core(NskError),
}

impl From<NskError> for Fail {
    fn from(e: NskError) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NskStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NskStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            NskStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            match e {
                NskError::Vacuum { .. } | NskError::BlowUp { .. } => NskStatus::Numerical,
                NskError::Io(_) | NskError::Snapshot(_) => NskStatus::Io,
                _ => NskStatus::InvalidArgument,
            }
        }
        Err(_) => {
            set_error("internal panic");
            NskStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn as_mut_slice<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

fn invalid(msg: &str) -> Fail {
    Fail::Core(NskError::InvalidParams(msg.into()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsk_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"",
    };
    V.as_ptr()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn nsk_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Gamma-law fluid (exponent 1.4, `rho* = 1`) with sound speed `gamma`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsk_params_new(
    mu: f64,
    lam: f64,
    kappa: f64,
    gamma: f64,
    out: *mut *mut NskParams,
) -> NskStatus {
    guard(|| {
        let p = FluidParams::new(mu, lam, kappa, gamma);
        p.validate()?;
        put(out, NskParams(p))
    })
}

/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn nsk_params_free(p: *mut NskParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Roots of the characteristic polynomial at `xi` (length `d`), as
/// `(re+, im+, re-, im-)` in `out`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn nsk_eigenvalues(
    params: *const NskParams,
    xi: *const f64,
    d: usize,
    out: *mut f64,
) -> NskStatus {
    guard(|| {
        let p = as_ref(params, "params")?;
        let xi = as_slice(xi, d, "xi")?;
        let out = as_mut_slice(out, 4, "out")?;
        let e = nsk::linear::eigenvalues(&p.0, xi)?;
        out.copy_from_slice(&[e.lambda_plus.re, e.lambda_plus.im, e.lambda_minus.re, e.lambda_minus.im]);
        Ok(())
    })
}

/// `G(t, xi)` row-major in `(a, m_1, .., m_d)` order; `re` and `im` hold `(d+1)^2` entries each.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn nsk_green_matrix(
    params: *const NskParams,
    t: f64,
    xi: *const f64,
    d: usize,
    re: *mut f64,
    im: *mut f64,
) -> NskStatus {
    guard(|| {
        let p = as_ref(params, "params")?;
        let xi = as_slice(xi, d, "xi")?;
        let n = (d + 1) * (d + 1);
        let re = as_mut_slice(re, n, "re")?;
        let im = as_mut_slice(im, n, "im")?;
        let g = nsk::linear::green_matrix(&p.0, t, xi)?;
        for (k, z) in g.entries().iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// State from physical samples: `d + 1` blocks of `n^d` values (`a`, then `m_1..m_d`),
/// row-major with the last axis fastest, on the box `[0, L)^d`.
///
/// # Safety
/// `samples` must hold `(d + 1) n^d` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_state_from_samples(
    d: usize,
    n: usize,
    box_len: f64,
    samples: *const f64,
    out: *mut *mut NskState,
) -> NskStatus {
    guard(|| {
        let grid = Grid::new(d, n, box_len)?;
        let len = grid.len();
        let all = as_slice(samples, (d + 1) * len, "samples")?;
        let mut comps = Vec::with_capacity(d + 1);
        for c in 0..=d {
            comps.push(forward_transform(&grid, &all[c * len..(c + 1) * len])?);
        }
        let a = comps.remove(0);
        put(out, NskState(SpectralState::new(a, comps, 0.0)?))
    })
}

/// Number of values written by [`nsk_state_to_samples`].
///
/// # Safety
/// `state` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_state_sample_count(state: *const NskState, out: *mut usize) -> NskStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        let out = out.as_mut().ok_or(Fail::Null("out"))?;
        *out = (s.0.grid().dim() + 1) * s.0.grid().len();
        Ok(())
    })
}

/// Physical samples in the layout of [`nsk_state_from_samples`].
///
/// # Safety
/// `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nsk_state_to_samples(state: *const NskState, out: *mut f64, len: usize) -> NskStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        let g = s.0.grid();
        let need = (g.dim() + 1) * g.len();
        if len < need {
            return Err(invalid(&format!("output holds {len} values, need {need}")));
        }
        let out = as_mut_slice(out, need, "out")?;
        for (c, comp) in s.0.components().enumerate() {
            out[c * g.len()..(c + 1) * g.len()].copy_from_slice(&inverse_transform(comp));
        }
        Ok(())
    })
}

/// # Safety
/// `state` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_state_time(state: *const NskState, out: *mut f64) -> NskStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        *out.as_mut().ok_or(Fail::Null("out"))? = s.0.time;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn nsk_state_free(s: *mut NskState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Exact linear flow `G(t) U`, as a new state.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_propagate(
    state: *const NskState,
    params: *const NskParams,
    t: f64,
    out: *mut *mut NskState,
) -> NskStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        let p = as_ref(params, "params")?;
        let mut u = nsk::linear::propagate(&s.0, t, &p.0)?;
        u.time = s.0.time + t;
        put(out, NskState(u))
    })
}

/// ETD2 run to `t_end`. On vacuum or blow-up the last valid state is still
/// stored in `out` and [`NskStatus::Numerical`] is returned.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_simulate(
    state: *const NskState,
    params: *const NskParams,
    dt: f64,
    t_end: f64,
    linear_only: bool,
    out: *mut *mut NskState,
) -> NskStatus {
    guard(|| {
        let s = as_ref(state, "state")?;
        let p = as_ref(params, "params")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let mut cfg = IntegratorConfig::new(dt, t_end);
        cfg.linear_only = linear_only;
        cfg.snapshot_cadence = usize::MAX;
        let outcome = run_simulation(&s.0, &p.0, &cfg, 2.0, &mut [])?;
        put(out, NskState(outcome.last))?;
        match outcome.failure {
            Some(e) => Err(Fail::Core(e)),
            None => Ok(()),
        }
    })
}

/// Besov norm of the whole state with the Euclidean modulus over components;
/// `p` and `sigma` may be `INFINITY`. `fourier` selects the Fourier-Besov flavor.
///
/// # Safety
/// `state` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_besov_norm(
    state: *const NskState,
    s: f64,
    p: f64,
    sigma: f64,
    fourier: bool,
    out: *mut f64,
) -> NskStatus {
    guard(|| {
        let st = as_ref(state, "state")?;
        let out = out.as_mut().ok_or(Fail::Null("out"))?;
        let part = DyadicPartition::new(st.0.grid())?;
        let (p, sigma) = (Index(p), Index(sigma));
        let field = FieldSel::State;
        let req = if fourier {
            NormRequest::FourierBesov { field, s, p, sigma }
        } else {
            NormRequest::Besov { field, s, p, sigma }
        };
        req.validate()?;
        *out = req.evaluate(&st.0, &part)?;
        Ok(())
    })
}

/// Decay exponent `d/2 (1 - 1/p) + s/2`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_theoretical_exponent(d: usize, p: f64, s: f64, out: *mut f64) -> NskStatus {
    guard(|| {
        *out.as_mut().ok_or(Fail::Null("out"))? = nsk::decay::theoretical_exponent(d, p, s)?;
        Ok(())
    })
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, Fail> {
    if path.is_null() {
        return Err(Fail::Null("path"));
    }
    let s = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
    Ok(Path::new(s))
}

/// # Safety
/// `path` must be a NUL-terminated string; handles must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_snapshot_write(
    path: *const c_char,
    state: *const NskState,
    params: *const NskParams,
) -> NskStatus {
    guard(|| {
        let path = path_arg(path)?;
        nsk::snapshot::write(path, &as_ref(state, "state")?.0, &as_ref(params, "params")?.0)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsk_snapshot_read(path: *const c_char, out: *mut *mut NskState) -> NskStatus {
    guard(|| {
        let snap = nsk::snapshot::read(path_arg(path)?)?;
        put(out, NskState(snap.state))
    })
}
