//! C interface to `logvvmf`.
//!
//! Every fallible function returns a [`LogvvmfStatus`]. On failure the
//! message is kept per thread and can be copied out with
//! [`logvvmf_last_error`]. Representations are opaque [`LogvvmfRep`] handles
//! owned by the caller and released with [`logvvmf_rep_free`].
//!
//! Matrices are written row-major as interleaved `(re, im)` doubles, so a
//! `p x p` result needs `2 p^2` slots.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use logvvmf::linalg::CMatrix;
use logvvmf::poincare::{modularity_residual, poincare_eval, PoincareParams};
use logvvmf::rep::Representation;
use logvvmf::sl2z::GammaElement;
use logvvmf::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogvvmfStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, malformed JSON or out-of-range argument.
    InvalidArgument = 1,
    /// Output buffer too small.
    BufferTooSmall = 2,
    NotUnimodular = 3,
    /// The representation data violates the group relations or block structure.
    InvalidRepresentation = 4,
    /// Any other domain error reported by the library.
    Domain = 5,
    /// Internal panic caught at the boundary.
    Internal = 6,
}

/// Opaque representation handle.
pub struct LogvvmfRep(Representation);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> LogvvmfStatus {
    match err {
        Error::NotUnimodular(_) => LogvvmfStatus::NotUnimodular,
        Error::RelationViolation { .. }
        | Error::NonInvolutive(_)
        | Error::NearlyDefective(_)
        | Error::BlockMismatch(_) => LogvvmfStatus::InvalidRepresentation,
        Error::InvalidInput(_) | Error::Json(_) => LogvvmfStatus::InvalidArgument,
        _ => LogvvmfStatus::Domain,
    }
}

struct Failure(LogvvmfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(LogvvmfStatus::InvalidArgument, msg.to_string())
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> LogvvmfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LogvvmfStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            LogvvmfStatus::Internal
        }
    }
}

unsafe fn rep_ref<'a>(rep: *const LogvvmfRep) -> Result<&'a Representation, Failure> {
    rep.as_ref()
        .map(|r| &r.0)
        .ok_or_else(|| invalid("null representation handle"))
}

unsafe fn slice_i64<'a>(p: *const i64, len: usize) -> Result<&'a [i64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid("null array"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_matrix(m: &CMatrix, out: *mut f64, out_len: usize) -> Result<(), Failure> {
    let needed = 2 * m.nrows() * m.ncols();
    if out.is_null() {
        return Err(invalid("null output buffer"));
    }
    if out_len < needed {
        return Err(Failure(
            LogvvmfStatus::BufferTooSmall,
            format!("output needs {needed} doubles, got {out_len}"),
        ));
    }
    let buf = std::slice::from_raw_parts_mut(out, needed);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let at = 2 * (i * m.ncols() + j);
            buf[at] = z.re;
            buf[at + 1] = z.im;
        }
    }
    Ok(())
}

fn element(a: i64, b: i64, c: i64, d: i64) -> Result<GammaElement, Failure> {
    Ok(GammaElement::new(a, b, c, d)?)
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn logvvmf_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn logvvmf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The one-dimensional trivial representation.
#[no_mangle]
pub extern "C" fn logvvmf_rep_trivial() -> *mut LogvvmfRep {
    Box::into_raw(Box::new(LogvvmfRep(Representation::trivial())))
}

/// The standard two-dimensional representation.
#[no_mangle]
pub extern "C" fn logvvmf_rep_standard() -> *mut LogvvmfRep {
    Box::into_raw(Box::new(LogvvmfRep(Representation::standard())))
}

/// Parses a representation from the JSON format read by the command line.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn logvvmf_rep_from_json(
    json: *const c_char,
    out: *mut *mut LogvvmfRep,
) -> LogvvmfStatus {
    guarded(|| {
        if json.is_null() || out.is_null() {
            return Err(invalid("null pointer"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| invalid("representation JSON is not UTF-8"))?;
        let value: serde_json::Value = serde_json::from_str(text).map_err(Error::from)?;
        let rep = Representation::from_json(&value)?;
        *out = Box::into_raw(Box::new(LogvvmfRep(rep)));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `rep` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn logvvmf_rep_free(rep: *mut LogvvmfRep) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// Dimension of the representation, or 0 for a null handle.
///
/// # Safety
/// `rep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn logvvmf_rep_dim(rep: *const LogvvmfRep) -> usize {
    rep.as_ref().map_or(0, |r| r.0.dim())
}

/// Canonical word `sign * T^shift * (S T^{l_v}) ... (S T^{l_0})` of
/// `(a, b; c, d)`. Writes `(l_0, ..., l_v)` to `exponents` and the count to
/// `out_len`; if the buffer is too small only the count is written.
///
/// # Safety
/// Output pointers must be valid; `exponents` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn logvvmf_decompose(
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    sign: *mut i32,
    shift: *mut i64,
    exponents: *mut i64,
    cap: usize,
    out_len: *mut usize,
) -> LogvvmfStatus {
    guarded(|| {
        if sign.is_null() || shift.is_null() || out_len.is_null() {
            return Err(invalid("null output pointer"));
        }
        let w = element(a, b, c, d)?.eichler_decompose();
        let to_i64 = |x: &num_bigint::BigInt| {
            i64::try_from(x).map_err(|_| Failure(LogvvmfStatus::Domain, "exponent exceeds 64 bits".into()))
        };
        *out_len = w.exponents.len();
        *sign = i32::from(w.sign);
        *shift = to_i64(&w.shift)?;
        if w.exponents.len() > cap || (cap > 0 && exponents.is_null()) {
            return Err(Failure(
                LogvvmfStatus::BufferTooSmall,
                format!("word has {} exponents, buffer holds {cap}", w.exponents.len()),
            ));
        }
        for (i, l) in w.exponents.iter().enumerate() {
            *exponents.add(i) = to_i64(l)?;
        }
        Ok(())
    })
}

/// `rho(a, b; c, d)` into `out` (`2 p^2` doubles).
///
/// # Safety
/// `rep` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn logvvmf_rep_eval(
    rep: *const LogvvmfRep,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    out: *mut f64,
    out_len: usize,
) -> LogvvmfStatus {
    guarded(|| {
        let rho = rep_ref(rep)?;
        let g = element(a, b, c, d)?;
        write_matrix(&rho.evaluate(&g), out, out_len)
    })
}

unsafe fn params(
    rho: &Representation,
    nu: *const i64,
    nu_len: usize,
    k: *const i64,
    k_len: usize,
    n_trunc: u64,
) -> Result<PoincareParams, Failure> {
    let p = PoincareParams::new(
        slice_i64(nu, nu_len)?.to_vec(),
        slice_i64(k, k_len)?.to_vec(),
        n_trunc,
    );
    p.check(rho)?;
    Ok(p)
}

/// Truncated Poincare series `P(tau)` with one shift per Jordan block and one
/// weight per column. `tail_bound` (may be null) receives the tail estimate.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn logvvmf_poincare_eval(
    rep: *const LogvvmfRep,
    nu: *const i64,
    nu_len: usize,
    k: *const i64,
    k_len: usize,
    n_trunc: u64,
    tau_re: f64,
    tau_im: f64,
    out: *mut f64,
    out_len: usize,
    tail_bound: *mut f64,
) -> LogvvmfStatus {
    guarded(|| {
        let rho = rep_ref(rep)?;
        let params = params(rho, nu, nu_len, k, k_len, n_trunc)?;
        if !(tau_im > 0.0) {
            return Err(invalid("tau must lie in the upper half-plane"));
        }
        let sample = poincare_eval(rho, &params, Complex64::new(tau_re, tau_im))?;
        write_matrix(&sample.value, out, out_len)?;
        if !tail_bound.is_null() {
            *tail_bound = sample.tail_bound;
        }
        Ok(())
    })
}

/// `max |rho(g) P(tau) - P(g tau) J_k(g, tau)^{-1}|` for `g = (a, b; c, d)`.
///
/// # Safety
/// Pointers must be valid for the given lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn logvvmf_modularity_residual(
    rep: *const LogvvmfRep,
    nu: *const i64,
    nu_len: usize,
    k: *const i64,
    k_len: usize,
    n_trunc: u64,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    tau_re: f64,
    tau_im: f64,
    out: *mut f64,
) -> LogvvmfStatus {
    guarded(|| {
        let rho = rep_ref(rep)?;
        let params = params(rho, nu, nu_len, k, k_len, n_trunc)?;
        if out.is_null() {
            return Err(invalid("null output pointer"));
        }
        if !(tau_im > 0.0) {
            return Err(invalid("tau must lie in the upper half-plane"));
        }
        let g = element(a, b, c, d)?;
        *out = modularity_residual(rho, &params, &g, Complex64::new(tau_re, tau_im))?;
        Ok(())
    })
}
