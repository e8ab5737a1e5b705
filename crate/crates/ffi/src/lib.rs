//! C ABI over the alignlab estimators.
//!
//! Every fallible call returns an [`AlStatus`]; on failure the message is
//! available from [`al_last_error_message`] on the same thread. Handles are
//! opaque and must be released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use alignlab::activation::{hermite_coeffs, is_expressive, smoothing_derivative, Activation};
use alignlab::alignment::{
    inal_dual_kernel, inal_exact, inal_mc_paired, moment_formula, InalConfig, InalEstimate, SignPattern,
};
use alignlab::boolfn::{BooleanFunction, FunctionSpec};
use alignlab::crosspred::{cp_exact_enum, cp_spectral, survival_probability, CpConfig, CpEstimate};
use alignlab::stats::Workers;
use alignlab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlStatus {
    AlOk = 0,
    AlNullPointer = 1,
    AlInvalidArgument = 2,
    AlParseError = 3,
    AlCapExceeded = 4,
    AlUnsupported = 5,
    AlIoError = 6,
    AlBufferTooSmall = 7,
    AlInternalError = 8,
}

/// Parsed Boolean function.
pub struct AlFunction(BooleanFunction);

/// Parsed activation.
pub struct AlActivation(Activation);

/// Estimate with its standard error (0 for exact methods).
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> AlStatus {
    match e {
        Error::Parse { .. } | Error::Csv(_) => AlStatus::AlParseError,
        Error::DenseCap { .. } | Error::OrderCap { .. } | Error::ExactCap { .. } => AlStatus::AlCapExceeded,
        Error::Unsupported(_) => AlStatus::AlUnsupported,
        Error::Io { .. } => AlStatus::AlIoError,
        _ => AlStatus::AlInvalidArgument,
    }
}

struct Fail(AlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(AlStatus::AlNullPointer, format!("null pointer: {what}"))
}

/// Runs `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> AlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            AlStatus::AlOk
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AlStatus::AlInternalError
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(AlStatus::AlParseError, format!("{what} is not UTF-8")))
}

unsafe fn href<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn fill(out: *mut f64, len: usize, values: &[f64]) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len < values.len() {
        return Err(Fail(
            AlStatus::AlBufferTooSmall,
            format!("buffer holds {len} values, need {}", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn inal(e: InalEstimate) -> AlEstimate {
    AlEstimate {
        value: e.value,
        std_error: e.std_error,
        samples: e.samples as u64,
    }
}

fn cp(e: CpEstimate) -> AlEstimate {
    AlEstimate {
        value: e.value,
        std_error: e.std_error,
        samples: e.samples as u64,
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn al_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses a function spec such as `maj:n=5` or `parity:S=1,2;n=8`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_function_parse(spec: *const c_char, out: *mut *mut AlFunction) -> AlStatus {
    guard(|| {
        let f = FunctionSpec::parse(text(spec, "spec")?)?.function;
        put(out, Box::into_raw(Box::new(AlFunction(f))), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from [`al_function_parse`], freed once.
#[no_mangle]
pub unsafe extern "C" fn al_function_free(f: *mut AlFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of input coordinates, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn al_function_n(f: *const AlFunction) -> usize {
    f.as_ref().map_or(0, |f| f.0.n())
}

/// Evaluates at `x ∈ {±1}^n`.
///
/// # Safety
/// `x` must point to `len` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_function_eval(f: *const AlFunction, x: *const i8, len: usize, out: *mut i8) -> AlStatus {
    guard(|| {
        let f = href(f, "f")?;
        if x.is_null() {
            return Err(null("x"));
        }
        let v = f.0.eval(std::slice::from_raw_parts(x, len))?;
        put(out, v, "out")
    })
}

/// Writes `W^0..W^n` into `out`, which must hold `n + 1` values.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn al_function_degree_weights(f: *const AlFunction, out: *mut f64, len: usize) -> AlStatus {
    guard(|| {
        let w = href(f, "f")?.0.spectrum()?.degree_weights();
        fill(out, len, &w)
    })
}

/// Parses `relu`, `sign` or a `pwl:` spec.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_activation_parse(spec: *const c_char, out: *mut *mut AlActivation) -> AlStatus {
    guard(|| {
        let a = Activation::parse(text(spec, "spec")?)?;
        put(out, Box::into_raw(Box::new(AlActivation(a))), "out")
    })
}

/// # Safety
/// `a` must be null or a handle from [`al_activation_parse`], freed once.
#[no_mangle]
pub unsafe extern "C" fn al_activation_free(a: *mut AlActivation) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// `Σ_v^(k)(0)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_smoothing_derivative(a: *const AlActivation, v: f64, k: usize, out: *mut f64) -> AlStatus {
    guard(|| put(out, smoothing_derivative(&href(a, "a")?.0, v, k)?, "out"))
}

/// Hermite coefficients `d_0..d_{k_max}`; `out` must hold `k_max + 1` values.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn al_hermite_coeffs(a: *const AlActivation, k_max: usize, out: *mut f64, len: usize) -> AlStatus {
    guard(|| fill(out, len, &hermite_coeffs(&href(a, "a")?.0, k_max)?))
}

/// Sets `*out` to 1 if no two consecutive smoothing derivatives up to
/// `max_order` vanish, else 0.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_is_expressive(a: *const AlActivation, max_order: usize, tol_rel: f64, out: *mut i32) -> AlStatus {
    guard(|| {
        let r = is_expressive(&href(a, "a")?.0, max_order, tol_rel)?;
        put(out, i32::from(r.is_expressive()), "out")
    })
}

/// Exact correlation per init over the full cube (n ≤ 14), averaged over
/// `init_samples` initializations.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_inal_exact(
    f: *const AlFunction,
    a: *const AlActivation,
    init_samples: usize,
    seed: u64,
    bias: bool,
    out: *mut AlEstimate,
) -> AlStatus {
    guard(|| {
        let cfg = InalConfig {
            init_samples,
            seed,
            bias,
            workers: Workers::SERIAL,
            ..Default::default()
        };
        put(out, inal(inal_exact(&href(f, "f")?.0, &href(a, "a")?.0, &cfg)?), "out")
    })
}

/// Unbiased paired Monte-Carlo INAL estimate.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_inal_mc_paired(
    f: *const AlFunction,
    a: *const AlActivation,
    init_samples: usize,
    inner_samples: usize,
    seed: u64,
    bias: bool,
    out: *mut AlEstimate,
) -> AlStatus {
    guard(|| {
        let cfg = InalConfig {
            init_samples,
            inner_samples,
            seed,
            bias,
            workers: Workers::SERIAL,
        };
        put(out, inal(inal_mc_paired(&href(f, "f")?.0, &href(a, "a")?.0, &cfg)?), "out")
    })
}

/// Deterministic INAL for ReLU and sign.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_inal_dual_kernel(
    f: *const AlFunction,
    a: *const AlActivation,
    bias: bool,
    out: *mut AlEstimate,
) -> AlStatus {
    guard(|| put(out, inal(inal_dual_kernel(&href(f, "f")?.0, &href(a, "a")?.0, bias)?), "out"))
}

/// `E[M_T G^ν]` for weights of variance `1/n`; `tau` holds `k` signs.
/// Writes the value and the `n`-free constant.
///
/// # Safety
/// `tau` must point to `k` values; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_moment(
    k: usize,
    nu: usize,
    n: usize,
    tau: *const i8,
    bias_sign: i8,
    out_value: *mut f64,
    out_constant: *mut f64,
) -> AlStatus {
    guard(|| {
        let tau = if k == 0 {
            Vec::new()
        } else if tau.is_null() {
            return Err(null("tau"));
        } else {
            std::slice::from_raw_parts(tau, k).to_vec()
        };
        let r = moment_formula(k, nu, n, &SignPattern { tau, bias_sign })?;
        put(out_value, r.value, "out_value")?;
        put(out_constant, r.constant, "out_constant")
    })
}

/// `C(n,k)/C(N,k)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_survival_probability(n: usize, big_n: usize, k: usize, out: *mut f64) -> AlStatus {
    guard(|| put(out, survival_probability(n, big_n, k)?, "out"))
}

/// CP of the orbit of the `N`-extension, Monte Carlo over permutations.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_cp_spectral(
    f: *const AlFunction,
    big_n: usize,
    samples: usize,
    seed: u64,
    out: *mut AlEstimate,
) -> AlStatus {
    guard(|| {
        let cfg = CpConfig {
            samples,
            seed,
            workers: Workers::SERIAL,
            ..Default::default()
        };
        put(out, cp(cp_spectral(&href(f, "f")?.0, big_n, &cfg)?), "out")
    })
}

/// Exact CP by enumerating injections of the spectral support.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_cp_exact(f: *const AlFunction, big_n: usize, out: *mut AlEstimate) -> AlStatus {
    guard(|| put(out, cp(cp_exact_enum(&href(f, "f")?.0, big_n)?), "out"))
}
