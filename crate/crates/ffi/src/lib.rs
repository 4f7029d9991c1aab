//! C ABI over `opdef-core`.
//!
//! Operators and verdicts are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`OpdefStatus`]; on
//! failure a message is available from [`opdef_last_error_message`] on the
//! same thread. Strings returned by the library are released with
//! [`opdef_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use opdef_core::definability::{classify, fredholm_index, DefinabilityError, DefinabilityVerdict, Options};
use opdef_core::linalg::{DenseVector, Field, C64};
use opdef_core::operators::OperatorSpec;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpdefStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidSpec = 3,
    InvalidArgument = 4,
    Numerical = 5,
    BufferTooSmall = 6,
    NotAvailable = 7,
    Panic = 8,
}

/// Verdict kinds, numbered like the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpdefVerdictKind {
    Definable = 0,
    NotDefinable = 1,
    Inconclusive = 2,
}

/// Classification options.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpdefOptions {
    pub cert_tol: f64,
    pub weyl_tol: f64,
    pub rank_threshold: f64,
    pub n_max: usize,
    pub rank_budget: usize,
    pub seed: u64,
}

impl From<OpdefOptions> for Options {
    fn from(o: OpdefOptions) -> Self {
        Options {
            cert_tol: o.cert_tol,
            weyl_tol: o.weyl_tol,
            rank_threshold: o.rank_threshold,
            n_max: o.n_max,
            rank_budget: o.rank_budget,
            seed: o.seed,
        }
    }
}

/// Opaque operator handle.
pub struct OpdefOperator(OperatorSpec);

/// Opaque classification result.
pub struct OpdefVerdict(DefinabilityVerdict);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(OpdefStatus, String);

impl Failure {
    fn new(status: OpdefStatus, message: impl Into<String>) -> Self {
        Failure(status, message.into())
    }
}

impl From<DefinabilityError> for Failure {
    fn from(e: DefinabilityError) -> Self {
        let status = match e {
            DefinabilityError::BadOption(_) | DefinabilityError::MuIsLambda { .. } | DefinabilityError::RealField => {
                OpdefStatus::InvalidArgument
            }
            _ => OpdefStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OpdefStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            OpdefStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OpdefStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(OpdefStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn operator<'a>(op: *const OpdefOperator) -> Result<&'a OperatorSpec, Failure> {
    non_null(op, "operator")?;
    Ok(&(*op).0)
}

unsafe fn verdict<'a>(v: *const OpdefVerdict) -> Result<&'a DefinabilityVerdict, Failure> {
    non_null(v, "verdict")?;
    Ok(&(*v).0)
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn opdef_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Defaults used by the command-line tool.
#[no_mangle]
pub extern "C" fn opdef_options_default() -> OpdefOptions {
    let o = Options::default();
    OpdefOptions {
        cert_tol: o.cert_tol,
        weyl_tol: o.weyl_tol,
        rank_threshold: o.rank_threshold,
        n_max: o.n_max,
        rank_budget: o.rank_budget,
        seed: o.seed,
    }
}

/// Parses a NUL-terminated operator spec in JSON.
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn opdef_operator_from_json(json: *const c_char, out: *mut *mut OpdefOperator) -> OpdefStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json).to_str().map_err(|e| Failure::new(OpdefStatus::InvalidUtf8, e.to_string()))?;
        let spec = OperatorSpec::from_json(text).map_err(|e| Failure::new(OpdefStatus::InvalidSpec, e.to_string()))?;
        *out = Box::into_raw(Box::new(OpdefOperator(spec)));
        Ok(())
    })
}

/// Releases an operator. Null is ignored.
///
/// # Safety
/// `op` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opdef_operator_free(op: *mut OpdefOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Writes whether the operator acts on complex l2.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opdef_operator_is_complex(op: *const OpdefOperator, out: *mut bool) -> OpdefStatus {
    guard(|| {
        let t = operator(op)?;
        non_null(out, "out")?;
        *out = t.field() == Field::Complex;
        Ok(())
    })
}

/// Upper bound on the operator norm.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opdef_operator_norm_bound(op: *const OpdefOperator, out: *mut f64) -> OpdefStatus {
    guard(|| {
        let t = operator(op)?;
        non_null(out, "out")?;
        *out = t.norm_bound();
        Ok(())
    })
}

/// Applies the operator to the finitely supported vector `re + i im` of
/// length `len`. `im` may be null for real input. The image is written to
/// `out_re` and, when not null, `out_im`; `written` receives its length.
/// If `out_len` is too short nothing is written except `written`, and
/// `OPDEF_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// Input arrays must hold `len` values, output arrays `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn opdef_operator_apply(
    op: *const OpdefOperator,
    re: *const f64,
    im: *const f64,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> OpdefStatus {
    guard(|| {
        let t = operator(op)?;
        non_null(written, "written")?;
        if len > 0 {
            non_null(re, "re")?;
        }
        let re = if len > 0 { std::slice::from_raw_parts(re, len) } else { &[] };
        let entries: Vec<C64> = if im.is_null() {
            re.iter().map(|&x| C64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect()
        };
        let x = DenseVector::new(t.field(), entries)
            .map_err(|e| Failure::new(OpdefStatus::InvalidArgument, e.to_string()))?;
        let image = t.apply_exact(&x).map_err(|e| Failure::new(OpdefStatus::InvalidArgument, e.to_string()))?;
        *written = image.len();
        if image.len() > out_len {
            return Err(Failure::new(
                OpdefStatus::BufferTooSmall,
                format!("image has {} entries but the buffer holds {out_len}", image.len()),
            ));
        }
        if !image.is_empty() {
            non_null(out_re, "out_re")?;
        }
        for (k, z) in image.entries().iter().enumerate() {
            *out_re.add(k) = z.re;
            if !out_im.is_null() {
                *out_im.add(k) = z.im;
            }
        }
        Ok(())
    })
}

/// Writes the `n x n` finite section `<T e_j, e_i>` in row-major order to
/// `out_re` and, when not null, `out_im`.
///
/// # Safety
/// Output arrays must hold `n * n` values.
#[no_mangle]
pub unsafe extern "C" fn opdef_operator_truncate(
    op: *const OpdefOperator,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> OpdefStatus {
    guard(|| {
        let t = operator(op)?;
        if n == 0 {
            return Ok(());
        }
        non_null(out_re, "out_re")?;
        let m = t.truncate(n);
        for i in 0..n {
            for j in 0..n {
                let z = m.get(i, j);
                *out_re.add(i * n + j) = z.re;
                if !out_im.is_null() {
                    *out_im.add(i * n + j) = z.im;
                }
            }
        }
        Ok(())
    })
}

/// Classifies the operator. `options` may be null for the defaults.
///
/// # Safety
/// `op` must be a live handle, `options` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opdef_classify(
    op: *const OpdefOperator,
    options: *const OpdefOptions,
    out: *mut *mut OpdefVerdict,
) -> OpdefStatus {
    guard(|| {
        let t = operator(op)?;
        non_null(out, "out")?;
        let options = if options.is_null() { Options::default() } else { Options::from(*options) };
        let v = classify(t, &options)?;
        *out = Box::into_raw(Box::new(OpdefVerdict(v)));
        Ok(())
    })
}

/// Releases a verdict. Null is ignored.
///
/// # Safety
/// `v` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opdef_verdict_free(v: *mut OpdefVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// `v` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opdef_verdict_kind(v: *const OpdefVerdict, out: *mut OpdefVerdictKind) -> OpdefStatus {
    guard(|| {
        let v = verdict(v)?;
        non_null(out, "out")?;
        *out = match v {
            DefinabilityVerdict::Definable { .. } => OpdefVerdictKind::Definable,
            DefinabilityVerdict::NotDefinable { .. } => OpdefVerdictKind::NotDefinable,
            DefinabilityVerdict::Inconclusive { .. } => OpdefVerdictKind::Inconclusive,
        };
        Ok(())
    })
}

/// The scalar `lambda` of a definable verdict; `OPDEF_STATUS_NOT_AVAILABLE`
/// otherwise.
///
/// # Safety
/// `v` must be a live handle and `re`, `im` writable.
#[no_mangle]
pub unsafe extern "C" fn opdef_verdict_lambda(v: *const OpdefVerdict, re: *mut f64, im: *mut f64) -> OpdefStatus {
    guard(|| {
        let v = verdict(v)?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        match v {
            DefinabilityVerdict::Definable { lambda, .. } => {
                *re = lambda.re();
                *im = lambda.im();
                Ok(())
            }
            _ => Err(Failure::new(OpdefStatus::NotAvailable, format!("verdict is {}", v.kind()))),
        }
    })
}

/// The verdict as a JSON report, released with `opdef_string_free`.
///
/// # Safety
/// `v` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn opdef_verdict_to_json(v: *const OpdefVerdict, out: *mut *mut c_char) -> OpdefStatus {
    guard(|| {
        let v = verdict(v)?;
        non_null(out, "out")?;
        let text = serde_json::to_string(v).map_err(|e| Failure::new(OpdefStatus::Numerical, e.to_string()))?;
        *out = CString::new(text).map_err(|e| Failure::new(OpdefStatus::Numerical, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opdef_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Kernel and cokernel dimensions at truncation `n`, checked against `2n`.
/// Any output pointer may be null.
///
/// # Safety
/// `op` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn opdef_fredholm_index(
    op: *const OpdefOperator,
    threshold: f64,
    n: usize,
    kernel_dim: *mut usize,
    cokernel_dim: *mut usize,
    index: *mut i64,
) -> OpdefStatus {
    guard(|| {
        let t = operator(op)?;
        let w = fredholm_index(t, threshold, n)?;
        for (p, value) in [(kernel_dim, w.kernel_dim), (cokernel_dim, w.cokernel_dim)] {
            if !p.is_null() {
                *p = value;
            }
        }
        if !index.is_null() {
            *index = w.index;
        }
        Ok(())
    })
}
