//! C ABI over `onebit`. Objects are opaque heap handles created by `*_new`
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`OnebitStatus`]; the message for the most recent failure on
//! the calling thread is available from [`onebit_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use onebit::edf::{self, NormStatus};
use onebit::measurement::{self, MeasurementEnsemble, ShiftKind, SignVector};
use onebit::recovery::{self, RecoveryOptions, RecoveryResult, RecoveryStatus};
use onebit::{special, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidDimension = 2,
    InvalidParameter = 3,
    DimensionMismatch = 4,
    Domain = 5,
    EmptyMeasurement = 6,
    DegenerateSolution = 7,
    Parse = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitShift {
    GaussianDither = 0,
    ConstantThreshold = 1,
    Zero = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitNormStatus {
    Ok = 0,
    BelowHalf = 1,
    Saturated = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitRecoveryStatus {
    Optimal = 0,
    Infeasible = 1,
    NumericalFailure = 2,
    NormUnresolved = 3,
}

/// Result of the norm estimator. `lambda` is NaN when `status` is `BelowHalf`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnebitNormEstimate {
    pub lambda: f64,
    pub f_m: f64,
    pub status: OnebitNormStatus,
}

/// Summary of an LP recovery. `t_sharp` is NaN for direction-only recovery.
/// `has_estimate` is 1 when the estimate buffer was written.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnebitRecoveryInfo {
    pub status: OnebitRecoveryStatus,
    pub objective: f64,
    pub t_sharp: f64,
    pub iterations: u64,
    pub has_estimate: i32,
}

/// Opaque measurement ensemble.
pub struct OnebitEnsemble(MeasurementEnsemble);

/// Opaque sign vector.
pub struct OnebitSigns(SignVector);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OnebitStatus {
    match e {
        Error::InvalidDimension(_) => OnebitStatus::InvalidDimension,
        Error::InvalidParameter(_) => OnebitStatus::InvalidParameter,
        Error::DimensionMismatch { .. } => OnebitStatus::DimensionMismatch,
        Error::Domain { .. } => OnebitStatus::Domain,
        Error::EmptyMeasurement => OnebitStatus::EmptyMeasurement,
        Error::DegenerateSolution(_) => OnebitStatus::DegenerateSolution,
        Error::Parse(_) => OnebitStatus::Parse,
        Error::Io(_) => OnebitStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> OnebitStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            OnebitStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            OnebitStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            OnebitStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

fn shift_kind(kind: OnebitShift, tau: f64) -> ShiftKind {
    match kind {
        OnebitShift::GaussianDither => ShiftKind::GaussianDither { tau },
        OnebitShift::ConstantThreshold => ShiftKind::ConstantThreshold { tau },
        OnebitShift::Zero => ShiftKind::Zero,
    }
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn onebit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds an `m x n` Gaussian ensemble with the given shifts. `tau` is
/// ignored for `Zero`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn onebit_ensemble_new(
    m: usize,
    n: usize,
    kind: OnebitShift,
    tau: f64,
    seed: u64,
    out: *mut *mut OnebitEnsemble,
) -> OnebitStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let e = measurement::build_ensemble(m, n, shift_kind(kind, tau), seed)?;
        write(out, Box::into_raw(Box::new(OnebitEnsemble(e))), "out")
    })
}

/// Builds an ensemble from a row-major `m x n` matrix and `m` shifts.
///
/// # Safety
/// `matrix` must point to `m * n` doubles, `shifts` to `m` doubles, and
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn onebit_ensemble_from_parts(
    m: usize,
    n: usize,
    matrix: *const f64,
    shifts: *const f64,
    kind: OnebitShift,
    tau: f64,
    out: *mut *mut OnebitEnsemble,
) -> OnebitStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let len = m.checked_mul(n).ok_or_else(|| Error::InvalidDimension("m * n overflows".into()))?;
        let a = slice(matrix, len, "matrix")?.to_vec();
        let b = slice(shifts, m, "shifts")?.to_vec();
        let e = MeasurementEnsemble::from_parts(m, n, a, b, shift_kind(kind, tau), 0)?;
        write(out, Box::into_raw(Box::new(OnebitEnsemble(e))), "out")
    })
}

/// # Safety
/// `e` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn onebit_ensemble_free(e: *mut OnebitEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `e` must be a live handle; `m` and `n` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_ensemble_dims(e: *const OnebitEnsemble, m: *mut usize, n: *mut usize) -> OnebitStatus {
    guard(|| {
        let e = &borrow(e, "ensemble")?.0;
        write(m, e.m(), "m")?;
        write(n, e.n(), "n")
    })
}

/// Copies the row-major matrix into `buf`, which must hold `m * n` doubles.
///
/// # Safety
/// `e` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn onebit_ensemble_matrix(e: *const OnebitEnsemble, buf: *mut f64, len: usize) -> OnebitStatus {
    guard(|| {
        let e = &borrow(e, "ensemble")?.0;
        copy_into(e.matrix(), buf, len)
    })
}

/// Copies the `m` shifts into `buf`.
///
/// # Safety
/// `e` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn onebit_ensemble_shifts(e: *const OnebitEnsemble, buf: *mut f64, len: usize) -> OnebitStatus {
    guard(|| {
        let e = &borrow(e, "ensemble")?.0;
        copy_into(e.shifts(), buf, len)
    })
}

unsafe fn copy_into<T: Copy>(src: &[T], buf: *mut T, len: usize) -> Result<(), Failure> {
    if len != src.len() {
        return Err(Error::DimensionMismatch {
            expected: src.len(),
            got: len,
        }
        .into());
    }
    slice_mut(buf, len, "buf")?.copy_from_slice(src);
    Ok(())
}

/// Quantizes `x` (length `n`) against the ensemble.
///
/// # Safety
/// `e` must be a live handle, `x` valid for `n` doubles, `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn onebit_ensemble_quantize(
    e: *const OnebitEnsemble,
    x: *const f64,
    n: usize,
    out: *mut *mut OnebitSigns,
) -> OnebitStatus {
    guard(|| {
        let e = &borrow(e, "ensemble")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let y = e.quantize(slice(x, n, "x")?)?;
        write(out, Box::into_raw(Box::new(OnebitSigns(y))), "out")
    })
}

/// Draws `m` measurements of `x` without storing the matrix. The signs
/// equal those of an ensemble built with the same `m, n, kind, tau, seed`.
///
/// # Safety
/// `x` must be valid for `n` doubles and `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn onebit_quantize_streaming(
    m: usize,
    n: usize,
    kind: OnebitShift,
    tau: f64,
    seed: u64,
    x: *const f64,
    out: *mut *mut OnebitSigns,
) -> OnebitStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let y = measurement::quantize_streaming(m, n, shift_kind(kind, tau), seed, slice(x, n, "x")?)?;
        write(out, Box::into_raw(Box::new(OnebitSigns(y))), "out")
    })
}

/// Wraps `len` signs, each `+1` or `-1`.
///
/// # Safety
/// `bits` must be valid for `len` bytes and `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn onebit_signs_new(bits: *const i8, len: usize, out: *mut *mut OnebitSigns) -> OnebitStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let y = SignVector::new(slice(bits, len, "bits")?.to_vec())?;
        write(out, Box::into_raw(Box::new(OnebitSigns(y))), "out")
    })
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn onebit_signs_free(s: *mut OnebitSigns) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of signs, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn onebit_signs_len(s: *const OnebitSigns) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `s` must be a live handle and `buf` valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn onebit_signs_copy(s: *const OnebitSigns, buf: *mut i8, len: usize) -> OnebitStatus {
    guard(|| {
        let s = &borrow(s, "signs")?.0;
        copy_into(s.bits(), buf, len)
    })
}

/// Norm estimate from signs taken at the constant threshold `tau`.
///
/// # Safety
/// `s` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn onebit_estimate_norm(s: *const OnebitSigns, tau: f64, out: *mut OnebitNormEstimate) -> OnebitStatus {
    guard(|| {
        let s = &borrow(s, "signs")?.0;
        let est = edf::estimate_norm(s, tau)?;
        let status = match est.status {
            NormStatus::Ok => OnebitNormStatus::Ok,
            NormStatus::BelowHalf => OnebitNormStatus::BelowHalf,
            NormStatus::Saturated => OnebitNormStatus::Saturated,
        };
        let value = OnebitNormEstimate {
            lambda: est.lambda.unwrap_or(f64::NAN),
            f_m: est.f_m,
            status,
        };
        write(out, value, "out")
    })
}

unsafe fn finish_recovery(res: RecoveryResult, estimate: *mut f64, len: usize, info: *mut OnebitRecoveryInfo) -> Result<(), Failure> {
    if info.is_null() {
        return Err(Failure::Null("info"));
    }
    let has_estimate = match &res.estimate {
        Some(est) => {
            copy_into(est, estimate, len)?;
            1
        }
        None => 0,
    };
    let status = match res.status {
        RecoveryStatus::Optimal => OnebitRecoveryStatus::Optimal,
        RecoveryStatus::Infeasible => OnebitRecoveryStatus::Infeasible,
        RecoveryStatus::NumericalFailure => OnebitRecoveryStatus::NumericalFailure,
        RecoveryStatus::NormUnresolved => OnebitRecoveryStatus::NormUnresolved,
    };
    let value = OnebitRecoveryInfo {
        status,
        objective: res.objective_value,
        t_sharp: res.t_sharp.unwrap_or(f64::NAN),
        iterations: res.iterations as u64,
        has_estimate,
    };
    write(info, value, "info")
}

/// Norm-aware recovery from a `GaussianDither` ensemble. On success with an
/// estimate, `estimate` (length `n`) receives `tau x# / t#`.
///
/// # Safety
/// `e` and `s` must be live handles, `estimate` valid for `len` doubles and
/// `info` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn onebit_recover_augmented(
    e: *const OnebitEnsemble,
    s: *const OnebitSigns,
    estimate: *mut f64,
    len: usize,
    info: *mut OnebitRecoveryInfo,
) -> OnebitStatus {
    guard(|| {
        let e = &borrow(e, "ensemble")?.0;
        let s = &borrow(s, "signs")?.0;
        let res = recovery::recover_augmented(e, s, &RecoveryOptions::default())?;
        finish_recovery(res, estimate, len, info)
    })
}

/// Unit-norm direction recovery from a `Zero`-shift ensemble.
///
/// # Safety
/// Same as [`onebit_recover_augmented`].
#[no_mangle]
pub unsafe extern "C" fn onebit_recover_direction(
    e: *const OnebitEnsemble,
    s: *const OnebitSigns,
    estimate: *mut f64,
    len: usize,
    info: *mut OnebitRecoveryInfo,
) -> OnebitStatus {
    guard(|| {
        let e = &borrow(e, "ensemble")?.0;
        let s = &borrow(s, "signs")?.0;
        let res = recovery::recover_direction(e, s, &RecoveryOptions::default())?;
        finish_recovery(res, estimate, len, info)
    })
}

#[no_mangle]
pub extern "C" fn onebit_erf(x: f64) -> f64 {
    special::erf(x)
}

#[no_mangle]
pub extern "C" fn onebit_erfc(x: f64) -> f64 {
    special::erfc(x)
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn onebit_erfinv(u: f64, out: *mut f64) -> OnebitStatus {
    guard(|| write(out, special::erfinv(u)?, "out"))
}

/// Measurements for `|Lambda - ||x||| <= delta` with probability `1 - epsilon`
/// for one fixed signal in the annulus `r <= ||x|| <= big_r`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn onebit_sample_size_fixed_signal(r: f64, big_r: f64, delta: f64, epsilon: f64, out: *mut u64) -> OnebitStatus {
    guard(|| write(out, edf::sample_size_fixed_signal(r, big_r, delta, epsilon)?, "out"))
}

/// Measurements for the uniform guarantee over `s`-sparse signals in `R^n`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn onebit_sample_size_uniform(
    r: f64,
    big_r: f64,
    delta: f64,
    n: usize,
    s: usize,
    c1: f64,
    out: *mut u64,
) -> OnebitStatus {
    guard(|| write(out, edf::sample_size_uniform(r, big_r, delta, n, s, c1)?, "out"))
}
