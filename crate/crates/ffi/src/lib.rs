//! C ABI over `rbf_cardinal`: opaque handles, status codes and a per-thread
//! last-error message.

use rbf_cardinal::cardinal::{build_cardinal_table, compute_tau};
use rbf_cardinal::interpolation::{fit_gram, fit_uniform, GramInterpolant, SampleSet, UniformInterpolant};
use rbf_cardinal::{CardinalTable, Error, Kernel};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbfcStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Unsupported = 3,
    Numerical = 4,
    Bandwidth = 5,
    OutOfRange = 6,
    GridMismatch = 7,
    Coverage = 8,
    IllConditioned = 9,
    InvalidSamples = 10,
    Io = 11,
    Parse = 12,
    Panic = 13,
    Other = 14,
}

/// A kernel: multiquadric, Poisson or Gaussian.
pub struct RbfcKernel(Kernel);

/// A sampled cardinal function.
pub struct RbfcTable(Arc<CardinalTable>);

/// Interpolant on the lattice j/N, |j| ≤ N.
pub struct RbfcUniform(UniformInterpolant);

/// Interpolant on scattered nodes.
pub struct RbfcGram(GramInterpolant);

/// Truncation plan; `gamma` and `d_lower` are NaN when not defined.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RbfcTruncation {
    pub tau: usize,
    pub terms: usize,
    pub gamma: f64,
    pub d_lower: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RbfcStatus {
    match e {
        Error::Domain(_) | Error::Singularity(_) | Error::Divergence(_) | Error::Config(_) => RbfcStatus::Domain,
        Error::Unsupported(_) => RbfcStatus::Unsupported,
        Error::NumericalConsistency(_) | Error::Evaluation { .. } => RbfcStatus::Numerical,
        Error::Bandwidth(_) => RbfcStatus::Bandwidth,
        Error::OutOfRange(_) => RbfcStatus::OutOfRange,
        Error::GridMismatch(_) | Error::KernelMismatch(_) => RbfcStatus::GridMismatch,
        Error::Coverage(_) => RbfcStatus::Coverage,
        Error::IllConditioned { .. } => RbfcStatus::IllConditioned,
        Error::InvalidSamples(_) | Error::Separation(_) => RbfcStatus::InvalidSamples,
        Error::Io(_) => RbfcStatus::Io,
        Error::Parse { .. } => RbfcStatus::Parse,
        _ => RbfcStatus::Other,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (RbfcStatus, String)>) -> RbfcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RbfcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RbfcStatus::Panic
        }
    }
}

fn lib<T>(r: rbf_cardinal::Result<T>) -> Result<T, (RbfcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RbfcStatus, String) {
    (RbfcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (RbfcStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (RbfcStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (RbfcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, (RbfcStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| (RbfcStatus::Domain, "path is not valid UTF-8".to_string()))?;
    Ok(Path::new(s))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rbfc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

fn new_kernel(k: rbf_cardinal::Result<Kernel>, out: *mut *mut RbfcKernel) -> RbfcStatus {
    guard(|| {
        let k = lib(k)?;
        unsafe { write_out(out, Box::into_raw(Box::new(RbfcKernel(k)))) }
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbfc_kernel_multiquadric(alpha: f64, c: f64, out: *mut *mut RbfcKernel) -> RbfcStatus {
    new_kernel(Kernel::multiquadric(alpha, c), out)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbfc_kernel_poisson(c: f64, out: *mut *mut RbfcKernel) -> RbfcStatus {
    new_kernel(Kernel::poisson(c), out)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbfc_kernel_gaussian(lambda: f64, out: *mut *mut RbfcKernel) -> RbfcStatus {
    new_kernel(Kernel::gaussian(lambda), out)
}

/// # Safety
/// `kernel` must come from an `rbfc_kernel_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rbfc_kernel_free(kernel: *mut RbfcKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// φ(x).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_kernel_spatial(kernel: *const RbfcKernel, x: f64, out: *mut f64) -> RbfcStatus {
    guard(|| write_out(out, deref(kernel, "kernel")?.0.spatial(x)))
}

/// φ̂(ξ).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_kernel_fourier(kernel: *const RbfcKernel, xi: f64, out: *mut f64) -> RbfcStatus {
    guard(|| {
        let v = lib(deref(kernel, "kernel")?.0.fourier(xi))?;
        write_out(out, v)
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_compute_tau(
    kernel: *const RbfcKernel,
    epsilon: f64,
    out: *mut RbfcTruncation,
) -> RbfcStatus {
    guard(|| {
        let plan = lib(compute_tau(&deref(kernel, "kernel")?.0, epsilon))?;
        write_out(
            out,
            RbfcTruncation {
                tau: plan.tau,
                terms: plan.terms(),
                gamma: plan.gamma.unwrap_or(f64::NAN),
                d_lower: plan.d_lower.unwrap_or(f64::NAN),
            },
        )
    })
}

/// Builds the cardinal table of `kernel` on [−n, n] with `m` points per unit.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_table_build(
    kernel: *const RbfcKernel,
    epsilon: f64,
    n: usize,
    m: usize,
    out: *mut *mut RbfcTable,
) -> RbfcStatus {
    guard(|| {
        let t = lib(build_cardinal_table(&deref(kernel, "kernel")?.0, epsilon, n, m))?;
        write_out(out, Box::into_raw(Box::new(RbfcTable(Arc::new(t)))))
    })
}

/// # Safety
/// `file` must be a NUL-terminated path and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbfc_table_load(file: *const c_char, out: *mut *mut RbfcTable) -> RbfcStatus {
    guard(|| {
        let t = lib(CardinalTable::load(path(file)?))?;
        write_out(out, Box::into_raw(Box::new(RbfcTable(Arc::new(t)))))
    })
}

/// # Safety
/// `table` must be valid and `file` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rbfc_table_save(table: *const RbfcTable, file: *const c_char) -> RbfcStatus {
    guard(|| lib(deref(table, "table")?.0.save(path(file)?)))
}

/// L(x) for |x| within the table half-width.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_table_eval(table: *const RbfcTable, x: f64, out: *mut f64) -> RbfcStatus {
    guard(|| {
        let v = lib(deref(table, "table")?.0.eval(x))?;
        write_out(out, v)
    })
}

/// max_j |L(j) − δ_{0j}| over the table.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_table_delta_residual(table: *const RbfcTable, out: *mut f64) -> RbfcStatus {
    guard(|| write_out(out, deref(table, "table")?.0.delta_residual()))
}

/// # Safety
/// `table` must come from `rbfc_table_build` or `rbfc_table_load` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rbfc_table_free(table: *mut RbfcTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

unsafe fn samples(nodes: *const f64, values: *const f64, len: usize) -> Result<SampleSet, (RbfcStatus, String)> {
    let x = slice(nodes, len, "nodes")?.to_vec();
    let y = slice(values, len, "values")?.to_vec();
    lib(SampleSet::new(x, y))
}

/// Fits the cardinal interpolant to samples at j/N, |j| ≤ N. The table must be
/// built for the kernel dilated by N; the interpolant keeps its own reference.
///
/// # Safety
/// `nodes` and `values` must hold `len` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_uniform_fit(
    kernel: *const RbfcKernel,
    table: *const RbfcTable,
    nodes: *const f64,
    values: *const f64,
    len: usize,
    out: *mut *mut RbfcUniform,
) -> RbfcStatus {
    guard(|| {
        let s = samples(nodes, values, len)?;
        let table = Arc::clone(&deref(table, "table")?.0);
        let interp = lib(fit_uniform(&s, &deref(kernel, "kernel")?.0, table))?;
        write_out(out, Box::into_raw(Box::new(RbfcUniform(interp))))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_uniform_eval(interp: *const RbfcUniform, x: f64, out: *mut f64) -> RbfcStatus {
    guard(|| write_out(out, deref(interp, "interpolant")?.0.eval(x)))
}

/// # Safety
/// `interp` must come from `rbfc_uniform_fit` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rbfc_uniform_free(interp: *mut RbfcUniform) {
    if !interp.is_null() {
        drop(Box::from_raw(interp));
    }
}

/// Solves the Gram system for scattered, strictly increasing nodes.
///
/// # Safety
/// `nodes` and `values` must hold `len` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_gram_fit(
    kernel: *const RbfcKernel,
    nodes: *const f64,
    values: *const f64,
    len: usize,
    out: *mut *mut RbfcGram,
) -> RbfcStatus {
    guard(|| {
        let s = samples(nodes, values, len)?;
        let interp = lib(fit_gram(&s, &deref(kernel, "kernel")?.0))?;
        write_out(out, Box::into_raw(Box::new(RbfcGram(interp))))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_gram_eval(interp: *const RbfcGram, x: f64, out: *mut f64) -> RbfcStatus {
    guard(|| write_out(out, deref(interp, "interpolant")?.0.eval(x)))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rbfc_gram_condition(interp: *const RbfcGram, out: *mut f64) -> RbfcStatus {
    guard(|| write_out(out, deref(interp, "interpolant")?.0.cond_estimate()))
}

/// # Safety
/// `interp` must come from `rbfc_gram_fit` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rbfc_gram_free(interp: *mut RbfcGram) {
    if !interp.is_null() {
        drop(Box::from_raw(interp));
    }
}
