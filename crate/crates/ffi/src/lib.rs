//! C ABI over the exact Gibbs engine.
//!
//! Every fallible call returns an [`SkStatus`]; on failure the message is kept
//! per thread and can be copied out with [`sk_last_error_message`]. Objects
//! are opaque handles owned by the caller and released with the matching
//! `*_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use skfluct::exact::{self, CoupledParams, GibbsTable, OverlapLaw};
use skfluct::model::{self, DisorderSample};
use skfluct::SkError;

/// Result codes shared by all entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    SizeMismatch = 4,
    MissingAux = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Disorder realization `g` (and optionally `g'`, `g''`).
pub struct SkDisorder(DisorderSample);

/// Exact Gibbs probabilities over all `2^n` configurations.
pub struct SkGibbsTable(GibbsTable);

/// Law of the Hamming distance between two independent replicas.
pub struct SkOverlapLaw(OverlapLaw);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &SkError) -> SkStatus {
    match err {
        SkError::Capacity { .. } => SkStatus::Capacity,
        SkError::SizeMismatch { .. } => SkStatus::SizeMismatch,
        SkError::MissingAux => SkStatus::MissingAux,
        _ => SkStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SkStatus, String)>) -> SkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SkStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SkStatus::Panic
        }
    }
}

fn lift<T>(r: skfluct::Result<T>) -> Result<T, (SkStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SkStatus, String) {
    (SkStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SkStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (SkStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_into(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (SkStatus, String)> {
    if len < src.len() {
        return Err((
            SkStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {}", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sk_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Largest `n` accepted by the exact routines.
#[no_mangle]
pub extern "C" fn sk_exact_cap() -> usize {
    exact::EXACT_CAP
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len − 1` bytes). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `ν(β) = −½ln(1 − β²) − β²/2` for `0 ≤ β < 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_nu(beta: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let v = lift(model::nu(beta))?;
        write_out(out, v, "out")
    })
}

/// Sample the `stream_index`-th disorder of `seed` for `n` spins.
///
/// # Safety
/// `out` must be a valid pointer; the handle it receives must be released
/// with [`sk_disorder_free`].
#[no_mangle]
pub unsafe extern "C" fn sk_disorder_sample(
    n: usize,
    seed: u64,
    stream_index: u64,
    with_aux: bool,
    out: *mut *mut SkDisorder,
) -> SkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = lift(model::sample_disorder(n, seed, stream_index, with_aux))?;
        out.write(Box::into_raw(Box::new(SkDisorder(s))));
        Ok(())
    })
}

/// Disorder from `n(n−1)/2` couplings in row-major upper-triangular order.
///
/// # Safety
/// `couplings` must point to `len` readable values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_disorder_from_couplings(
    n: usize,
    couplings: *const f64,
    len: usize,
    out: *mut *mut SkDisorder,
) -> SkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if couplings.is_null() && len > 0 {
            return Err(null("couplings"));
        }
        let g = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(couplings, len).to_vec()
        };
        let s = lift(DisorderSample::from_couplings(n, g, None))?;
        out.write(Box::into_raw(Box::new(SkDisorder(s))));
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sk_disorder_free(d: *mut SkDisorder) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of spins.
///
/// # Safety
/// `d` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_disorder_n(d: *const SkDisorder) -> usize {
    d.as_ref().map_or(0, |d| d.0.n)
}

/// Copy the couplings `g` into `buf`.
///
/// # Safety
/// `d` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn sk_disorder_couplings(d: *const SkDisorder, buf: *mut f64, len: usize) -> SkStatus {
    guard(|| copy_into(&deref(d, "disorder")?.0.couplings, buf, len))
}

/// `ln Z` without storing a table.
///
/// # Safety
/// `d` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_log_partition(d: *const SkDisorder, beta: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let v = lift(exact::log_partition(&deref(d, "disorder")?.0, beta))?;
        write_out(out, v, "out")
    })
}

/// Gibbs table of `H_{N,β}`.
///
/// # Safety
/// `d` must be a live handle; `out` must be valid. Free the result with
/// [`sk_gibbs_free`].
#[no_mangle]
pub unsafe extern "C" fn sk_gibbs_table(d: *const SkDisorder, beta: f64, out: *mut *mut SkGibbsTable) -> SkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t = lift(exact::gibbs_table(&deref(d, "disorder")?.0, beta))?;
        out.write(Box::into_raw(Box::new(SkGibbsTable(t))));
        Ok(())
    })
}

/// The pair of interpolated tables at `(t, s)`; the disorder must carry
/// auxiliary couplings.
///
/// # Safety
/// `d` must be a live handle; `out_a` and `out_b` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_coupled_tables(
    d: *const SkDisorder,
    beta: f64,
    t: f64,
    s: f64,
    out_a: *mut *mut SkGibbsTable,
    out_b: *mut *mut SkGibbsTable,
) -> SkStatus {
    guard(|| {
        if out_a.is_null() || out_b.is_null() {
            return Err(null("out"));
        }
        let params = lift(CoupledParams::new(t, s))?;
        let (a, b) = lift(exact::coupled_tables(&deref(d, "disorder")?.0, beta, params))?;
        out_a.write(Box::into_raw(Box::new(SkGibbsTable(a))));
        out_b.write(Box::into_raw(Box::new(SkGibbsTable(b))));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sk_gibbs_free(t: *mut SkGibbsTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// `ln Z` of the table.
///
/// # Safety
/// `t` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_gibbs_log_z(t: *const SkGibbsTable, out: *mut f64) -> SkStatus {
    guard(|| write_out(out, deref(t, "table")?.0.log_z, "out"))
}

/// Number of entries, `2^n`.
///
/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_gibbs_len(t: *const SkGibbsTable) -> usize {
    t.as_ref().map_or(0, |t| t.0.probs.len())
}

/// Copy the probabilities, indexed by configuration bits (bit `i` set means
/// spin `i` is `−1`).
///
/// # Safety
/// `t` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn sk_gibbs_probs(t: *const SkGibbsTable, buf: *mut f64, len: usize) -> SkStatus {
    guard(|| copy_into(&deref(t, "table")?.0.probs, buf, len))
}

/// Overlap law of independent draws from `a` and `b`.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be valid. Free the result
/// with [`sk_overlap_free`].
#[no_mangle]
pub unsafe extern "C" fn sk_overlap_law(
    a: *const SkGibbsTable,
    b: *const SkGibbsTable,
    out: *mut *mut SkOverlapLaw,
) -> SkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let law = lift(exact::overlap_law(&deref(a, "a")?.0, &deref(b, "b")?.0))?;
        out.write(Box::into_raw(Box::new(SkOverlapLaw(law))));
        Ok(())
    })
}

/// # Safety
/// `law` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sk_overlap_free(law: *mut SkOverlapLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// `n + 1`, the number of Hamming weights.
///
/// # Safety
/// `law` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sk_overlap_len(law: *const SkOverlapLaw) -> usize {
    law.as_ref().map_or(0, |l| l.0.q.len())
}

/// Copy `q[w]`, the probability of `w` disagreeing coordinates.
///
/// # Safety
/// `law` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn sk_overlap_weights(law: *const SkOverlapLaw, buf: *mut f64, len: usize) -> SkStatus {
    guard(|| copy_into(&deref(law, "law")?.0.q, buf, len))
}

/// `⟨R^k⟩`.
///
/// # Safety
/// `law` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_overlap_moment(law: *const SkOverlapLaw, k: u32, out: *mut f64) -> SkStatus {
    guard(|| write_out(out, deref(law, "law")?.0.moment(k), "out"))
}
