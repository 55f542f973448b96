//! C ABI for vntree.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free`. Every fallible call returns a [`VnStatus`]; on failure the
//! message is available from [`vn_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use vntree::analyzer::{expected_height, expected_height_limit, gamma_rec};
use vntree::codebook::{build_codebook, build_length_index, Codebook, LengthIndex};
use vntree::extractor::{DecodeEvent, Extractor};
use vntree::{Error, Float, Number, Probability};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BadProbability = 3,
    OrderTooLarge = 4,
    CorruptCodebook = 5,
    Io = 6,
    NotConverged = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> VnStatus {
    match err {
        Error::ProbabilityOutOfRange(_) | Error::BadProbability(_) | Error::IrrationalInExactMode(_) => {
            VnStatus::BadProbability
        }
        Error::OrderTooLarge { .. } => VnStatus::OrderTooLarge,
        Error::CorruptCodebook { .. } | Error::CodebookFormat { .. } => VnStatus::CorruptCodebook,
        Error::Io { .. } => VnStatus::Io,
        Error::NotConverged { .. } => VnStatus::NotConverged,
        _ => VnStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> VnStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs `f`, turning panics into [`VnStatus::Panic`].
fn guard(f: impl FnOnce() -> VnStatus) -> VnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            VnStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, VnStatus> {
    if s.is_null() {
        set_error(format!("{what} is null"));
        return Err(VnStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        VnStatus::InvalidArgument
    })
}

unsafe fn probability_arg(s: *const c_char) -> Result<Probability, VnStatus> {
    str_arg(s, "p")?.parse().map_err(fail)
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!(stringify!($p), " is null"));
            return VnStatus::NullPointer;
        })+
    };
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Immutable codebook of T_k, shareable between extractors.
pub struct VnCodebook {
    index: Arc<LengthIndex>,
}

fn codebook_out(cb: Codebook, out: *mut *mut VnCodebook) -> VnStatus {
    let handle = Box::new(VnCodebook { index: Arc::new(build_length_index(cb)) });
    unsafe { *out = Box::into_raw(handle) };
    VnStatus::Ok
}

/// Builds the codebook of order `k`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn vn_codebook_build(k: u32, out: *mut *mut VnCodebook) -> VnStatus {
    non_null!(out);
    guard(|| match build_codebook(k) {
        Ok(cb) => codebook_out(cb, out),
        Err(e) => fail(e),
    })
}

/// Loads a codebook file written by `vntree build`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vn_codebook_load(path: *const c_char, out: *mut *mut VnCodebook) -> VnStatus {
    non_null!(out);
    let path = match str_arg(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    guard(|| {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) => {
                set_error(format!("{path}: {e}"));
                return VnStatus::Io;
            }
        };
        match Codebook::read_from(BufReader::new(file)) {
            Ok(cb) => codebook_out(cb, out),
            Err(e) => fail(e),
        }
    })
}

/// Number of codewords, or 0 for a null handle.
///
/// # Safety
/// `cb` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_codebook_len(cb: *const VnCodebook) -> usize {
    cb.as_ref().map_or(0, |c| c.index.len())
}

/// Tree height `2^k`, or 0 for a null handle.
///
/// # Safety
/// `cb` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_codebook_height(cb: *const VnCodebook) -> usize {
    cb.as_ref().map_or(0, |c| c.index.height())
}

/// # Safety
/// `cb` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_codebook_free(cb: *mut VnCodebook) {
    if !cb.is_null() {
        drop(Box::from_raw(cb));
    }
}

/// Streaming decoder state. Holds its own reference to the codebook.
pub struct VnExtractor {
    inner: Extractor<Arc<LengthIndex>>,
}

/// Counters of an extractor.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VnReport {
    pub bits_consumed: u64,
    pub bits_emitted: u64,
    pub restarts: u64,
    /// Bits read but not yet decoded.
    pub buffered: u64,
    /// Sum of the depths of all emitted bits.
    pub depth_sum: u64,
}

/// Creates an extractor over `cb`. The codebook handle may be freed
/// afterwards.
///
/// # Safety
/// `cb` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vn_extractor_new(cb: *const VnCodebook, out: *mut *mut VnExtractor) -> VnStatus {
    non_null!(cb, out);
    let index = Arc::clone(&(*cb).index);
    guard(|| {
        *out = Box::into_raw(Box::new(VnExtractor { inner: Extractor::new(index) }));
        VnStatus::Ok
    })
}

/// Feeds `n` source bits (one per byte, 0 or 1) and writes emitted bits
/// (1 for H, 0 for T) to `out`. Stops early once `out_cap` bits have been
/// emitted; `*consumed` tells how many input bits were read.
///
/// # Safety
/// `bits` must point to `n` readable bytes, `out` to `out_cap` writable
/// bytes, and `consumed`/`emitted` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vn_extractor_feed(
    ex: *mut VnExtractor,
    bits: *const u8,
    n: usize,
    out: *mut u8,
    out_cap: usize,
    consumed: *mut usize,
    emitted: *mut usize,
) -> VnStatus {
    non_null!(ex, consumed, emitted);
    if n > 0 && bits.is_null() || out_cap > 0 && out.is_null() {
        set_error("bits or out is null");
        return VnStatus::NullPointer;
    }
    *consumed = 0;
    *emitted = 0;
    let input: &[u8] = if n == 0 { &[] } else { std::slice::from_raw_parts(bits, n) };
    let output: &mut [u8] = if out_cap == 0 { &mut [] } else { std::slice::from_raw_parts_mut(out, out_cap) };
    let ex = &mut *ex;
    guard(|| {
        let (mut read, mut written) = (0, 0);
        for &b in input {
            if written == output.len() {
                break;
            }
            if b > 1 {
                set_error(format!("input byte {b} at offset {read} is not a bit"));
                *consumed = read;
                *emitted = written;
                return VnStatus::InvalidArgument;
            }
            read += 1;
            match ex.inner.decode_next(b == 1) {
                Ok(DecodeEvent::Emitted(e)) => {
                    output[written] = u8::from(e.bit());
                    written += 1;
                }
                Ok(_) => {}
                Err(e) => {
                    *consumed = read;
                    *emitted = written;
                    return fail(e);
                }
            }
        }
        *consumed = read;
        *emitted = written;
        VnStatus::Ok
    })
}

/// # Safety
/// `ex` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vn_extractor_report(ex: *const VnExtractor, out: *mut VnReport) -> VnStatus {
    non_null!(ex, out);
    let inner = &(*ex).inner;
    let r = inner.report();
    *out = VnReport {
        bits_consumed: r.bits_consumed,
        bits_emitted: r.bits_emitted,
        restarts: r.restarts,
        buffered: inner.buffer().len() as u64,
        depth_sum: r.depth_sum(),
    };
    VnStatus::Ok
}

/// Drops any partial codeword and zeroes the counters.
///
/// # Safety
/// `ex` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vn_extractor_reset(ex: *mut VnExtractor) -> VnStatus {
    non_null!(ex);
    (*ex).inner.reset();
    VnStatus::Ok
}

/// # Safety
/// `ex` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vn_extractor_free(ex: *mut VnExtractor) {
    if !ex.is_null() {
        drop(Box::from_raw(ex));
    }
}

/// Mantissa bits used by the analysis entry points.
pub const VN_PRECISION_BITS: usize = 256;

/// `E(Y_k)` for `p` given as a decimal, `a/b`, `1/sqrt2` or `1-1/e`.
///
/// # Safety
/// `p` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vn_expected_height(p: *const c_char, k: u32, out: *mut f64) -> VnStatus {
    non_null!(out);
    let p = match probability_arg(p) {
        Ok(p) => p,
        Err(s) => return s,
    };
    guard(|| match expected_height(&p.to_float(VN_PRECISION_BITS), k) {
        Ok(v) => {
            *out = v.to_f64();
            VnStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// `lim E(Y_k)`, iterating until the increment drops below `tol`.
/// `k_used` may be null.
///
/// # Safety
/// `p` must be a NUL-terminated string, `out` writable, `k_used` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn vn_expected_height_limit(
    p: *const c_char,
    tol: f64,
    out: *mut f64,
    k_used: *mut u32,
) -> VnStatus {
    non_null!(out);
    if !(tol.is_finite() && tol > 0.0) {
        set_error(format!("tolerance must be positive, got {tol}"));
        return VnStatus::InvalidArgument;
    }
    let p = match probability_arg(p) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let tol = match Float::parse_decimal(&format!("{tol:e}"), VN_PRECISION_BITS) {
        Some(t) => t,
        None => {
            set_error("bad tolerance");
            return VnStatus::InvalidArgument;
        }
    };
    guard(|| match expected_height_limit(&p.to_float(VN_PRECISION_BITS), &tol) {
        Ok(lim) => {
            *out = lim.value.to_f64();
            if !k_used.is_null() {
                *k_used = lim.k_used;
            }
            VnStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// `γ_k`, the probability that one pass through T_k emits a given label.
///
/// # Safety
/// `p` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vn_gamma(p: *const c_char, k: u32, out: *mut f64) -> VnStatus {
    non_null!(out);
    let p = match probability_arg(p) {
        Ok(p) => p,
        Err(s) => return s,
    };
    guard(|| match gamma_rec(&p.to_float(VN_PRECISION_BITS), k) {
        Ok(v) => {
            *out = v.to_f64();
            VnStatus::Ok
        }
        Err(e) => fail(e),
    })
}
