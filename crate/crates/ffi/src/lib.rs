//! C ABI over the `tcq` library.
//!
//! Conventions:
//! - every fallible call returns a [`TcqStatus`]; results go through out-pointers
//! - graphs and reports are opaque handles released with their `_free` function
//! - no string is ever allocated for the caller: text results are copied into
//!   caller buffers, and the last error message of the calling thread is read
//!   with [`tcq_last_error`]
//! - panics are caught at the boundary and reported as `TCQ_STATUS_PANIC`

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tcq::chain::AnalysisReport;
use tcq::sim::{simulate, SimMode};
use tcq::source::{rational_to_f64, SourceModel};
use tcq::{Error, LabeledGraph};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Graph text could not be parsed.
    Parse = 3,
    /// Graph is structurally invalid or not strongly connected and aperiodic.
    InvalidGraph = 4,
    /// Source distribution is malformed or does not match the graph alphabet.
    Source = 5,
    /// State enumeration or the chain solve failed.
    Analysis = 6,
    /// Rate-distortion computation failed.
    RateDistortion = 7,
    /// Caller buffer too small; the required length was still reported.
    BufferTooSmall = 8,
    InvalidArgument = 9,
    Panic = 10,
}

/// Opaque labelled graph.
pub struct TcqGraph {
    inner: LabeledGraph,
}

/// Opaque analysis result.
pub struct TcqReport {
    inner: AnalysisReport,
}

/// Monte Carlo estimate of the distortion.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TcqSimResult {
    pub n: u64,
    pub increments: u64,
    pub estimate: f64,
    pub std_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> TcqStatus {
    match e {
        Error::Syntax { .. } | Error::UnknownLabel { .. } | Error::Duplicate { .. } => TcqStatus::Parse,
        Error::NoOutEdge { .. }
        | Error::InvalidGraph(_)
        | Error::LabelCount { .. }
        | Error::NotPrimitive { .. }
        | Error::NonUniformDegree { .. } => TcqStatus::InvalidGraph,
        Error::Source(_) | Error::AlphabetMismatch { .. } => TcqStatus::Source,
        Error::RateOutOfRange(_) | Error::NonConvergence { .. } | Error::BoundViolation { .. } => {
            TcqStatus::RateDistortion
        }
        _ => TcqStatus::Analysis,
    }
}

struct Fail(TcqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records any failure as the thread's last error, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TcqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TcqStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TcqStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(TcqStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TcqStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(TcqStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(TcqStatus::NullPointer, format!("{what} is null")))
}

/// Copies `s` plus a NUL into `buf`; `needed` receives `strlen(s) + 1`.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    if !needed.is_null() {
        *needed = s.len() + 1;
    }
    if buf.is_null() || len < s.len() + 1 {
        return Err(Fail(
            TcqStatus::BufferTooSmall,
            format!("buffer needs {} bytes", s.len() + 1),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn source_for(g: &LabeledGraph, spec: Option<&str>) -> Result<SourceModel, Fail> {
    Ok(SourceModel::parse(spec.unwrap_or("uniform"), g.alphabet())?)
}

/// Length in bytes, including the terminating NUL, of the calling thread's last error message.
#[no_mangle]
pub extern "C" fn tcq_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len() + 1)
}

/// Copies the calling thread's last error message into `buf`.
///
/// Returns the number of bytes written including the NUL, or 0 if `buf` is
/// null or shorter than [`tcq_last_error_length`]. The message is empty after
/// a successful call.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tcq_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if buf.is_null() || len < e.len() + 1 {
            return 0;
        }
        ptr::copy_nonoverlapping(e.as_ptr(), buf.cast::<u8>(), e.len());
        *buf.add(e.len()) = 0;
        e.len() + 1
    })
}

/// Parses a graph description and checks it is strongly connected and aperiodic.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_graph_parse(text: *const c_char, out: *mut *mut TcqGraph) -> TcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let g = tcq::parse_graph(str_arg(text, "text")?)?;
        if !g.validate().is_primitive() {
            return Err(Fail(
                TcqStatus::InvalidGraph,
                "graph: not strongly connected and aperiodic".into(),
            ));
        }
        *out = Box::into_raw(Box::new(TcqGraph { inner: g }));
        Ok(())
    })
}

/// The built-in order-3 binary de Bruijn example graph over `a b c d`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_graph_example_debruijn8(out: *mut *mut TcqGraph) -> TcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(TcqGraph {
            inner: tcq::example_debruijn8(),
        }));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tcq_graph_free(g: *mut TcqGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live graph handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_graph_vertex_count(g: *const TcqGraph, out: *mut usize) -> TcqStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(g, "graph")?.inner.vertex_count();
        Ok(())
    })
}

/// # Safety
/// `g` must be a live graph handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_graph_alphabet_size(g: *const TcqGraph, out: *mut usize) -> TcqStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(g, "graph")?.inner.alphabet().len();
        Ok(())
    })
}

/// Exact asymptotic distortion of `g` under the memoryless source `source`
/// (`"uniform"`, `"a:1/2,b:1/2"`, or null for uniform).
///
/// # Safety
/// `g` must be a live graph handle; `source` null or NUL-terminated; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_analyze(
    g: *const TcqGraph,
    source: *const c_char,
    out: *mut *mut TcqReport,
) -> TcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let g = &ref_arg(g, "graph")?.inner;
        let spec = if source.is_null() {
            None
        } else {
            Some(str_arg(source, "source")?)
        };
        let report = tcq::analyze(g, &source_for(g, spec)?)?;
        *out = Box::into_raw(Box::new(TcqReport { inner: report }));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tcq_report_free(r: *mut TcqReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live report handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_report_state_count(r: *const TcqReport, out: *mut usize) -> TcqStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(r, "report")?.inner.state_count;
        Ok(())
    })
}

/// # Safety
/// `r` must be a live report handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_report_k(r: *const TcqReport, out: *mut u32) -> TcqStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(r, "report")?.inner.k;
        Ok(())
    })
}

/// Number of closed classes; `unique` is true when there is exactly one.
///
/// # Safety
/// `r` must be a live report handle; `classes` and `unique` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tcq_report_classes(
    r: *const TcqReport,
    classes: *mut usize,
    unique: *mut bool,
) -> TcqStatus {
    guard(|| {
        let r = &ref_arg(r, "report")?.inner;
        *out_arg(classes, "classes")? = r.class_count;
        *out_arg(unique, "unique")? = r.unique;
        Ok(())
    })
}

/// # Safety
/// `r` must be a live report handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_report_distortion_f64(r: *const TcqReport, out: *mut f64) -> TcqStatus {
    guard(|| {
        *out_arg(out, "out")? = rational_to_f64(&ref_arg(r, "report")?.inner.distortion);
        Ok(())
    })
}

/// The exact distortion as `"num/den"` in lowest terms.
///
/// `needed` (may be null) always receives the buffer size required,
/// including the NUL. Returns `TCQ_STATUS_BUFFER_TOO_SMALL` if `len` is short.
///
/// # Safety
/// `r` must be a live report handle; `buf` null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tcq_report_distortion_string(
    r: *const TcqReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> TcqStatus {
    guard(|| {
        let text = ref_arg(r, "report")?.inner.distortion.to_string();
        copy_out(&text, buf, len, needed)
    })
}

/// Monte Carlo estimate over `n` samples. `workers == 0` runs the single
/// sequential stream; otherwise batches restart from the zero vector and run
/// on `workers` threads (the result does not depend on `workers`).
///
/// # Safety
/// `g` must be a live graph handle; `source` null or NUL-terminated; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_simulate(
    g: *const TcqGraph,
    source: *const c_char,
    n: u64,
    seed: u64,
    workers: usize,
    out: *mut TcqSimResult,
) -> TcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = &ref_arg(g, "graph")?.inner;
        if n == 0 {
            return Err(Fail(TcqStatus::InvalidArgument, "n must be at least 1".into()));
        }
        let spec = if source.is_null() {
            None
        } else {
            Some(str_arg(source, "source")?)
        };
        let mode = match workers {
            0 => SimMode::Sequential,
            w => SimMode::Parallel { workers: w },
        };
        let r = simulate(g, &source_for(g, spec)?, n, seed, mode)?;
        *out = TcqSimResult {
            n: r.n,
            increments: r.increments,
            estimate: r.estimate,
            std_error: r.stderr,
        };
        Ok(())
    })
}

/// Distortion-rate function of the equiprobable source on `alphabet_size`
/// symbols at `rate` bits per symbol.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn tcq_rd_uniform(
    alphabet_size: usize,
    rate: f64,
    tol: f64,
    out: *mut f64,
) -> TcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if alphabet_size < 2 {
            return Err(Fail(TcqStatus::InvalidArgument, "alphabet needs at least 2 symbols".into()));
        }
        let names: Vec<String> = (0..alphabet_size).map(|i| i.to_string()).collect();
        let src = SourceModel::uniform(&names)?;
        *out = tcq::rd::blahut(&src, rate, tol)?.distortion;
        Ok(())
    })
}
