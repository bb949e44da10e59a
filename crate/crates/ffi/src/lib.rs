//! C interface to the tree-likeness metrics.
//!
//! Distance matrices live behind an opaque `TlDistanceMatrix` handle. Every fallible call
//! returns a `TlStatus`; on failure `tl_last_error_message` describes what went wrong on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use treelike::preprocess::rescale_to_ball;
use treelike::{
    build_distance_matrix, exact_delta, exact_ultrametricity, nj_scores, sample_delta,
    sample_ultrametricity, DeltaFormula, DeltaStats, DistanceMatrix, EmbeddingSet, Error,
    ErrorKind, MetricKind, MetricTag, Mode, Seed, UltraStats,
};

/// Opaque handle to a validated distance matrix.
pub struct TlDistanceMatrix(DistanceMatrix);

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Domain = 5,
    Shape = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlMetric {
    Euclidean = 0,
    Poincare = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlFormula {
    FourPoint = 0,
    Slack = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TlDeltaStats {
    pub delta_max: f64,
    pub delta_avg: f64,
    pub delta_std: f64,
    pub samples_evaluated: u64,
    /// 1 when every quadruple was enumerated.
    pub exact: u8,
    /// Seed used for sampling; meaningless when `exact` is 1.
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TlUltraStats {
    pub max_violation: f64,
    pub avg_violation: f64,
    pub std_violation: f64,
    pub num_violations: u64,
    pub total_triples: u64,
    pub avg_over_all_triples: f64,
    pub exact: u8,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TlNjStats {
    pub nj_max: f64,
    pub nj_avg: f64,
    pub nj_std: f64,
    pub n: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TlStatus {
    match e.kind() {
        ErrorKind::Parse => TlStatus::Parse,
        ErrorKind::Validation => TlStatus::Validation,
        ErrorKind::Domain => TlStatus::Domain,
        ErrorKind::Shape => TlStatus::Shape,
        ErrorKind::InvalidArgument => TlStatus::InvalidArgument,
        ErrorKind::Io => TlStatus::Io,
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

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            TlStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            TlStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this library / a live object.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and, per the contract, valid for writes of `T`.
    unsafe { out.write(value) };
    Ok(())
}

fn slice<'a>(data: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and, per the contract, points at `len` readable doubles.
    Ok(unsafe { std::slice::from_raw_parts(data, len) })
}

fn checked_len(a: usize, b: usize) -> Result<usize, Failure> {
    a.checked_mul(b).ok_or_else(|| Error::Shape(format!("{a} x {b} overflows")).into())
}

fn boxed(d: DistanceMatrix) -> *mut TlDistanceMatrix {
    Box::into_raw(Box::new(TlDistanceMatrix(d)))
}

fn formula(f: i32) -> Result<DeltaFormula, Failure> {
    match f {
        x if x == TlFormula::FourPoint as i32 => Ok(DeltaFormula::FourPoint),
        x if x == TlFormula::Slack as i32 => Ok(DeltaFormula::Slack),
        other => Err(Error::InvalidArgument(format!("unknown formula code {other}")).into()),
    }
}

fn delta_out(s: DeltaStats) -> TlDeltaStats {
    TlDeltaStats {
        delta_max: s.delta_max,
        delta_avg: s.delta_avg,
        delta_std: s.delta_std,
        samples_evaluated: s.samples_evaluated,
        exact: u8::from(s.mode == Mode::Exact),
        seed: s.seed.map_or(0, |x| x.0),
    }
}

fn ultra_out(s: UltraStats) -> TlUltraStats {
    TlUltraStats {
        max_violation: s.max_violation,
        avg_violation: s.avg_violation,
        std_violation: s.std_violation,
        num_violations: s.num_violations,
        total_triples: s.total_triples,
        avg_over_all_triples: s.avg_over_all_triples,
        exact: u8::from(s.mode == Mode::Exact),
        seed: s.seed.map_or(0, |x| x.0),
    }
}

/// Copies a row-major `n x n` matrix and validates it with tolerance `tol`
/// (symmetry, zero diagonal, non-negative finite entries).
///
/// # Safety
/// `data` must point at `n * n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_matrix_from_buffer(
    data: *const f64,
    n: usize,
    tol: f64,
    out: *mut *mut TlDistanceMatrix,
) -> TlStatus {
    guard(|| {
        let values = slice(data, checked_len(n, n)?, "data")?;
        let d = DistanceMatrix::from_flat(n, values.to_vec(), MetricTag::External)?;
        let violations = d.validate(tol);
        if let Some(first) = violations.first() {
            return Err(Error::Validation(format!("{} violation(s), first: {first}", violations.len())).into());
        }
        write_out(out, boxed(d), "out")
    })
}

/// Builds the pairwise distance matrix of `n` row-major points of dimension `dim`.
/// `metric` is a `TlMetric` value.
///
/// With `TL_METRIC_POINCARE` and `ball_norm > 0` the points are first scaled so the largest
/// norm equals `ball_norm`; with `ball_norm == 0` they must already lie inside the unit ball.
///
/// # Safety
/// `data` must point at `n * dim` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_matrix_from_embeddings(
    data: *const f64,
    n: usize,
    dim: usize,
    metric: i32,
    ball_norm: f64,
    out: *mut *mut TlDistanceMatrix,
) -> TlStatus {
    guard(|| {
        let values = slice(data, checked_len(n, dim)?, "data")?;
        let set = EmbeddingSet::from_flat(n, dim, values.to_vec())?;
        let d = match metric {
            x if x == TlMetric::Euclidean as i32 => build_distance_matrix(&set, MetricKind::Euclidean)?,
            x if x == TlMetric::Poincare as i32 && ball_norm > 0.0 => {
                let (scaled, _) = rescale_to_ball(&set, ball_norm)?;
                build_distance_matrix(&scaled, MetricKind::Poincare)?
            }
            x if x == TlMetric::Poincare as i32 => build_distance_matrix(&set, MetricKind::Poincare)?,
            other => return Err(Error::InvalidArgument(format!("unknown metric code {other}")).into()),
        };
        write_out(out, boxed(d), "out")
    })
}

/// Releases a matrix. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_matrix_free(m: *mut TlDistanceMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tl_matrix_n(m: *const TlDistanceMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n())
}

/// Copies the `n * n` entries into `buf`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_matrix_copy(m: *const TlDistanceMatrix, buf: *mut f64, len: usize) -> TlStatus {
    guard(|| {
        let m = non_null(m, "matrix")?;
        let src = m.0.as_flat();
        if len < src.len() {
            return Err(Error::Shape(format!("buffer holds {len} values, need {}", src.len())).into());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Delta from `samples` random quadruples; enumerates when that covers every quadruple.
/// `f` is a `TlFormula` value.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_delta_sample(
    m: *const TlDistanceMatrix,
    samples: u64,
    seed: u64,
    f: i32,
    out: *mut TlDeltaStats,
) -> TlStatus {
    guard(|| {
        let m = non_null(m, "matrix")?;
        let s = sample_delta(&m.0, samples, Seed(seed), formula(f)?)?;
        write_out(out, delta_out(s), "out")
    })
}

/// Delta over every quadruple. `f` is a `TlFormula` value.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_delta_exact(
    m: *const TlDistanceMatrix,
    f: i32,
    out: *mut TlDeltaStats,
) -> TlStatus {
    guard(|| {
        let m = non_null(m, "matrix")?;
        write_out(out, delta_out(exact_delta(&m.0, formula(f)?)?), "out")
    })
}

/// Ultrametricity from `samples` distinct random triples.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_ultra_sample(
    m: *const TlDistanceMatrix,
    samples: u64,
    epsilon: f64,
    seed: u64,
    out: *mut TlUltraStats,
) -> TlStatus {
    guard(|| {
        let m = non_null(m, "matrix")?;
        let s = sample_ultrametricity(&m.0, samples, epsilon, Seed(seed))?;
        write_out(out, ultra_out(s), "out")
    })
}

/// Ultrametricity over every triple.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_ultra_exact(
    m: *const TlDistanceMatrix,
    epsilon: f64,
    out: *mut TlUltraStats,
) -> TlStatus {
    guard(|| {
        let m = non_null(m, "matrix")?;
        write_out(out, ultra_out(exact_ultrametricity(&m.0, epsilon)?), "out")
    })
}

/// Neighbor-joining |Q| statistics; all zero below three points.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_nj_scores(m: *const TlDistanceMatrix, out: *mut TlNjStats) -> TlStatus {
    guard(|| {
        let m = non_null(m, "matrix")?;
        let s = nj_scores(&m.0);
        write_out(out, TlNjStats { nj_max: s.nj_max, nj_avg: s.nj_avg, nj_std: s.nj_std, n: s.n as u64 }, "out")
    })
}

/// Message for the last failed call on this thread, or null if none. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
