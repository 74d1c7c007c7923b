//! C ABI over `clifford_hull`.
//!
//! Every entry point returns a [`ChStatus`], writes results through out
//! pointers only on success, and never unwinds across the boundary. Handles
//! are opaque and owned by the caller until passed to their `_free` function.
//! A message for the last failure on the calling thread is available from
//! [`ch_last_error_message`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use clifford_hull::error::Error;
use clifford_hull::estimators::h_closed;
use clifford_hull::experiment::simulate_trial;
use clifford_hull::hull::{build_hull_raw, f_vector, mean_valence, validate, HullComplex};
use clifford_hull::measure::alpha_beta_integral;
use clifford_hull::sampling::{sample_process, PointProcessSample, SeedSpec};
use clifford_hull::torus::{cap_from_points, cap_measure, Cap, TorusPoint};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Buffer too small; the required length was written where provided.
    BufferTooSmall = 3,
    /// Exact orientation determinant vanished (non-general-position input).
    DegenerateTie = 4,
    /// Geometry has no cap (coincident or coplanar embedded points).
    Geometry = 5,
    InvariantViolation = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: ChStatus, msg: impl Into<String>) -> ChStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn from_error(e: Error) -> ChStatus {
    let status = match &e {
        Error::Hull(_) => ChStatus::DegenerateTie,
        Error::Geometry(_) => ChStatus::Geometry,
        Error::InvariantViolation(_) => ChStatus::InvariantViolation,
        _ => ChStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics to [`ChStatus::Panic`].
fn guard(f: impl FnOnce() -> ChStatus) -> ChStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(ChStatus::Panic, msg)
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(ChStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Copies the last failure message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ch_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Face numbers of a 4-polytope.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChFVector {
    pub f0: u64,
    pub f1: u64,
    pub f2: u64,
    pub f3: u64,
}

/// Opaque convex hull.
pub struct ChHull(HullComplex);

/// Builds the hull of `n_points` points given as `4 * n_points` doubles.
///
/// # Safety
/// `coords` must be valid for `4 * n_points` reads (or null when
/// `n_points == 0`); `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_hull_build(coords: *const f64, n_points: usize, out: *mut *mut ChHull) -> ChStatus {
    guard(|| {
        non_null!(out);
        if n_points > 0 {
            non_null!(coords);
        }
        let Some(len) = n_points.checked_mul(4) else {
            return fail(ChStatus::InvalidArgument, "n_points overflows");
        };
        let flat = if len == 0 { &[][..] } else { std::slice::from_raw_parts(coords, len) };
        if flat.iter().any(|x| !x.is_finite()) {
            return fail(ChStatus::InvalidArgument, "coordinates must be finite");
        }
        let pts: Vec<[f64; 4]> = flat.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
        match build_hull_raw(pts) {
            Ok(h) => {
                *out = Box::into_raw(Box::new(ChHull(h)));
                ChStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Face numbers, with the conventions for fewer than five points.
///
/// # Safety
/// `hull` must come from [`ch_hull_build`]; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_hull_fvector(hull: *const ChHull, out: *mut ChFVector) -> ChStatus {
    guard(|| {
        non_null!(hull, out);
        let f = f_vector(&(*hull).0);
        *out = ChFVector { f0: f.f0, f1: f.f1, f2: f.f2, f3: f.f3 };
        ChStatus::Ok
    })
}

/// Mean vertex valence `2 f1 / f0`.
///
/// # Safety
/// `hull` must come from [`ch_hull_build`]; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_hull_mean_valence(hull: *const ChHull, out: *mut f64) -> ChStatus {
    guard(|| {
        non_null!(hull, out);
        *out = mean_valence(&f_vector(&(*hull).0));
        ChStatus::Ok
    })
}

/// Whether the facet complex passes every structural check (1) or not (0).
///
/// # Safety
/// `hull` must come from [`ch_hull_build`]; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_hull_validate(hull: *const ChHull, out: *mut i32) -> ChStatus {
    guard(|| {
        non_null!(hull, out);
        let h = &(*hull).0;
        let r = validate(h, &f_vector(h));
        *out = i32::from(r.degenerate || r.is_clean());
        ChStatus::Ok
    })
}

/// Writes the facets as sorted index quadruples, in lexicographic order, to
/// `buf` (room for `capacity` facets) and their count to `count`. With a
/// short or null buffer only `count` is written.
///
/// # Safety
/// `hull` must come from [`ch_hull_build`]; `count` must be valid for one
/// write; `buf` must be null or valid for `4 * capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn ch_hull_facets(
    hull: *const ChHull,
    buf: *mut u32,
    capacity: usize,
    count: *mut usize,
) -> ChStatus {
    guard(|| {
        non_null!(hull, count);
        let facets = (*hull).0.facet_sets();
        *count = facets.len();
        if buf.is_null() || capacity < facets.len() {
            return fail(ChStatus::BufferTooSmall, format!("need room for {} facets", facets.len()));
        }
        let dst = std::slice::from_raw_parts_mut(buf, 4 * facets.len());
        for (d, f) in dst.chunks_exact_mut(4).zip(&facets) {
            d.copy_from_slice(f);
        }
        ChStatus::Ok
    })
}

/// Releases a hull; null is a no-op.
///
/// # Safety
/// `hull` must be null or come from [`ch_hull_build`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ch_hull_free(hull: *mut ChHull) {
    if !hull.is_null() {
        drop(Box::from_raw(hull));
    }
}

/// Opaque realized point process.
pub struct ChSample(PointProcessSample);

/// Samples a Poisson process of rate `lambda` on the torus from the stream
/// `(master_seed, stream_index)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_sample_process(
    lambda: f64,
    master_seed: u64,
    stream_index: u64,
    out: *mut *mut ChSample,
) -> ChStatus {
    guard(|| {
        non_null!(out);
        match sample_process(lambda, SeedSpec::new(master_seed, stream_index)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(ChSample(s)));
                ChStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Number of points in a sample.
///
/// # Safety
/// `sample` must come from [`ch_sample_process`]; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_sample_len(sample: *const ChSample, out: *mut usize) -> ChStatus {
    guard(|| {
        non_null!(sample, out);
        *out = (*sample).0.points.len();
        ChStatus::Ok
    })
}

/// Writes the points as `(phi, psi)` pairs to `buf` (room for `capacity`
/// points) and their count to `count`.
///
/// # Safety
/// `sample` must come from [`ch_sample_process`]; `count` must be valid for
/// one write; `buf` must be null or valid for `2 * capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn ch_sample_angles(
    sample: *const ChSample,
    buf: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> ChStatus {
    guard(|| {
        non_null!(sample, count);
        let pts = &(*sample).0.points;
        *count = pts.len();
        if pts.is_empty() {
            return ChStatus::Ok;
        }
        if buf.is_null() || capacity < pts.len() {
            return fail(ChStatus::BufferTooSmall, format!("need room for {} points", pts.len()));
        }
        let dst = std::slice::from_raw_parts_mut(buf, 2 * pts.len());
        for (d, p) in dst.chunks_exact_mut(2).zip(pts) {
            d[0] = p.phi();
            d[1] = p.psi();
        }
        ChStatus::Ok
    })
}

/// Releases a sample; null is a no-op.
///
/// # Safety
/// `sample` must be null or come from [`ch_sample_process`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ch_sample_free(sample: *mut ChSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// One simulated hull.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChTrialRecord {
    pub stream_index: u64,
    pub lambda: f64,
    pub n_points: u64,
    pub fvector: ChFVector,
    pub vbar: f64,
    pub euler_residual: i64,
    pub r1_residual: i64,
    pub r2_residual: i64,
    /// 1 when fewer than five points were sampled.
    pub degenerate: i32,
}

/// Samples and hulls one process from the stream `(master_seed, stream_index)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_simulate_trial(
    lambda: f64,
    master_seed: u64,
    stream_index: u64,
    out: *mut ChTrialRecord,
) -> ChStatus {
    guard(|| {
        non_null!(out);
        match simulate_trial(lambda, SeedSpec::new(master_seed, stream_index), stream_index) {
            Ok(r) => {
                *out = ChTrialRecord {
                    stream_index: r.seed,
                    lambda: r.lambda,
                    n_points: r.n_points,
                    fvector: ChFVector { f0: r.f0, f1: r.f1, f2: r.f2, f3: r.f3 },
                    vbar: r.vbar,
                    euler_residual: r.euler_residual,
                    r1_residual: r.r1_residual,
                    r2_residual: r.r2_residual,
                    degenerate: i32::from(r.degenerate),
                };
                ChStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Cap `a² sin²((φ−φ₀)/2) + b² sin²((ψ−ψ₀)/2) ≤ 1`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChCap {
    pub a: f64,
    pub b: f64,
    pub phi0: f64,
    pub psi0: f64,
}

/// Smaller cap cut by the hyperplane through four torus points, given as
/// `(phi, psi)` pairs in `angles[0..8]`.
///
/// # Safety
/// `angles` must be valid for 8 reads; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_cap_from_points(angles: *const f64, out: *mut ChCap) -> ChStatus {
    guard(|| {
        non_null!(angles, out);
        let a = std::slice::from_raw_parts(angles, 8);
        if a.iter().any(|x| !x.is_finite()) {
            return fail(ChStatus::InvalidArgument, "angles must be finite");
        }
        let pts: [TorusPoint; 4] = std::array::from_fn(|i| TorusPoint::new(a[2 * i], a[2 * i + 1]));
        match cap_from_points(pts) {
            Ok(c) => {
                *out = ChCap { a: c.a, b: c.b, phi0: c.phi0, psi0: c.psi0 };
                ChStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Area of the cap with shape parameters `a`, `b` (`a² + b² ≥ 2`).
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_cap_measure(a: f64, b: f64, out: *mut f64) -> ChStatus {
    guard(|| {
        non_null!(out);
        match Cap::new(a, b, 0.0, 0.0) {
            Ok(c) => {
                *out = cap_measure(&c);
                ChStatus::Ok
            }
            Err(e) => fail(ChStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// `h(ν) = E[1/(ζ+4)]` for `ζ ~ Pois(ν)`, `ν > 0`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_h(nu: f64, out: *mut f64) -> ChStatus {
    guard(|| {
        non_null!(out);
        match h_closed(nu) {
            Ok(v) => {
                *out = v;
                ChStatus::Ok
            }
            Err(e) => fail(ChStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// `∫∫ α²β² dα dβ` over `{max(α, β) < 1/100, αβ < τ}`, `0 < τ < 10⁻⁴`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ch_alpha_beta_integral(tau: f64, out: *mut f64) -> ChStatus {
    guard(|| {
        non_null!(out);
        match alpha_beta_integral(tau) {
            Ok(v) => {
                *out = v;
                ChStatus::Ok
            }
            Err(e) => fail(ChStatus::InvalidArgument, e.to_string()),
        }
    })
}
