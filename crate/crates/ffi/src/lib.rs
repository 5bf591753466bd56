//! C ABI over `locscale`.
//!
//! Every function returns an [`LsStatus`]. On failure the message is kept
//! per thread and can be read with [`ls_last_error`]. Objects are opaque
//! handles created by `ls_*_new`/`ls_*_stack` and released with the
//! matching `ls_*_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use locscale::beta::{beta_p, dyadic_beta, tsp_sum, BetaNorm, BetaP, DyadicSquare};
use locscale::geometry::QuadratureMeasure;
use locscale::kernel::{heat_kernel, wavelet_deriv_value, KernelParams};
use locscale::scalespace::{classify_scales, ScaleGrid, ScaleStack};
use locscale::signal::{scale_transform_field_with, Boundary, SampledField};
use locscale::surface_scales::surface_scale_stack;
use locscale::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InputFormat = 2,
    Contract = 3,
    Domain = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsBoundary {
    Periodic = 0,
    ZeroPad = 1,
    Clamp = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsBetaP {
    One = 1,
    Two = 2,
    Inf = 0,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsBetaNorm {
    Mass = 0,
    Radius = 1,
}

/// Log-spaced scale grid `t = a^τ`, `τ` from `tau_min` to `tau_max` in
/// `steps` points.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsGrid {
    pub a: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub steps: usize,
}

/// Sampled function on a uniform 1-D or 2-D lattice.
pub struct LsField(SampledField);

/// Weighted point set in `ℝⁿ` carrying a `d`-dimensional quadrature.
pub struct LsMeasure(QuadratureMeasure);

/// Transform values and `τ`-derivatives, one row per evaluation point.
pub struct LsStack(ScaleStack);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LsStatus {
    match e {
        Error::Domain(_) => LsStatus::Domain,
        Error::Contract(_) => LsStatus::Contract,
        _ => LsStatus::InputFormat,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
    Small(usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LsStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            LsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Small(need))) => {
            set_error(format!("output buffer too small: {need} entries needed"));
            LsStatus::BufferTooSmall
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            LsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn href<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

fn grid_of(g: LsGrid) -> Result<ScaleGrid, Fail> {
    Ok(ScaleGrid::new(g.a, g.tau_min, g.tau_max, g.steps)?)
}

fn boundary_of(b: LsBoundary) -> Boundary {
    match b {
        LsBoundary::Periodic => Boundary::Periodic,
        LsBoundary::ZeroPad => Boundary::ZeroPad,
        LsBoundary::Clamp => Boundary::Clamp,
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `cap`) and returns its full length in bytes.
/// Returns 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn ls_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => {
            if !buf.is_null() && cap > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && cap > 0 {
                let n = bytes.len().min(cap - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// `K_t` in intrinsic dimension `d` at squared distance `r2`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ls_heat_kernel(d: usize, r2: f64, t: f64, out: *mut f64) -> LsStatus {
    guard(|| {
        let params = KernelParams::new(d, 2.0, locscale::kernel::DEFAULT_EPS_TRUNC)?;
        put(out, heat_kernel(r2, t, &params)?, "out")
    })
}

/// `∂_τ^j ψ_t` for grid base `a`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ls_wavelet(d: usize, a: f64, j: usize, r2: f64, t: f64, out: *mut f64) -> LsStatus {
    guard(|| {
        let params = KernelParams::new(d, a, locscale::kernel::DEFAULT_EPS_TRUNC)?;
        put(out, wavelet_deriv_value(j, r2, t, &params)?, "out")
    })
}

/// New 1-D field with spacing `h`.
///
/// # Safety
/// `values` must be valid for `len` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn ls_field_new_1d(values: *const f64, len: usize, h: f64, boundary: LsBoundary, out: *mut *mut LsField) -> LsStatus {
    guard(|| {
        let v = slice(values, len, "values")?.to_vec();
        let f = SampledField::new_1d(v, h, boundary_of(boundary))?;
        put(out, Box::into_raw(Box::new(LsField(f))), "out")
    })
}

/// New 2-D field, row-major with `nx` columns and `ny` rows.
///
/// # Safety
/// `values` must be valid for `nx*ny` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn ls_field_new_2d(
    values: *const f64,
    nx: usize,
    ny: usize,
    h: f64,
    boundary: LsBoundary,
    out: *mut *mut LsField,
) -> LsStatus {
    guard(|| {
        let count = nx.checked_mul(ny).ok_or_else(|| Error::contract("lattice size overflows"))?;
        let v = slice(values, count, "values")?.to_vec();
        let f = SampledField::new_2d(v, nx, ny, h, boundary_of(boundary))?;
        put(out, Box::into_raw(Box::new(LsField(f))), "out")
    })
}

/// # Safety
/// `field` must be null or a handle from `ls_field_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_field_free(field: *mut LsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Scale transform of a field with `τ`-derivatives up to 2.
///
/// # Safety
/// `field` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ls_field_scale_stack(field: *const LsField, grid: LsGrid, eps_trunc: f64, out: *mut *mut LsStack) -> LsStatus {
    guard(|| {
        let f = href(field, "field")?;
        let s = scale_transform_field_with(&f.0, &grid_of(grid)?, 2, eps_trunc)?;
        put(out, Box::into_raw(Box::new(LsStack(s))), "out")
    })
}

/// Measure from `count` points in `ℝⁿ` (row-major) with positive weights.
///
/// # Safety
/// `points` must be valid for `count*n` reads, `weights` for `count`.
#[no_mangle]
pub unsafe extern "C" fn ls_measure_new(
    d: usize,
    n: usize,
    points: *const f64,
    weights: *const f64,
    count: usize,
    out: *mut *mut LsMeasure,
) -> LsStatus {
    guard(|| {
        let total = count.checked_mul(n).ok_or_else(|| Error::contract("point array size overflows"))?;
        let p = slice(points, total, "points")?.to_vec();
        let w = slice(weights, count, "weights")?.to_vec();
        let m = QuadratureMeasure::new(d, n, p, w)?;
        put(out, Box::into_raw(Box::new(LsMeasure(m))), "out")
    })
}

/// # Safety
/// `measure` must be null or a handle from `ls_measure_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_measure_free(measure: *mut LsMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Scale transform of a measure at the listed point indices.
///
/// # Safety
/// `measure` must be a live handle, `eval` valid for `n_eval` reads.
#[no_mangle]
pub unsafe extern "C" fn ls_measure_scale_stack(
    measure: *const LsMeasure,
    eval: *const usize,
    n_eval: usize,
    grid: LsGrid,
    eps_trunc: f64,
    out: *mut *mut LsStack,
) -> LsStatus {
    guard(|| {
        let m = href(measure, "measure")?;
        let e = slice(eval, n_eval, "eval")?;
        let g = grid_of(grid)?;
        let params = KernelParams::new(m.0.d, g.a, eps_trunc)?;
        let s = surface_scale_stack(&m.0, e, &g, 2, &params)?;
        put(out, Box::into_raw(Box::new(LsStack(s))), "out")
    })
}

/// # Safety
/// `stack` must be null or a handle from an `ls_*_scale_stack` call.
#[no_mangle]
pub unsafe extern "C" fn ls_stack_free(stack: *mut LsStack) {
    if !stack.is_null() {
        drop(Box::from_raw(stack));
    }
}

/// Row count (points) and column count (scales).
///
/// # Safety
/// `stack` must be a live handle; `rows`, `cols` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ls_stack_shape(stack: *const LsStack, rows: *mut usize, cols: *mut usize) -> LsStatus {
    guard(|| {
        let s = href(stack, "stack")?;
        put(rows, s.0.values.rows(), "rows")?;
        put(cols, s.0.values.cols(), "cols")
    })
}

/// Copies `∂_τ^j S` (j = 0 for `S`) row-major into `buf`.
///
/// # Safety
/// `stack` must be a live handle and `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn ls_stack_values(stack: *const LsStack, j: usize, buf: *mut f64, cap: usize) -> LsStatus {
    guard(|| {
        let s = href(stack, "stack")?;
        let m = if j == 0 {
            &s.0.values
        } else {
            s.0.deriv(j)
                .ok_or_else(|| Error::contract(format!("derivative order {j} not computed")))?
        };
        let src = m.as_slice();
        if cap < src.len() {
            return Err(Fail::Small(src.len()));
        }
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Local scales (`τ` values) of one row that are `beta`-visible and
/// `delta`-separated. `count` receives the total; at most `cap` are written.
///
/// # Safety
/// `stack` must be a live handle, `taus` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn ls_stack_local_scales(
    stack: *const LsStack,
    row: usize,
    beta: f64,
    delta: f64,
    taus: *mut f64,
    cap: usize,
    count: *mut usize,
) -> LsStatus {
    guard(|| {
        let s = href(stack, "stack")?;
        let set = classify_scales(&s.0, row, beta, delta)?;
        let kept: Vec<f64> = set.entries.iter().filter(|e| e.visible && e.separated).map(|e| e.tau).collect();
        put(count, kept.len(), "count")?;
        if !kept.is_empty() && cap > 0 {
            if taus.is_null() {
                return Err(Fail::Null("taus"));
            }
            let n = kept.len().min(cap);
            ptr::copy_nonoverlapping(kept.as_ptr(), taus, n);
        }
        Ok(())
    })
}

/// `β_p(x, t)` of a measure against `d`-planes. Writes NaN when the ball
/// holds too few points.
///
/// # Safety
/// `measure` must be a live handle, `x` valid for `n` reads.
#[no_mangle]
pub unsafe extern "C" fn ls_beta_p(
    measure: *const LsMeasure,
    x: *const f64,
    t: f64,
    p: LsBetaP,
    d: usize,
    norm: LsBetaNorm,
    out: *mut f64,
) -> LsStatus {
    guard(|| {
        let m = href(measure, "measure")?;
        let x = slice(x, m.0.n, "x")?;
        let p = match p {
            LsBetaP::One => BetaP::One,
            LsBetaP::Two => BetaP::Two,
            LsBetaP::Inf => BetaP::Inf,
        };
        let norm = match norm {
            LsBetaNorm::Mass => BetaNorm::Mass,
            LsBetaNorm::Radius => BetaNorm::Radius,
        };
        let b = beta_p(&m.0, x, t, p, d, norm)?;
        put(out, b.map_or(f64::NAN, |f| f.beta), "out")
    })
}

unsafe fn planar(points: *const f64, count: usize) -> Result<Vec<[f64; 2]>, Fail> {
    let total = count.checked_mul(2).ok_or_else(|| Error::contract("point array size overflows"))?;
    let s = slice(points, total, "points")?;
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("points must be finite").into());
    }
    Ok(s.chunks(2).map(|c| [c[0], c[1]]).collect())
}

/// `β(Q)` of a planar point set for the dyadic square
/// `[j, j+1)×[k, k+1)·2^{-level}`.
///
/// # Safety
/// `points` must be valid for `2*count` reads.
#[no_mangle]
pub unsafe extern "C" fn ls_dyadic_beta(points: *const f64, count: usize, level: i32, j: i64, k: i64, out: *mut f64) -> LsStatus {
    guard(|| {
        let pts = planar(points, count)?;
        put(out, dyadic_beta(&pts, DyadicSquare::new(level, j, k)).beta, "out")
    })
}

/// `Σ β(Q)²·l(Q)` over levels `level_min..=level_max`.
///
/// # Safety
/// `points` must be valid for `2*count` reads.
#[no_mangle]
pub unsafe extern "C" fn ls_tsp_sum(points: *const f64, count: usize, level_min: i32, level_max: i32, out: *mut f64) -> LsStatus {
    guard(|| {
        let pts = planar(points, count)?;
        put(out, tsp_sum(&pts, level_min, level_max)?, "out")
    })
}
