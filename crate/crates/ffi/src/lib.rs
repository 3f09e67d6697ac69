//! C ABI for `lcdiff`.
//!
//! Every fallible function returns an `int32_t` status (`LCDIFF_OK` on
//! success) and writes results through out-pointers. After a failure,
//! `lcdiff_last_error` copies a message for the calling thread. Grids are
//! opaque handles owned by the caller and released with
//! `lcdiff_grid_free`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use lcdiff::dist::{discretize, laplace_cdf, GridDensity, Law};
use lcdiff::mc::{ks_test, sample_range, Generator};
use lcdiff::shape::check_log_concavity_grid;
use lcdiff::specfun::{bessel_k0, k_ratio, log_bessel_k0};
use lcdiff::transform::{mgf_via_conditioning, mgf_via_density, self_difference, self_difference_quadrature};
use lcdiff::Error;

pub const LCDIFF_OK: i32 = 0;
pub const LCDIFF_ERR_NULL: i32 = 1;
pub const LCDIFF_ERR_DOMAIN: i32 = 2;
pub const LCDIFF_ERR_INVALID_GRID: i32 = 3;
pub const LCDIFF_ERR_NON_CONVERGENCE: i32 = 4;
pub const LCDIFF_ERR_DIVERGENCE: i32 = 5;
pub const LCDIFF_ERR_NOT_NORMALIZED: i32 = 6;
pub const LCDIFF_ERR_BUFFER: i32 = 7;
pub const LCDIFF_ERR_OTHER: i32 = 8;
pub const LCDIFF_ERR_PANIC: i32 = 9;

pub const LCDIFF_LAW_NORMAL: u32 = 0;
pub const LCDIFF_LAW_NORMAL_PRODUCT: u32 = 1;
pub const LCDIFF_LAW_LAPLACE: u32 = 2;

pub const LCDIFF_GENERATOR_NORMAL_PRODUCT: u32 = 0;
pub const LCDIFF_GENERATOR_PRODUCT_SELF_DIFFERENCE: u32 = 1;

pub const LCDIFF_MGF_DENSITY_QUADRATURE: u32 = 0;
pub const LCDIFF_MGF_GAUSSIAN_CONDITIONING: u32 = 1;

/// Opaque grid density handle.
pub struct LcdiffGrid(GridDensity);

/// Result of a log-concavity check. Witness fields are meaningful only when
/// `has_witness` is 1.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LcdiffVerdict {
    pub holds: i32,
    pub has_witness: i32,
    pub x: f64,
    pub m: f64,
    pub y: f64,
    pub violation: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LcdiffKsReport {
    pub n: u64,
    pub d: f64,
    pub scaled: f64,
    pub threshold: f64,
    pub pass: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain { .. } | Error::Singularity(_) | Error::Parse(_) => LCDIFF_ERR_DOMAIN,
            Error::InvalidGrid(_) | Error::TooFewNodes(_) => LCDIFF_ERR_INVALID_GRID,
            Error::NonConvergence { .. } => LCDIFF_ERR_NON_CONVERGENCE,
            Error::Divergence { .. } => LCDIFF_ERR_DIVERGENCE,
            Error::NotNormalized { .. } => LCDIFF_ERR_NOT_NORMALIZED,
            _ => LCDIFF_ERR_OTHER,
        };
        Failure(code, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LCDIFF_ERR_NULL, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LCDIFF_OK,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            LCDIFF_ERR_PANIC
        }
    }
}

fn law(code: u32) -> Result<Law, Failure> {
    match code {
        LCDIFF_LAW_NORMAL => Ok(Law::Normal),
        LCDIFF_LAW_NORMAL_PRODUCT => Ok(Law::NormalProduct),
        LCDIFF_LAW_LAPLACE => Ok(Law::Laplace),
        other => Err(Failure(LCDIFF_ERR_DOMAIN, format!("unknown law code {other}"))),
    }
}

fn generator(code: u32) -> Result<Generator, Failure> {
    match code {
        LCDIFF_GENERATOR_NORMAL_PRODUCT => Ok(Generator::NormalProduct),
        LCDIFF_GENERATOR_PRODUCT_SELF_DIFFERENCE => Ok(Generator::ProductSelfDifference),
        other => Err(Failure(LCDIFF_ERR_DOMAIN, format!("unknown generator code {other}"))),
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn grid_ref<'a>(g: *const LcdiffGrid) -> Result<&'a GridDensity, Failure> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("grid"))
}

unsafe fn emit_grid(out: *mut *mut LcdiffGrid, g: GridDensity) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(LcdiffGrid(g))))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_last_error(buf: *mut c_char, len: usize) -> usize {
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

/// `K₀(x)` for `x > 0`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_bessel_k0(x: f64, out: *mut f64) -> i32 {
    guard(|| write(out, bessel_k0(x)?.value))
}

/// `ln K₀(x)` for `x > 0`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_log_bessel_k0(x: f64, out: *mut f64) -> i32 {
    guard(|| write(out, log_bessel_k0(x)?))
}

/// `K₀'(x)/K₀(x)` for `x > 0`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_k_ratio(x: f64, out: *mut f64) -> i32 {
    guard(|| write(out, k_ratio(x)?))
}

/// Samples a built-in law on the midpoint grid of half-width `half_width`
/// with `n_cells` cells.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_grid_discretize(
    law_code: u32,
    half_width: f64,
    n_cells: usize,
    out: *mut *mut LcdiffGrid,
) -> i32 {
    guard(|| emit_grid(out, discretize(&law(law_code)?.density(), half_width, n_cells)?))
}

/// Wraps caller-supplied values (copied) as a grid density.
///
/// # Safety
/// `values` must be null or point to `n_cells` readable doubles; `out` must
/// be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_grid_from_values(
    half_width: f64,
    values: *const f64,
    n_cells: usize,
    out: *mut *mut LcdiffGrid,
) -> i32 {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let v = slice::from_raw_parts(values, n_cells).to_vec();
        emit_grid(out, GridDensity::new(half_width, v)?)
    })
}

/// Releases a grid. Null is ignored.
///
/// # Safety
/// `g` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_grid_free(g: *mut LcdiffGrid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_grid_len(g: *const LcdiffGrid) -> usize {
    g.as_ref().map_or(0, |g| g.0.n_cells())
}

/// Half-width of the grid, or NaN for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_grid_half_width(g: *const LcdiffGrid) -> f64 {
    g.as_ref().map_or(f64::NAN, |g| g.0.half_width())
}

/// Copies the grid values into `out`, which must hold `len` doubles with
/// `len` at least the grid length.
///
/// # Safety
/// `g` must be null or a live handle; `out` must be null or point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_grid_values(g: *const LcdiffGrid, out: *mut f64, len: usize) -> i32 {
    guard(|| {
        let g = grid_ref(g)?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let v = g.values();
        if len < v.len() {
            return Err(Failure(
                LCDIFF_ERR_BUFFER,
                format!("buffer holds {len} values, grid has {}", v.len()),
            ));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Ok(())
    })
}

/// Density of `X - X'` by FFT; the result has twice the half-width and
/// twice the cells.
///
/// # Safety
/// `g` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_grid_self_difference(
    g: *const LcdiffGrid,
    out: *mut *mut LcdiffGrid,
) -> i32 {
    guard(|| emit_grid(out, self_difference(grid_ref(g)?)?))
}

/// Density of `X - X'` for a built-in law by node-wise quadrature, on the
/// grid `lcdiff_grid_self_difference` would produce.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_self_difference_quadrature(
    law_code: u32,
    half_width: f64,
    n_cells: usize,
    tol: f64,
    out: *mut *mut LcdiffGrid,
) -> i32 {
    guard(|| {
        let d = law(law_code)?.density();
        emit_grid(out, self_difference_quadrature(&d, half_width, n_cells, tol)?)
    })
}

/// Moment generating function of a built-in law at `t`. The conditioning
/// method exists only for the normal product.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_mgf(law_code: u32, method: u32, t: f64, tol: f64, out: *mut f64) -> i32 {
    guard(|| {
        let law = law(law_code)?;
        let value = match method {
            LCDIFF_MGF_DENSITY_QUADRATURE => mgf_via_density(&law.density(), t, tol)?,
            LCDIFF_MGF_GAUSSIAN_CONDITIONING if law == Law::NormalProduct => mgf_via_conditioning(t, tol)?,
            other => {
                return Err(Failure(
                    LCDIFF_ERR_DOMAIN,
                    format!("method {other} is not available for {law}"),
                ))
            }
        };
        write(out, value.value)
    })
}

/// Midpoint log-concavity check of a grid.
///
/// # Safety
/// `g` must be null or a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_check_log_concavity(
    g: *const LcdiffGrid,
    tol: f64,
    out: *mut LcdiffVerdict,
) -> i32 {
    guard(|| {
        let v = check_log_concavity_grid(grid_ref(g)?, tol)?;
        let mut r = LcdiffVerdict {
            holds: i32::from(v.holds()),
            ..LcdiffVerdict::default()
        };
        if let Some(w) = v.witness {
            r.has_witness = 1;
            r.x = w.x;
            r.m = w.m;
            r.y = w.y;
            r.violation = w.violation;
        }
        write(out, r)
    })
}

/// Writes draws `start .. start + n` of a generator into `out`.
///
/// # Safety
/// `out` must be null or point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_sample(
    generator_code: u32,
    seed: u64,
    start: u64,
    n: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let g = generator(generator_code)?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let values = sample_range(g, seed, start, n);
        ptr::copy_nonoverlapping(values.as_ptr(), out, n);
        Ok(())
    })
}

/// One-sample KS test of `values` against the standard Laplace CDF.
///
/// # Safety
/// `values` must be null or point to `n` readable doubles; `out` must be
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lcdiff_ks_laplace(
    values: *const f64,
    n: usize,
    alpha: f64,
    out: *mut LcdiffKsReport,
) -> i32 {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let r = ks_test(slice::from_raw_parts(values, n), laplace_cdf, alpha)?;
        write(
            out,
            LcdiffKsReport {
                n: r.n as u64,
                d: r.d,
                scaled: r.scaled,
                threshold: r.threshold,
                pass: i32::from(r.pass),
            },
        )
    })
}
