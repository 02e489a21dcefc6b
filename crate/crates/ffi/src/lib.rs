//! C ABI over the aggdiff library.
//!
//! Every entry point returns an `AggdiffStatus`; results come back through
//! out-pointers. Objects are opaque handles released with the matching
//! `*_free` function. After a failure, `aggdiff_last_error` returns a
//! thread-local message describing it.

use aggdiff::convexity;
use aggdiff::density::RadialDensity;
use aggdiff::energy;
use aggdiff::kernel::{Kernel, ModelParams};
use aggdiff::specfun::{self, HypergeomParams};
use aggdiff::steady::{self, SolverOptions, SteadyState};
use aggdiff::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggdiffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Regime = 4,
    NotConverged = 5,
    Collapse = 6,
    Instability = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Other = 10,
}

/// Free-energy breakdown.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AggdiffEnergy {
    pub entropy: f64,
    pub interaction: f64,
    pub confinement: f64,
    pub total: f64,
}

/// Model parameters (N, k, m, χ, M).
pub struct AggdiffParams {
    inner: ModelParams,
}

/// Piecewise-constant radial density.
pub struct AggdiffDensity {
    inner: RadialDensity,
}

/// Result of the steady-state solver.
pub struct AggdiffSteady {
    inner: SteadyState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AggdiffStatus {
    match e {
        Error::InvalidParams(_) | Error::InvalidDensity(_) | Error::Config(_) | Error::MassMismatch { .. } => {
            AggdiffStatus::InvalidArgument
        }
        Error::Domain(_) | Error::Pole(_) | Error::Divergent(_) | Error::Singularity(_) => AggdiffStatus::Domain,
        Error::Regime(_) | Error::Degenerate(_) => AggdiffStatus::Regime,
        Error::NotConverged { .. } | Error::NoConvergence(_) | Error::Quadrature { .. } | Error::Timeout { .. } => {
            AggdiffStatus::NotConverged
        }
        Error::Collapse { .. } => AggdiffStatus::Collapse,
        Error::Instability(_) => AggdiffStatus::Instability,
        Error::Io(_) => AggdiffStatus::Other,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (AggdiffStatus, String)>>(f: F) -> AggdiffStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AggdiffStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AggdiffStatus::Panic
        }
    }
}

fn lib<T>(r: aggdiff::Result<T>) -> Result<T, (AggdiffStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (AggdiffStatus, String) {
    (AggdiffStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (AggdiffStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (AggdiffStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the most recent failure on this thread; empty if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn aggdiff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `out_params` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_params_new(
    n: usize,
    k: f64,
    m: f64,
    chi: f64,
    mass: f64,
    out_params: *mut *mut AggdiffParams,
) -> AggdiffStatus {
    guard(|| {
        let slot = out(out_params, "out_params")?;
        let inner = lib(ModelParams::new(n, k, m, chi, mass))?;
        *slot = Box::into_raw(Box::new(AggdiffParams { inner }));
        Ok(())
    })
}

/// # Safety
/// `params` must come from `aggdiff_params_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_params_free(params: *mut AggdiffParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Fair-competition exponent 1 - k/N.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_params_m_c(params: *const AggdiffParams, out_value: *mut f64) -> AggdiffStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        *out(out_value, "out_value")? = p.inner.m_c();
        Ok(())
    })
}

/// Density from `cells + 1` grid nodes (starting at 0) and `cells` values.
///
/// # Safety
/// `grid` must hold `cells + 1` doubles and `values` `cells` doubles.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_density_new(
    grid: *const f64,
    values: *const f64,
    cells: usize,
    out_density: *mut *mut AggdiffDensity,
) -> AggdiffStatus {
    guard(|| {
        let slot = out(out_density, "out_density")?;
        let g = slice(grid, cells + 1, "grid")?.to_vec();
        let v = slice(values, cells, "values")?.to_vec();
        let inner = lib(RadialDensity::new(g, v))?;
        *slot = Box::into_raw(Box::new(AggdiffDensity { inner }));
        Ok(())
    })
}

/// # Safety
/// `density` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_density_free(density: *mut AggdiffDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_density_cells(density: *const AggdiffDensity, out_cells: *mut usize) -> AggdiffStatus {
    guard(|| {
        let d = density.as_ref().ok_or_else(|| null("density"))?;
        *out(out_cells, "out_cells")? = d.inner.cells();
        Ok(())
    })
}

/// Copy grid nodes (`cells + 1`) and values (`cells`) into caller buffers.
/// Either buffer may be null to skip it.
///
/// # Safety
/// Non-null buffers must hold at least the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_density_copy(
    density: *const AggdiffDensity,
    grid: *mut f64,
    grid_len: usize,
    values: *mut f64,
    values_len: usize,
) -> AggdiffStatus {
    guard(|| {
        let d = density.as_ref().ok_or_else(|| null("density"))?;
        let cells = d.inner.cells();
        if (!grid.is_null() && grid_len < cells + 1) || (!values.is_null() && values_len < cells) {
            return Err((AggdiffStatus::BufferTooSmall, format!("need {} nodes and {cells} values", cells + 1)));
        }
        if !grid.is_null() {
            std::slice::from_raw_parts_mut(grid, cells + 1).copy_from_slice(d.inner.grid());
        }
        if !values.is_null() {
            std::slice::from_raw_parts_mut(values, cells).copy_from_slice(d.inner.values());
        }
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_density_mass(
    density: *const AggdiffDensity,
    n: usize,
    out_mass: *mut f64,
) -> AggdiffStatus {
    guard(|| {
        let d = density.as_ref().ok_or_else(|| null("density"))?;
        if n < 1 {
            return Err((AggdiffStatus::InvalidArgument, "dimension must be positive".into()));
        }
        *out(out_mass, "out_mass")? = d.inner.mass(n);
        Ok(())
    })
}

/// Gauss hypergeometric function 2F1(a, b; c; z).
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_hyp2f1(a: f64, b: f64, c: f64, z: f64, out_value: *mut f64) -> AggdiffStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        *slot = lib(specfun::hyp2f1(HypergeomParams::new(a, b, c, z)))?;
        Ok(())
    })
}

/// Radial kernel profile ϑ(s) for dimension `n` and exponent `k`.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_theta(n: usize, k: f64, s: f64, out_value: *mut f64) -> AggdiffStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let ker = lib(Kernel::new(n, k))?;
        *slot = lib(ker.theta(s))?;
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_energy(
    params: *const AggdiffParams,
    density: *const AggdiffDensity,
    out_energy: *mut AggdiffEnergy,
) -> AggdiffStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let d = density.as_ref().ok_or_else(|| null("density"))?;
        let slot = out(out_energy, "out_energy")?;
        let e = lib(energy::evaluate(&d.inner, &p.inner))?;
        *slot = AggdiffEnergy {
            entropy: e.entropy,
            interaction: e.interaction,
            confinement: e.confinement,
            total: e.total,
        };
        Ok(())
    })
}

/// Solve for the radial steady state on `cells` cells; `tol <= 0` selects the default.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_steady_solve(
    params: *const AggdiffParams,
    cells: usize,
    tol: f64,
    out_steady: *mut *mut AggdiffSteady,
) -> AggdiffStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let slot = out(out_steady, "out_steady")?;
        if cells < 16 {
            return Err((AggdiffStatus::InvalidArgument, format!("cells = {cells} < 16")));
        }
        let mut opts = SolverOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        let inner = lib(steady::solve_auto(&p.inner, cells, &opts))?;
        *slot = Box::into_raw(Box::new(AggdiffSteady { inner }));
        Ok(())
    })
}

/// # Safety
/// `steady` must come from `aggdiff_steady_solve` or be null.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_steady_free(steady: *mut AggdiffSteady) {
    if !steady.is_null() {
        drop(Box::from_raw(steady));
    }
}

/// Lagrange constant and support radius of a solved steady state.
///
/// # Safety
/// `steady` must be valid; outputs may be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_steady_summary(
    steady: *const AggdiffSteady,
    out_constant: *mut f64,
    out_support_radius: *mut f64,
) -> AggdiffStatus {
    guard(|| {
        let s = steady.as_ref().ok_or_else(|| null("steady"))?;
        if let Some(c) = out_constant.as_mut() {
            *c = s.inner.lagrange_constant;
        }
        if let Some(r) = out_support_radius.as_mut() {
            *r = s.inner.support_radius;
        }
        Ok(())
    })
}

/// New density handle holding a copy of the steady profile.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_steady_density(
    steady: *const AggdiffSteady,
    out_density: *mut *mut AggdiffDensity,
) -> AggdiffStatus {
    guard(|| {
        let s = steady.as_ref().ok_or_else(|| null("steady"))?;
        let slot = out(out_density, "out_density")?;
        *slot = Box::into_raw(Box::new(AggdiffDensity {
            inner: s.inner.density.clone(),
        }));
        Ok(())
    })
}

/// ϑ(t)/k minus the tangent comparison curve with contact point c.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_comparison_residual(
    n: usize,
    k: f64,
    t: f64,
    c: f64,
    out_value: *mut f64,
) -> AggdiffStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let ker = lib(Kernel::new(n, k))?;
        *slot = lib(convexity::comparison_residual(&ker, t, c))?;
        Ok(())
    })
}

/// Scan the (t, c) lattice; reports the violation count and minimum residual.
///
/// # Safety
/// Outputs may be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_convexity_scan(
    n: usize,
    k: f64,
    resolution: usize,
    tol: f64,
    out_violations: *mut usize,
    out_min_residual: *mut f64,
) -> AggdiffStatus {
    guard(|| {
        let rep = lib(convexity::scan(n, k, resolution, tol))?;
        if let Some(v) = out_violations.as_mut() {
            *v = rep.violations.len();
        }
        if let Some(v) = out_min_residual.as_mut() {
            *v = rep.min_residual;
        }
        Ok(())
    })
}
