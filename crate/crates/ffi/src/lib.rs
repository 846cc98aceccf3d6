//! C interface to `perforated`.
//!
//! Every function returns a [`PfStatus`]; results come back through out
//! pointers. Handles are opaque and must be released with the matching
//! `*_free` function. On failure, [`pf_last_error`] describes the error on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use perforated::cli::{parse_scene, parse_scene_str, run_validate};
use perforated::conformal::{build_exterior_map, ExteriorMap, ShapeSpec};
use perforated::expansion::{expand_multi, expand_single, Expansion, Scene};
use perforated::reference::{solve_reference, ReferenceSolution};
use perforated::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    Geometry = 4,
    Domain = 5,
    Numerical = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Exterior conformal map of a reference inclusion.
pub struct PfMap(Arc<ExteriorMap>);

/// Domain, inclusions and forcing, as read from a scene config.
pub struct PfScene(Scene);

/// Asymptotic expansion at one `eps`.
pub struct PfExpansion(Expansion);

/// Dense reference solution at one `eps`.
pub struct PfReference(ReferenceSolution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> PfStatus {
    match err {
        Error::Config { .. } => PfStatus::Config,
        Error::Geometry(_) => PfStatus::Geometry,
        Error::Domain(_) => PfStatus::Domain,
        Error::Io(_) => PfStatus::Io,
        Error::Shape(_) | Error::InvalidInput(_) => PfStatus::InvalidInput,
        _ => PfStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (PfStatus, String)>) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PfStatus::Panic
        }
    }
}

fn lib<T>(r: perforated::Result<T>) -> Result<T, (PfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PfStatus, String) {
    (PfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (PfStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (PfStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn pf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the exterior map of `shape` (`"disk"`, `"ellipse:a,b,c"`,
/// `"laurent:[...]"` or `"samples:path.csv"`) truncated at `order`.
///
/// # Safety
/// `shape` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_map_new(shape: *const c_char, order: usize, out: *mut *mut PfMap) -> PfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = lib(ShapeSpec::parse(str_arg(shape, "shape")?, None))?;
        let map = lib(build_exterior_map(&spec, order))?;
        *out = Box::into_raw(Box::new(PfMap(Arc::new(map))));
        Ok(())
    })
}

/// # Safety
/// `map` must come from [`pf_map_new`] and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pf_map_free(map: *mut PfMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Leading coefficient `beta` of the map (reciprocal of the capacity).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_map_beta(map: *const PfMap, out: *mut f64) -> PfStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(map, "map")?.0.beta();
        Ok(())
    })
}

/// `T(z)` for `z` exterior to the inclusion.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_map_forward(map: *const PfMap, re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> PfStatus {
    guard(|| {
        let w = lib(handle(map, "map")?.0.forward(Complex64::new(re, im)))?;
        *out_arg(out_re, "out_re")? = w.re;
        *out_arg(out_im, "out_im")? = w.im;
        Ok(())
    })
}

/// `T^{-1}(w)` for `|w| >= 1`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_map_inverse(map: *const PfMap, re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> PfStatus {
    guard(|| {
        let z = lib(handle(map, "map")?.0.inverse(Complex64::new(re, im)))?;
        *out_arg(out_re, "out_re")? = z.re;
        *out_arg(out_im, "out_im")? = z.im;
        Ok(())
    })
}

/// Reads a scene config file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_scene_from_file(path: *const c_char, out: *mut *mut PfScene) -> PfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = lib(parse_scene(Path::new(str_arg(path, "path")?)))?;
        *out = Box::into_raw(Box::new(PfScene(cfg.scene)));
        Ok(())
    })
}

/// Parses scene config text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_scene_from_str(text: *const c_char, out: *mut *mut PfScene) -> PfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = lib(parse_scene_str(str_arg(text, "text")?, None))?;
        *out = Box::into_raw(Box::new(PfScene(cfg.scene)));
        Ok(())
    })
}

/// # Safety
/// `scene` must come from a `pf_scene_*` constructor; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pf_scene_free(scene: *mut PfScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_scene_inclusion_count(scene: *const PfScene, out: *mut usize) -> PfStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(scene, "scene")?.0.inclusions.len();
        Ok(())
    })
}

/// Expansion at `eps`: `order` iterations for a single inclusion; several
/// inclusions always give the first-order system and ignore `order`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_expand(scene: *const PfScene, eps: f64, order: usize, out: *mut *mut PfExpansion) -> PfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let scene = lib(handle(scene, "scene")?.0.at_eps(eps))?;
        let e = if scene.inclusions.len() == 1 {
            lib(expand_single(&scene, order))?
        } else {
            lib(expand_multi(&scene))?
        };
        *out = Box::into_raw(Box::new(PfExpansion(e)));
        Ok(())
    })
}

/// # Safety
/// `e` must come from [`pf_expand`]; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pf_expansion_free(e: *mut PfExpansion) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Number of iterations held by the expansion.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_expansion_order(e: *const PfExpansion, out: *mut usize) -> PfStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(e, "expansion")?.0.order();
        Ok(())
    })
}

/// Value at `(x, y)` of the expansion truncated to `order` iterations.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_expansion_evaluate(e: *const PfExpansion, x: f64, y: f64, order: usize, out: *mut f64) -> PfStatus {
    guard(|| {
        let e = &handle(e, "expansion")?.0;
        if order > e.order() {
            return Err((PfStatus::InvalidInput, format!("order {order} exceeds {}", e.order())));
        }
        *out_arg(out, "out")? = lib(e.evaluate_order(Complex64::new(x, y), order))?;
        Ok(())
    })
}

/// Copies the first-iteration corrector amplitudes into `buf`; `len` is the
/// capacity, `written` receives the count needed (also on `BufferTooSmall`).
///
/// # Safety
/// `buf` must hold `len` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_expansion_coefficients(
    e: *const PfExpansion,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> PfStatus {
    guard(|| {
        let a = handle(e, "expansion")?.0.coefficients();
        *out_arg(written, "written")? = a.len();
        if len < a.len() {
            return Err((PfStatus::BufferTooSmall, format!("need {} entries, got {len}", a.len())));
        }
        if !a.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            std::slice::from_raw_parts_mut(buf, a.len()).copy_from_slice(&a);
        }
        Ok(())
    })
}

/// Largest boundary residual over all components for `order` iterations.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_expansion_residual(e: *const PfExpansion, order: usize, out: *mut f64) -> PfStatus {
    guard(|| {
        let e = &handle(e, "expansion")?.0;
        if order > e.order() {
            return Err((PfStatus::InvalidInput, format!("order {order} exceeds {}", e.order())));
        }
        *out_arg(out, "out")? = lib(e.boundary_residual(order))?.max();
        Ok(())
    })
}

/// Reference solution of the scene at `eps`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_reference_solve(scene: *const PfScene, eps: f64, out: *mut *mut PfReference) -> PfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let scene = lib(handle(scene, "scene")?.0.at_eps(eps))?;
        let sol = lib(solve_reference(&scene))?;
        *out = Box::into_raw(Box::new(PfReference(sol)));
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pf_reference_evaluate(r: *const PfReference, x: f64, y: f64, out: *mut f64) -> PfStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(r, "reference")?.0.evaluate(Complex64::new(x, y));
        Ok(())
    })
}

/// # Safety
/// `r` must come from [`pf_reference_solve`]; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pf_reference_free(r: *mut PfReference) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Runs the seeded invariant suite; `passed` receives 1 or 0.
///
/// # Safety
/// `passed` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_validate(seed: u64, passed: *mut i32) -> PfStatus {
    guard(|| {
        let out = out_arg(passed, "passed")?;
        *out = i32::from(run_validate(seed, 1.0).passed());
        Ok(())
    })
}
