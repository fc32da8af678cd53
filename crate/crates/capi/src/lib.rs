//! C ABI over the spline de Rham complexes: opaque handles, integer status
//! codes, and a thread-local last-error message.
//!
//! Conventions:
//! - Every fallible call returns a [`DrhStatus`]; on anything other than
//!   `DRH_STATUS_OK` a human-readable message is available from
//!   [`drh_last_error`] until the next failing call on the same thread.
//! - Handles created by `*_create` calls are owned by the caller and must be
//!   released with the matching `*_free`; strings returned through out
//!   parameters are released with [`drh_string_free`].
//! - Panics never unwind across the boundary: they are caught and reported
//!   as `DRH_STATUS_RUNTIME_ERROR`.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use derham::complex::{
    curl_2d, curl_3d, div_2d, div_3d, grad_3d, interpolate, CoefficientField, OperatorKind,
    SplineComplex,
};
use derham::convergence::{run_study, summarize, StudyConfig};
use derham::geometry::catalog_names;
use derham::knots::KnotVector;

/// Result of every fallible call in this API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrhStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was structurally invalid (wrong length, bad role, …).
    InvalidArgument = 2,
    /// The computation itself failed.
    RuntimeError = 3,
}

/// Which interpolation operator family to apply.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrhOperator {
    /// The plain local quasi-interpolant.
    Plain = 0,
    /// The endpoint-interpolating variant whose patchwise interpolants glue.
    Endpoint = 1,
}

/// Callback sampling one component of a reference-coordinate function:
/// `x` points to the 3 reference coordinates (trailing entries are 0 below
/// the parametric dimension).
pub type DrhScalarFn =
    Option<unsafe extern "C" fn(component: usize, x: *const f64, user_data: *mut c_void) -> f64>;

/// A graded family of tensor-product spline spaces on one patch.
pub struct DrhComplex {
    inner: SplineComplex,
    degrees: Vec<usize>,
    knots: Vec<KnotVector>,
}

/// A coefficient vector in one role of a complex.
pub struct DrhField {
    inner: CoefficientField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained an interior NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn fail(status: DrhStatus, message: impl std::fmt::Display) -> DrhStatus {
    set_error(message.to_string());
    status
}

fn null_arg(name: &str) -> DrhStatus {
    fail(DrhStatus::NullPointer, format!("`{name}` must not be null"))
}

/// Runs a closure, converting a panic into `RuntimeError` instead of
/// unwinding across the C boundary.
fn guarded(f: impl FnOnce() -> DrhStatus) -> DrhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in library call".to_string());
            fail(DrhStatus::RuntimeError, message)
        }
    }
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn drh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The message of the most recent failure on this thread, or null if no
/// failure has occurred. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn drh_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Builds the complex on open-uniform knots: `degrees` and `elements` are
/// arrays of length `dim` (one entry per parametric axis).
///
/// # Safety
/// `degrees` and `elements` must point to `dim` readable entries; `out`
/// must be a valid destination for one pointer.
#[no_mangle]
pub unsafe extern "C" fn drh_complex_create(
    dim: usize,
    degrees: *const usize,
    elements: *const usize,
    out: *mut *mut DrhComplex,
) -> DrhStatus {
    if out.is_null() {
        return null_arg("out");
    }
    if degrees.is_null() {
        return null_arg("degrees");
    }
    if elements.is_null() {
        return null_arg("elements");
    }
    let degrees = std::slice::from_raw_parts(degrees, dim).to_vec();
    let elements = std::slice::from_raw_parts(elements, dim).to_vec();
    guarded(|| {
        if elements.iter().any(|&n| n == 0) {
            return fail(
                DrhStatus::InvalidArgument,
                "every axis needs at least one element",
            );
        }
        let knots: Vec<KnotVector> = degrees
            .iter()
            .zip(&elements)
            .map(|(&p, &n)| KnotVector::open_uniform(p, n))
            .collect();
        match SplineComplex::new(&degrees, knots.clone()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DrhComplex {
                    inner,
                    degrees,
                    knots,
                }));
                DrhStatus::Ok
            }
            Err(e) => fail(DrhStatus::InvalidArgument, e),
        }
    })
}

/// Builds the complex on the dyadic refinement of `cx`'s knots (every
/// element of every axis is halved).
///
/// # Safety
/// `cx` must be a live handle from this API; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn drh_complex_refine(
    cx: *const DrhComplex,
    out: *mut *mut DrhComplex,
) -> DrhStatus {
    if out.is_null() {
        return null_arg("out");
    }
    let Some(cx) = cx.as_ref() else {
        return null_arg("cx");
    };
    guarded(|| {
        let knots: Vec<KnotVector> = cx.knots.iter().map(KnotVector::refine_dyadic).collect();
        match SplineComplex::new(&cx.degrees, knots.clone()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DrhComplex {
                    inner,
                    degrees: cx.degrees.clone(),
                    knots,
                }));
                DrhStatus::Ok
            }
            Err(e) => fail(DrhStatus::RuntimeError, e),
        }
    })
}

/// Releases a complex handle; null is ignored.
///
/// # Safety
/// `cx` must be null or a pointer obtained from this API and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn drh_complex_free(cx: *mut DrhComplex) {
    if !cx.is_null() {
        drop(Box::from_raw(cx));
    }
}

/// The parametric dimension of the complex (0 when `cx` is null).
///
/// # Safety
/// `cx` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn drh_complex_dim(cx: *const DrhComplex) -> usize {
    cx.as_ref().map_or(0, |cx| cx.inner.parametric_dim())
}

/// Writes the total coefficient count of one role's space to `out`.
///
/// # Safety
/// `cx` must be a live handle; `out` must be valid for one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn drh_complex_role_dim(
    cx: *const DrhComplex,
    role: usize,
    out: *mut usize,
) -> DrhStatus {
    let Some(cx) = cx.as_ref() else {
        return null_arg("cx");
    };
    if out.is_null() {
        return null_arg("out");
    }
    match cx.inner.role(role) {
        Ok(space) => {
            *out = space.total_dim();
            DrhStatus::Ok
        }
        Err(e) => fail(DrhStatus::InvalidArgument, e),
    }
}

fn split_components(
    cx: &DrhComplex,
    role: usize,
    coeffs: &[f64],
) -> Result<CoefficientField, String> {
    let space = cx.inner.role(role).map_err(|e| e.to_string())?.clone();
    let total = space.total_dim();
    if coeffs.len() != total {
        return Err(format!(
            "role {role} holds {total} coefficients, got {}",
            coeffs.len()
        ));
    }
    let mut data = Vec::with_capacity(space.num_components());
    let mut offset = 0;
    for c in 0..space.num_components() {
        let len = space.component_dim(c).map_err(|e| e.to_string())?;
        data.push(coeffs[offset..offset + len].to_vec());
        offset += len;
    }
    CoefficientField::new(space, data).map_err(|e| e.to_string())
}

/// Wraps `len` coefficients (components concatenated in order) as a field
/// of the given role.
///
/// # Safety
/// `cx` must be a live handle, `coeffs` must point to `len` readable
/// doubles, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn drh_field_create(
    cx: *const DrhComplex,
    role: usize,
    coeffs: *const f64,
    len: usize,
    out: *mut *mut DrhField,
) -> DrhStatus {
    let Some(cx) = cx.as_ref() else {
        return null_arg("cx");
    };
    if coeffs.is_null() {
        return null_arg("coeffs");
    }
    if out.is_null() {
        return null_arg("out");
    }
    let coeffs = std::slice::from_raw_parts(coeffs, len);
    guarded(|| match split_components(cx, role, coeffs) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(DrhField { inner }));
            DrhStatus::Ok
        }
        Err(message) => fail(DrhStatus::InvalidArgument, message),
    })
}

/// Releases a field handle; null is ignored.
///
/// # Safety
/// `field` must be null or a pointer obtained from this API and not freed.
#[no_mangle]
pub unsafe extern "C" fn drh_field_free(field: *mut DrhField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// The role of the field's space (0 when `field` is null).
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn drh_field_role(field: *const DrhField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.space().role())
}

/// The number of vector components of the field (0 when `field` is null).
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn drh_field_num_components(field: *const DrhField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.space().num_components())
}

/// The total coefficient count of the field (0 when `field` is null).
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn drh_field_len(field: *const DrhField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.space().total_dim())
}

/// Copies the field's coefficients (components concatenated) into `out`,
/// which must hold exactly `len == drh_field_len` doubles.
///
/// # Safety
/// `field` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn drh_field_coeffs(
    field: *const DrhField,
    out: *mut f64,
    len: usize,
) -> DrhStatus {
    let Some(field) = field.as_ref() else {
        return null_arg("field");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let total = field.inner.space().total_dim();
    if len != total {
        return fail(
            DrhStatus::InvalidArgument,
            format!("field holds {total} coefficients, buffer has {len}"),
        );
    }
    let out = std::slice::from_raw_parts_mut(out, len);
    let mut offset = 0;
    for c in 0..field.inner.space().num_components() {
        let component = field.inner.component(c);
        out[offset..offset + component.len()].copy_from_slice(component);
        offset += component.len();
    }
    DrhStatus::Ok
}

/// Evaluates every component of the field at the reference point `x`
/// (`x_len` coordinates in `[0,1]`, one per parametric axis). `out` must
/// hold `drh_field_num_components` doubles.
///
/// # Safety
/// All pointers must be live; `x` readable for `x_len` doubles and `out`
/// writable for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn drh_field_eval(
    field: *const DrhField,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> DrhStatus {
    let Some(field) = field.as_ref() else {
        return null_arg("field");
    };
    if x.is_null() {
        return null_arg("x");
    }
    if out.is_null() {
        return null_arg("out");
    }
    let dim = field.inner.space().parametric_dim();
    if x_len != dim {
        return fail(
            DrhStatus::InvalidArgument,
            format!("expected {dim} coordinates, got {x_len}"),
        );
    }
    let components = field.inner.space().num_components();
    if out_len != components {
        return fail(
            DrhStatus::InvalidArgument,
            format!("field has {components} components, buffer has {out_len}"),
        );
    }
    let x = std::slice::from_raw_parts(x, x_len);
    if x.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return fail(
            DrhStatus::InvalidArgument,
            "reference coordinates must lie in [0, 1]",
        );
    }
    let mut point = [0.0f64; 3];
    point[..x_len].copy_from_slice(x);
    let out = std::slice::from_raw_parts_mut(out, out_len);
    guarded(|| {
        out.copy_from_slice(&field.inner.eval(&point));
        DrhStatus::Ok
    })
}

/// Applies the complex's outgoing derivative to the field: the rotated
/// gradient and divergence in 2D; gradient, curl, and divergence in 3D.
/// The top role has no outgoing derivative.
///
/// # Safety
/// `field` must be a live handle and `out` valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn drh_field_derivative(
    field: *const DrhField,
    out: *mut *mut DrhField,
) -> DrhStatus {
    let Some(field) = field.as_ref() else {
        return null_arg("field");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let dim = field.inner.space().parametric_dim();
    let role = field.inner.space().role();
    guarded(|| {
        let result = match (dim, role) {
            (2, 0) => curl_2d(&field.inner),
            (2, 1) => div_2d(&field.inner),
            (3, 0) => grad_3d(&field.inner),
            (3, 1) => curl_3d(&field.inner),
            (3, 2) => div_3d(&field.inner),
            _ => {
                return fail(
                    DrhStatus::InvalidArgument,
                    format!("role {role} of the {dim}D complex has no outgoing derivative"),
                )
            }
        };
        match result {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DrhField { inner }));
                DrhStatus::Ok
            }
            Err(e) => fail(DrhStatus::RuntimeError, e),
        }
    })
}

/// Writes the maximum absolute coefficient of the field to `out`.
///
/// # Safety
/// `field` must be a live handle and `out` writable for one double.
#[no_mangle]
pub unsafe extern "C" fn drh_field_max_abs(field: *const DrhField, out: *mut f64) -> DrhStatus {
    let Some(field) = field.as_ref() else {
        return null_arg("field");
    };
    if out.is_null() {
        return null_arg("out");
    }
    *out = field.inner.max_abs();
    DrhStatus::Ok
}

/// Interpolates a componentwise reference-coordinate function into the
/// given role using the plain or endpoint-interpolating operator family.
/// `f` receives the component index, a pointer to 3 reference coordinates,
/// and `user_data`.
///
/// # Safety
/// `cx` must be a live handle, `f` a valid callback for the duration of the
/// call, and `out` valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn drh_interpolate(
    cx: *const DrhComplex,
    role: usize,
    operator: DrhOperator,
    f: DrhScalarFn,
    user_data: *mut c_void,
    out: *mut *mut DrhField,
) -> DrhStatus {
    let Some(cx) = cx.as_ref() else {
        return null_arg("cx");
    };
    let Some(f) = f else {
        return null_arg("f");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let kind = match operator {
        DrhOperator::Plain => OperatorKind::Plain,
        DrhOperator::Endpoint => OperatorKind::Endpoint,
    };
    guarded(|| {
        match interpolate(&cx.inner, role, kind, |c, x| f(c, x.as_ptr(), user_data)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DrhField { inner }));
                DrhStatus::Ok
            }
            Err(e) => fail(DrhStatus::InvalidArgument, e),
        }
    })
}

/// Runs a convergence study from a JSON configuration (the same schema the
/// command-line `study` subcommand reads) and returns the JSON summary —
/// records, observed rates, and pass flags — through `out_summary`.
/// Release the string with [`drh_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out_summary` valid
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn drh_study_run(
    config_json: *const c_char,
    out_summary: *mut *mut c_char,
) -> DrhStatus {
    if config_json.is_null() {
        return null_arg("config_json");
    }
    if out_summary.is_null() {
        return null_arg("out_summary");
    }
    let Ok(text) = CStr::from_ptr(config_json).to_str() else {
        return fail(DrhStatus::InvalidArgument, "config is not valid UTF-8");
    };
    let config: StudyConfig = match serde_json::from_str(text) {
        Ok(config) => config,
        Err(e) => return fail(DrhStatus::InvalidArgument, e),
    };
    guarded(|| {
        let summary = match run_study(&config).and_then(|records| summarize(&config, &records)) {
            Ok(summary) => summary,
            Err(e) => return fail(DrhStatus::RuntimeError, e),
        };
        let json = serde_json::to_string(&summary).expect("summary serializes");
        let json = CString::new(json).expect("JSON has no interior NUL");
        *out_summary = json.into_raw();
        DrhStatus::Ok
    })
}

/// Returns the built-in geometry catalog as a JSON array of names through
/// `out_names`. Release the string with [`drh_string_free`].
///
/// # Safety
/// `out_names` must be valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn drh_catalog_json(out_names: *mut *mut c_char) -> DrhStatus {
    if out_names.is_null() {
        return null_arg("out_names");
    }
    let json = serde_json::to_string(&catalog_names()).expect("names serialize");
    let json = CString::new(json).expect("JSON has no interior NUL");
    *out_names = json.into_raw();
    DrhStatus::Ok
}

/// Releases a string returned by this API; null is ignored.
///
/// # Safety
/// `s` must be null or a string obtained from this API and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn drh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
