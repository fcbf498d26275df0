//! C ABI for `logdiv`.
//!
//! Potentials and families are opaque heap handles created from the same JSON
//! declarations the CLI reads and released with the matching `_free`
//! function. Every function returns a [`LogdivStatus`]; on failure the message
//! is available from [`logdiv_last_error`] on the calling thread. Vectors are
//! passed as `(pointer, dim)` and must hold exactly the handle's dimension.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use logdiv::duality::{l_divergence, DualPair};
use logdiv::families::{verify_renyi_theorem, DiscreteFamily, FamilyConfig};
use logdiv::geometry::constant_curvature_residual;
use logdiv::potentials::PotentialConfig;
use logdiv::{Error, Vector};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogdivStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Malformed JSON, unknown names, bad parameters or dimension mismatch.
    InvalidArgument = 2,
    /// Domain violation or numerical failure.
    Numerical = 3,
    /// The library panicked; the handle involved should be freed.
    Panic = 4,
}

/// A potential together with its alpha-conjugate.
pub struct LogdivPotential {
    pair: DualPair,
}

/// A discrete F(±α) family.
pub struct LogdivFamily {
    family: DiscreteFamily,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: LogdivStatus, msg: impl Into<String>) -> LogdivStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> LogdivStatus {
    let status = if e.is_numerical() { LogdivStatus::Numerical } else { LogdivStatus::InvalidArgument };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into [`LogdivStatus::Panic`].
fn guard(f: impl FnOnce() -> LogdivStatus) -> LogdivStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(LogdivStatus::Panic, msg)
        }
    }
}

unsafe fn read_json<'a>(json: *const c_char) -> Result<&'a str, LogdivStatus> {
    if json.is_null() {
        return Err(fail(LogdivStatus::NullPointer, "json is NULL"));
    }
    CStr::from_ptr(json).to_str().map_err(|_| fail(LogdivStatus::InvalidArgument, "json is not UTF-8"))
}

unsafe fn read_vector(ptr: *const f64, dim: usize, expected: usize) -> Result<Vector, LogdivStatus> {
    if ptr.is_null() {
        return Err(fail(LogdivStatus::NullPointer, "vector is NULL"));
    }
    if dim != expected {
        return Err(from_error(Error::DimensionMismatch { expected, found: dim }));
    }
    Ok(Vector::from_column_slice(std::slice::from_raw_parts(ptr, dim)))
}

unsafe fn write_vector(ptr: *mut f64, v: &Vector) {
    std::ptr::copy_nonoverlapping(v.as_ptr(), ptr, v.len());
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! try_lib {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_error(e),
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(LogdivStatus::NullPointer, concat!(stringify!($p), " is NULL"));
        })+
    };
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len - 1` bytes, into `buf`. Returns the full message length
/// in bytes (without the terminator); `buf` may be NULL to query it.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn logdiv_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn logdiv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a potential from a JSON declaration such as
/// `{"name": "simplex-F-alpha", "dim": 2, "alpha": 1.0, "sign": "concave"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn logdiv_potential_from_json(
    json: *const c_char,
    out: *mut *mut LogdivPotential,
) -> LogdivStatus {
    guard(|| {
        non_null!(out);
        let text = try_status!(read_json(json));
        let cfg: PotentialConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => return fail(LogdivStatus::InvalidArgument, format!("invalid potential: {e}")),
        };
        let spec = try_lib!(cfg.build());
        *out = Box::into_raw(Box::new(LogdivPotential { pair: DualPair::new(spec) }));
        LogdivStatus::Ok
    })
}

/// Releases a potential; NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or come from [`logdiv_potential_from_json`] and not
/// have been freed.
#[no_mangle]
pub unsafe extern "C" fn logdiv_potential_free(handle: *mut LogdivPotential) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Chart dimension of the potential, or 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live potential.
#[no_mangle]
pub unsafe extern "C" fn logdiv_potential_dim(handle: *const LogdivPotential) -> usize {
    handle.as_ref().map_or(0, |h| h.pair.primal().dim())
}

/// `D[xi : xi_prime]`.
///
/// # Safety
/// `handle` must be live; `xi` and `xi_prime` must point to `dim` doubles and
/// `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn logdiv_divergence(
    handle: *const LogdivPotential,
    xi: *const f64,
    xi_prime: *const f64,
    dim: usize,
    out: *mut f64,
) -> LogdivStatus {
    guard(|| {
        non_null!(handle, out);
        let h = &*handle;
        let d = h.pair.primal().dim();
        let a = try_status!(read_vector(xi, dim, d));
        let b = try_status!(read_vector(xi_prime, dim, d));
        *out = try_lib!(l_divergence(h.pair.primal(), &a, &b));
        LogdivStatus::Ok
    })
}

/// Dual coordinates `eta = D^(alpha) phi(xi)`.
///
/// # Safety
/// `handle` must be live; `xi` and `eta_out` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn logdiv_dual_point(
    handle: *const LogdivPotential,
    xi: *const f64,
    dim: usize,
    eta_out: *mut f64,
) -> LogdivStatus {
    guard(|| {
        non_null!(handle, eta_out);
        let h = &*handle;
        let x = try_status!(read_vector(xi, dim, h.pair.primal().dim()));
        let eta = try_lib!(h.pair.dual_point(&x));
        write_vector(eta_out, &eta);
        LogdivStatus::Ok
    })
}

/// Alpha-conjugate `psi(eta)`; the primal point is written to `xi_out`
/// unless it is NULL.
///
/// # Safety
/// `handle` must be live; `eta` must point to `dim` doubles, `xi_out` must be
/// NULL or point to `dim` writable doubles and `psi_out` to one.
#[no_mangle]
pub unsafe extern "C" fn logdiv_conjugate(
    handle: *const LogdivPotential,
    eta: *const f64,
    dim: usize,
    xi_out: *mut f64,
    psi_out: *mut f64,
) -> LogdivStatus {
    guard(|| {
        non_null!(handle, psi_out);
        let h = &*handle;
        let e = try_status!(read_vector(eta, dim, h.pair.primal().dim()));
        let xi = try_lib!(h.pair.primal_point(&e, None));
        *psi_out = try_lib!(h.pair.conjugate(&e, Some(&xi)));
        if !xi_out.is_null() {
            write_vector(xi_out, &xi);
        }
        LogdivStatus::Ok
    })
}

/// Generalized Fenchel gap at `(xi, eta)`.
///
/// # Safety
/// As [`logdiv_divergence`], with `eta` in place of `xi_prime`.
#[no_mangle]
pub unsafe extern "C" fn logdiv_fenchel_gap(
    handle: *const LogdivPotential,
    xi: *const f64,
    eta: *const f64,
    dim: usize,
    out: *mut f64,
) -> LogdivStatus {
    guard(|| {
        non_null!(handle, out);
        let h = &*handle;
        let d = h.pair.primal().dim();
        let x = try_status!(read_vector(xi, dim, d));
        let e = try_status!(read_vector(eta, dim, d));
        *out = try_lib!(h.pair.fenchel_gap(&x, &e));
        LogdivStatus::Ok
    })
}

/// `max |R - k B|` at `xi` for the predicted curvature `k = -s alpha`.
///
/// # Safety
/// `handle` must be live; `xi` must point to `dim` doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn logdiv_curvature_residual(
    handle: *const LogdivPotential,
    xi: *const f64,
    dim: usize,
    out: *mut f64,
) -> LogdivStatus {
    guard(|| {
        non_null!(handle, out);
        let h = &*handle;
        let x = try_status!(read_vector(xi, dim, h.pair.primal().dim()));
        *out = try_lib!(constant_curvature_residual(h.pair.primal(), &x));
        LogdivStatus::Ok
    })
}

/// Builds a family from a JSON declaration with keys `sample_points`, `mu`,
/// `h`, `alpha` and `family_sign` (`"+"` or `"-"`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn logdiv_family_from_json(json: *const c_char, out: *mut *mut LogdivFamily) -> LogdivStatus {
    guard(|| {
        non_null!(out);
        let text = try_status!(read_json(json));
        let cfg: FamilyConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => return fail(LogdivStatus::InvalidArgument, format!("invalid family: {e}")),
        };
        let family = try_lib!(cfg.build());
        *out = Box::into_raw(Box::new(LogdivFamily { family }));
        LogdivStatus::Ok
    })
}

/// Releases a family; NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or come from [`logdiv_family_from_json`] and not
/// have been freed.
#[no_mangle]
pub unsafe extern "C" fn logdiv_family_free(handle: *mut LogdivFamily) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Parameter dimension of the family, or 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live family.
#[no_mangle]
pub unsafe extern "C" fn logdiv_family_dim(handle: *const LogdivFamily) -> usize {
    handle.as_ref().map_or(0, |h| h.family.dim())
}

/// Density of the family at `xi` on its sample points; `p_out` must hold
/// `logdiv_family_sample_points` doubles.
///
/// # Safety
/// `handle` must be live; `xi` must point to `dim` doubles and `p_out` to the
/// family's sample-point count of writable doubles.
#[no_mangle]
pub unsafe extern "C" fn logdiv_family_density(
    handle: *const LogdivFamily,
    xi: *const f64,
    dim: usize,
    p_out: *mut f64,
) -> LogdivStatus {
    guard(|| {
        non_null!(handle, p_out);
        let h = &*handle;
        let x = try_status!(read_vector(xi, dim, h.family.dim()));
        let p = try_lib!(h.family.density(&x));
        std::ptr::copy_nonoverlapping(p.as_ptr(), p_out, p.len());
        LogdivStatus::Ok
    })
}

/// Number of sample points of the family, or 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live family.
#[no_mangle]
pub unsafe extern "C" fn logdiv_family_sample_points(handle: *const LogdivFamily) -> usize {
    handle.as_ref().map_or(0, |h| h.family.sample_points())
}

/// Both sides of the divergence/Rényi identity at `(xi, xi_prime)`.
///
/// # Safety
/// `handle` must be live; `xi` and `xi_prime` must point to `dim` doubles and
/// `lhs_out`, `rhs_out` to one writable double each.
#[no_mangle]
pub unsafe extern "C" fn logdiv_family_renyi_check(
    handle: *const LogdivFamily,
    xi: *const f64,
    xi_prime: *const f64,
    dim: usize,
    lhs_out: *mut f64,
    rhs_out: *mut f64,
) -> LogdivStatus {
    guard(|| {
        non_null!(handle, lhs_out, rhs_out);
        let h = &*handle;
        let d = h.family.dim();
        let a = try_status!(read_vector(xi, dim, d));
        let b = try_status!(read_vector(xi_prime, dim, d));
        let rep = try_lib!(verify_renyi_theorem(&h.family, &a, &b));
        *lhs_out = rep.lhs;
        *rhs_out = rep.rhs;
        LogdivStatus::Ok
    })
}
