//! C interface to gpd-sparsify.
//!
//! Objects are opaque handles created by `*_new`/`*_from_*` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`GpdStatus`]; on failure a description is available from
//! [`gpd_last_error_message`] on the same thread until the next failing call.
//! Output pointers are written only on success.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use gpd_sparsify::error::Error;
use gpd_sparsify::geometry::{
    grid_domain, Domain, DomainVector, GridSpec, IntervalVec6, SampleRange,
};
use gpd_sparsify::io;
use gpd_sparsify::optim::{optimize, OptimConfig};
use gpd_sparsify::subgrad::{build_loss_graph, LossGraph};
use gpd_sparsify::{dhat, eps_21, epsilon_matrix, sparse_erosion_distance, Barcode};

/// Result codes. `INVALID_ARGUMENT`, `FORMAT` and `INTERNAL` match the exit
/// codes of the command-line tool.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Format = 3,
    Internal = 4,
    Panic = 5,
}

/// A finite family of intervals.
pub struct GpdDomain(Domain);

/// Barcode of an interval-decomposable module.
pub struct GpdBarcode(Barcode);

/// Loss `dhat(full, J)` as a function of the coordinates of `J`.
pub struct GpdLossGraph(LossGraph);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(e: Error) -> GpdStatus {
    let status = match e.exit_code() {
        3 => GpdStatus::Format,
        4 => GpdStatus::Internal,
        _ => GpdStatus::InvalidArgument,
    };
    set_error(e.to_string());
    status
}

fn null(what: &str) -> GpdStatus {
    set_error(format!("null pointer: {what}"));
    GpdStatus::NullPointer
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), GpdStatus>) -> GpdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GpdStatus::Ok,
        Ok(Err(status)) => status,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GpdStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, GpdStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], GpdStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, GpdStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(Error::Format(format!("{what} is not UTF-8"))))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), GpdStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the most recent failure on this thread; empty if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn gpd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a domain from `6 * n` coordinates `x, y, a, b, c, d` per interval.
#[no_mangle]
pub unsafe extern "C" fn gpd_domain_from_vec6(
    coords: *const f64,
    n: usize,
    out: *mut *mut GpdDomain,
) -> GpdStatus {
    guard(|| {
        let coords = as_slice(coords, 6 * n, "coords")?;
        let v = DomainVector::from_coords(coords.to_vec()).map_err(fail)?;
        let d = Domain::from_vec6("ffi", (0..n).map(|k| v.slot(k)).collect()).map_err(fail)?;
        write(out, boxed(GpdDomain(d)), "out")
    })
}

/// Parses domain JSON (NUL-terminated UTF-8).
#[no_mangle]
pub unsafe extern "C" fn gpd_domain_from_json(
    json: *const c_char,
    out: *mut *mut GpdDomain,
) -> GpdStatus {
    guard(|| {
        let s = as_str(json, "json")?;
        let d = io::domain_from_reader(s.as_bytes()).map_err(fail)?;
        write(out, boxed(GpdDomain(d)), "out")
    })
}

/// Serializes a domain to JSON. Release the string with [`gpd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gpd_domain_to_json(
    domain: *const GpdDomain,
    out: *mut *mut c_char,
) -> GpdStatus {
    guard(|| {
        let d = as_ref(domain, "domain")?;
        let mut buf = Vec::new();
        io::domain_to_writer(&d.0, &mut buf).map_err(fail)?;
        let s = CString::new(buf).map_err(|e| fail(Error::Format(e.to_string())))?;
        write(out, s.into_raw(), "out")
    })
}

/// Builds the grid domain with `nxy` corner samples per axis in
/// `[xy_lo, xy_hi]` and `nsides` samples of each side length in
/// `[side_lo, side_hi]`.
#[no_mangle]
pub unsafe extern "C" fn gpd_grid_domain(
    nxy: usize,
    nsides: usize,
    xy_lo: f64,
    xy_hi: f64,
    side_lo: f64,
    side_hi: f64,
    out: *mut *mut GpdDomain,
) -> GpdStatus {
    guard(|| {
        let xy = SampleRange::new(xy_lo, xy_hi);
        let spec = GridSpec {
            x: xy,
            y: xy,
            sides: [SampleRange::new(side_lo, side_hi); 4],
            n_xy: nxy,
            n_sides: nsides,
        };
        let d = grid_domain(&spec).map_err(fail)?;
        write(out, boxed(GpdDomain(d)), "out")
    })
}

/// Number of intervals; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn gpd_domain_len(domain: *const GpdDomain) -> usize {
    domain.as_ref().map_or(0, |d| d.0.len())
}

/// Copies `6 * len` embedding coordinates into `out`. Fails for domains with
/// intervals that have no six-coordinate form.
#[no_mangle]
pub unsafe extern "C" fn gpd_domain_coords(
    domain: *const GpdDomain,
    out: *mut f64,
    out_len: usize,
) -> GpdStatus {
    guard(|| {
        let d = as_ref(domain, "domain")?;
        let v = d.0.to_vector().map_err(fail)?;
        if out_len != v.coords().len() {
            return Err(fail(Error::SizeMismatch {
                expected: v.coords().len(),
                got: out_len,
            }));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        slice::from_raw_parts_mut(out, out_len).copy_from_slice(v.coords());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gpd_domain_free(domain: *mut GpdDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gpd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Distance between two intervals given as `x, y, a, b, c, d`.
#[no_mangle]
pub unsafe extern "C" fn gpd_eps_21(u: *const f64, v: *const f64, out: *mut f64) -> GpdStatus {
    guard(|| {
        let vec6 = |p: &[f64]| {
            IntervalVec6::from_array([p[0], p[1], p[2], p[3], p[4], p[5]]).map_err(fail)
        };
        let u = vec6(as_slice(u, 6, "u")?)?;
        let v = vec6(as_slice(v, 6, "v")?)?;
        write(out, eps_21(&u, &v), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gpd_dhat(
    a: *const GpdDomain,
    b: *const GpdDomain,
    out: *mut f64,
) -> GpdStatus {
    guard(|| {
        let (a, b) = (as_ref(a, "a")?, as_ref(b, "b")?);
        write(out, dhat(&a.0, &b.0).map_err(fail)?, "out")
    })
}

/// Pairwise distances, row-major with rows from `a`; `out_len` must be
/// `len(a) * len(b)`.
#[no_mangle]
pub unsafe extern "C" fn gpd_eps_matrix(
    a: *const GpdDomain,
    b: *const GpdDomain,
    out: *mut f64,
    out_len: usize,
) -> GpdStatus {
    guard(|| {
        let (a, b) = (as_ref(a, "a")?, as_ref(b, "b")?);
        let m = epsilon_matrix(&a.0, &b.0).map_err(fail)?;
        if out_len != m.entries().len() {
            return Err(fail(Error::SizeMismatch {
                expected: m.entries().len(),
                got: out_len,
            }));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        slice::from_raw_parts_mut(out, out_len).copy_from_slice(m.entries());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gpd_loss_graph_new(
    full: *const GpdDomain,
    m: usize,
    out: *mut *mut GpdLossGraph,
) -> GpdStatus {
    guard(|| {
        let full = as_ref(full, "full")?;
        let g = build_loss_graph(&full.0, m).map_err(fail)?;
        write(out, boxed(GpdLossGraph(g)), "out")
    })
}

/// Evaluates the loss at `6 * m` coordinates. When `grad` is non-null it
/// receives a subgradient of the same length.
#[no_mangle]
pub unsafe extern "C" fn gpd_loss_graph_eval(
    graph: *const GpdLossGraph,
    coords: *const f64,
    len: usize,
    loss: *mut f64,
    grad: *mut f64,
) -> GpdStatus {
    guard(|| {
        let g = as_ref(graph, "graph")?;
        let coords = as_slice(coords, len, "coords")?;
        let v = DomainVector::from_coords(coords.to_vec()).map_err(fail)?;
        let (value, sub, _) = g.0.forward_backward(&v).map_err(fail)?;
        write(loss, value, "loss")?;
        if !grad.is_null() {
            slice::from_raw_parts_mut(grad, len).copy_from_slice(&sub.coords);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gpd_loss_graph_free(graph: *mut GpdLossGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Sparsifies `full` to `m` intervals from a seeded random subset. Writes
/// the best domain found and its loss.
#[no_mangle]
pub unsafe extern "C" fn gpd_optimize(
    full: *const GpdDomain,
    m: usize,
    epochs: usize,
    learning_rate: f64,
    momentum: f64,
    lr_decay: f64,
    seed: u64,
    out: *mut *mut GpdDomain,
    best_loss: *mut f64,
) -> GpdStatus {
    guard(|| {
        let full = as_ref(full, "full")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = OptimConfig {
            m,
            epochs,
            learning_rate,
            momentum,
            lr_decay,
            seed,
            ..OptimConfig::default()
        };
        let res = optimize(&full.0, &cfg).map_err(fail)?;
        write(best_loss, res.best_loss, "best_loss")?;
        write(out, boxed(GpdDomain(res.domain)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gpd_barcode_from_json(
    json: *const c_char,
    out: *mut *mut GpdBarcode,
) -> GpdStatus {
    guard(|| {
        let s = as_str(json, "json")?;
        let b = io::barcode_from_reader(s.as_bytes()).map_err(fail)?;
        write(out, boxed(GpdBarcode(b)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn gpd_barcode_free(barcode: *mut GpdBarcode) {
    if !barcode.is_null() {
        drop(Box::from_raw(barcode));
    }
}

/// Sparse erosion distance between `(ma, da)` and `(mb, db)`.
#[no_mangle]
pub unsafe extern "C" fn gpd_sparse_erosion_distance(
    ma: *const GpdBarcode,
    da: *const GpdDomain,
    mb: *const GpdBarcode,
    db: *const GpdDomain,
    out: *mut f64,
) -> GpdStatus {
    guard(|| {
        let (ma, da) = (as_ref(ma, "ma")?, as_ref(da, "da")?);
        let (mb, db) = (as_ref(mb, "mb")?, as_ref(db, "db")?);
        let d = sparse_erosion_distance(&ma.0, &da.0, &mb.0, &db.0).map_err(fail)?;
        write(out, d, "out")
    })
}
