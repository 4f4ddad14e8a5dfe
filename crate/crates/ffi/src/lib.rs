//! C interface to the pcrpp solvers.
//!
//! Every fallible call returns a [`PcrppStatus`]; on failure the message is
//! available from [`pcrpp_last_error`] on the same thread. Handles are
//! opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pcrpp::ratiocheck::{verify_bound, RatioParams};
use pcrpp::solvers::{best_of_many, exact_oracle, pctsp_reduction, DeskPctsp, Solution, SolverConfig};
use pcrpp::{parse_instance, Error, Instance};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcrppStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    CapExceeded = 5,
    Guarantee = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Parsed instance.
pub struct PcrppInstance(Instance);

/// Walk returned by one of the solvers.
pub struct PcrppSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> PcrppStatus {
    match e {
        Error::Parse(_) => PcrppStatus::Parse,
        Error::InvalidInstance(_) | Error::InvalidWalk(_) | Error::Parameters(_) | Error::Infeasible(_) | Error::Io(_) => {
            PcrppStatus::InvalidInput
        }
        Error::CapExceeded { .. } => PcrppStatus::CapExceeded,
        Error::Guarantee { .. } => PcrppStatus::Guarantee,
        _ => PcrppStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), PcrppStatus>) -> PcrppStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcrppStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside pcrpp");
            PcrppStatus::Panic
        }
    }
}

fn fail(e: Error) -> PcrppStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, PcrppStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null pointer argument");
        PcrppStatus::NullPointer
    })
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, PcrppStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output pointer");
        PcrppStatus::NullPointer
    })
}

unsafe fn emit(sol: Result<Solution, Error>, dst: *mut *mut PcrppSolution) -> Result<(), PcrppStatus> {
    let dst = out(dst)?;
    *dst = ptr::null_mut();
    *dst = Box::into_raw(Box::new(PcrppSolution(sol.map_err(fail)?)));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pcrpp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses an instance from NUL-terminated text.
///
/// # Safety
/// `text` must be a valid C string and `dst` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_instance_parse(text: *const c_char, dst: *mut *mut PcrppInstance) -> PcrppStatus {
    guard(|| {
        let dst = out(dst)?;
        *dst = ptr::null_mut();
        let raw = deref(text)?;
        let text = CStr::from_ptr(raw).to_str().map_err(|e| {
            set_error(e.to_string());
            PcrppStatus::InvalidUtf8
        })?;
        let inst = parse_instance(text).map_err(|e| fail(e.into()))?;
        *dst = Box::into_raw(Box::new(PcrppInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from [`pcrpp_instance_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_instance_free(inst: *mut PcrppInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `inst` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_instance_vertex_count(inst: *const PcrppInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.vertex_count())
}

/// Number of edges kept after parsing, or 0 for a null handle.
///
/// # Safety
/// `inst` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_instance_edge_count(inst: *const PcrppInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.edges().len())
}

/// Best-of-many approximation with default settings.
///
/// # Safety
/// `inst` must be a live handle and `dst` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_solve(
    inst: *const PcrppInstance,
    check_guarantee: bool,
    dst: *mut *mut PcrppSolution,
) -> PcrppStatus {
    guard(|| {
        let inst = deref(inst)?;
        let cfg = SolverConfig { check_guarantee, ..SolverConfig::default() };
        emit(best_of_many(&inst.0, &cfg), dst)
    })
}

/// Exact optimum by enumeration, refused above `cap` edges.
///
/// # Safety
/// `inst` must be a live handle and `dst` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_oracle(inst: *const PcrppInstance, cap: usize, dst: *mut *mut PcrppSolution) -> PcrppStatus {
    guard(|| {
        let inst = deref(inst)?;
        emit(exact_oracle(&inst.0, cap), dst)
    })
}

/// Walk obtained through the PCTSP reduction.
///
/// # Safety
/// `inst` must be a live handle and `dst` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_reduce(
    inst: *const PcrppInstance,
    pctsp_cap: usize,
    fallback: bool,
    dst: *mut *mut PcrppSolution,
) -> PcrppStatus {
    guard(|| {
        let inst = deref(inst)?;
        emit(pctsp_reduction(&inst.0, &DeskPctsp { cap: pctsp_cap, fallback }), dst)
    })
}

/// # Safety
/// `sol` must come from one of the solver calls or be null.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_solution_free(sol: *mut PcrppSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Objective value, or NaN for a null handle.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_solution_value(sol: *const PcrppSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.0.value)
}

/// LP lower bound, or NaN when the solver produced none.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_solution_lower_bound(sol: *const PcrppSolution) -> f64 {
    sol.as_ref().and_then(|s| s.0.lower_bound).unwrap_or(f64::NAN)
}

/// Number of vertices on the closed walk, including both root visits.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_solution_walk_len(sol: *const PcrppSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.walk.vertices.len())
}

/// Copies the walk as 1-based vertex ids into `buf`.
///
/// # Safety
/// `buf` must hold `cap` writable elements; it may be null when `cap` is 0.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_solution_walk(sol: *const PcrppSolution, buf: *mut usize, cap: usize) -> PcrppStatus {
    guard(|| {
        let walk = &deref(sol)?.0.walk.vertices;
        if walk.len() > cap {
            set_error(format!("walk has {} vertices, buffer holds {cap}", walk.len()));
            return Err(PcrppStatus::BufferTooSmall);
        }
        if walk.is_empty() {
            return Ok(());
        }
        out(buf)?;
        let dst = std::slice::from_raw_parts_mut(buf, walk.len());
        for (d, &v) in dst.iter_mut().zip(walk) {
            *d = Instance::display_id(v);
        }
        Ok(())
    })
}

/// Ratio certificate for the published parameters with grid step `step`.
///
/// # Safety
/// `certified` and `inconclusive` must be writable pointers.
#[no_mangle]
pub unsafe extern "C" fn pcrpp_verify_ratio(step: f64, certified: *mut f64, inconclusive: *mut bool) -> PcrppStatus {
    guard(|| {
        let certified = out(certified)?;
        let inconclusive = out(inconclusive)?;
        let cert = verify_bound(&RatioParams::PAPER, step).map_err(fail)?;
        *certified = cert.certified_bound;
        *inconclusive = cert.inconclusive;
        Ok(())
    })
}
