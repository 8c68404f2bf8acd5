//! C ABI over the reconfiguration engine.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free`. Every fallible call returns an [`SrStatus`]; on a
//! non-zero status [`sr_last_error`] describes the failure on this thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use satreconf::discretization::{Qual, QualitativeObservation};
use satreconf::engine::{sat_reconf, ReconfProblem, ReconfResult};
use satreconf::harness::{run_suite, RunConfig, Suite};
use satreconf::hybrid_model::{build_three_tank, build_two_tank, SystemKind, TankSystem};
use satreconf::system_model::{load_model, shipped_document, SystemModel};
use satreconf::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SchemaError = 3,
    ModelError = 4,
    ScenarioError = 5,
    NumericError = 6,
    BufferTooSmall = 7,
    InternalError = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrSystemKind {
    TwoTank = 0,
    ThreeTank = 1,
}

/// Qualitative value of one state, passed to [`sr_reconf`] as a byte.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrQual {
    Low = 0,
    Ok = 1,
    High = 2,
}

/// A plant together with its system model.
pub struct SrSystem {
    system: TankSystem,
    sm: SystemModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> SrStatus {
    match e {
        Error::Schema(_) | Error::Authoring(_) => SrStatus::SchemaError,
        Error::Model(_) | Error::Config(_) | Error::Encoding(_) => SrStatus::ModelError,
        Error::Scenario(_) => SrStatus::ScenarioError,
        Error::Numeric(_) => SrStatus::NumericError,
        _ => SrStatus::InternalError,
    }
}

/// Runs `f`, turning errors and panics into a status plus a thread-local message.
fn guard(f: impl FnOnce() -> Result<(), SrStatus>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SrStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside satreconf");
            SrStatus::InternalError
        }
    }
}

fn fail(status: SrStatus, msg: impl Into<String>) -> SrStatus {
    set_error(msg);
    status
}

fn lift<T>(r: satreconf::Result<T>) -> Result<T, SrStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), SrStatus> {
    if p.is_null() {
        Err(fail(SrStatus::NullPointer, format!("`{what}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, SrStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SrStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

fn kind(k: SrSystemKind) -> SystemKind {
    match k {
        SrSystemKind::TwoTank => SystemKind::TwoTank,
        SrSystemKind::ThreeTank => SystemKind::ThreeTank,
    }
}

fn plant(k: SystemKind) -> TankSystem {
    match k {
        SystemKind::TwoTank => build_two_tank(),
        SystemKind::ThreeTank => build_three_tank(),
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a plant with its shipped system model.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sr_system_new(kind_: SrSystemKind, out: *mut *mut SrSystem) -> SrStatus {
    sr_system_new_with_model(kind_, ptr::null(), out)
}

/// Builds a plant with the system model in `model_toml`; null selects the
/// shipped model.
///
/// # Safety
/// `model_toml` is null or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_system_new_with_model(
    kind_: SrSystemKind,
    model_toml: *const c_char,
    out: *mut *mut SrSystem,
) -> SrStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let system = plant(kind(kind_));
        let doc = if model_toml.is_null() {
            shipped_document(system.kind)
        } else {
            text(model_toml, "model_toml")?
        };
        let sm = lift(load_model(doc, &system))?;
        *out = Box::into_raw(Box::new(SrSystem { system, sm }));
        Ok(())
    })
}

/// # Safety
/// `sys` is null or a handle from `sr_system_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_system_free(sys: *mut SrSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of continuous states; 0 for a null handle.
///
/// # Safety
/// `sys` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_system_num_states(sys: *const SrSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.system.automaton.states().len())
}

/// Number of binary inputs, exchange flags included; 0 for a null handle.
///
/// # Safety
/// `sys` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_system_num_inputs(sys: *const SrSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.system.initial_inputs.len())
}

unsafe fn copy_name(name: &str, buf: *mut c_char, len: usize) -> Result<(), SrStatus> {
    non_null(buf, "buf")?;
    let bytes = name.as_bytes();
    if bytes.len() + 1 > len {
        return Err(fail(
            SrStatus::BufferTooSmall,
            format!("name `{name}` needs {} bytes", bytes.len() + 1),
        ));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
    *buf.add(bytes.len()) = 0;
    Ok(())
}

/// Copies the id of state `index` into `buf` (NUL-terminated).
///
/// # Safety
/// `sys` is a live handle; `buf` points to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sr_system_state_id(sys: *const SrSystem, index: usize, buf: *mut c_char, len: usize) -> SrStatus {
    guard(|| {
        non_null(sys, "sys")?;
        let states = (*sys).system.automaton.states();
        let d = states
            .get(index)
            .ok_or_else(|| fail(SrStatus::InvalidArgument, format!("state index {index} out of range")))?;
        copy_name(&d.id, buf, len)
    })
}

/// Copies the id of input `index` into `buf` (NUL-terminated).
///
/// # Safety
/// `sys` is a live handle; `buf` points to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sr_system_input_id(sys: *const SrSystem, index: usize, buf: *mut c_char, len: usize) -> SrStatus {
    guard(|| {
        non_null(sys, "sys")?;
        let ids = (*sys).system.initial_inputs.ids();
        let id = ids
            .get(index)
            .ok_or_else(|| fail(SrStatus::InvalidArgument, format!("input index {index} out of range")))?;
        copy_name(id, buf, len)
    })
}

/// Writes the nominal initial inputs (0/1) into `out`, which holds `len` bytes.
///
/// # Safety
/// `sys` is a live handle; `out` points to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sr_system_initial_inputs(sys: *const SrSystem, out: *mut u8, len: usize) -> SrStatus {
    guard(|| {
        non_null(sys, "sys")?;
        non_null(out, "out")?;
        let values = (*sys).system.initial_inputs.values();
        if len < values.len() {
            return Err(fail(SrStatus::BufferTooSmall, format!("need {} inputs", values.len())));
        }
        for (i, v) in values.iter().enumerate() {
            *out.add(i) = u8::from(*v);
        }
        Ok(())
    })
}

/// Minimal-cardinality reconfiguration.
///
/// `qual` holds one [`SrQual`] value per state (as a byte) and `inputs` one 0/1 byte per input,
/// both in declaration order. On success `*found` is 1, `out_inputs` holds
/// the new assignment and `*flips` the number of changed inputs; when no
/// reconfiguration exists `*found` is 0 and the status is still `Ok`.
///
/// # Safety
/// All pointers are valid for the given lengths; `out_inputs` has `num_inputs`
/// writable bytes; `found` and `flips` are writable.
#[no_mangle]
pub unsafe extern "C" fn sr_reconf(
    sys: *const SrSystem,
    qual: *const u8,
    num_states: usize,
    inputs: *const u8,
    num_inputs: usize,
    out_inputs: *mut u8,
    found: *mut i32,
    flips: *mut usize,
) -> SrStatus {
    guard(|| {
        non_null(sys, "sys")?;
        non_null(qual, "qual")?;
        non_null(inputs, "inputs")?;
        non_null(out_inputs, "out_inputs")?;
        non_null(found, "found")?;
        non_null(flips, "flips")?;
        let s = &*sys;
        let states = s.system.automaton.states();
        if num_states != states.len() {
            return Err(fail(
                SrStatus::InvalidArgument,
                format!("expected {} states, got {num_states}", states.len()),
            ));
        }
        if num_inputs != s.system.initial_inputs.len() {
            return Err(fail(
                SrStatus::InvalidArgument,
                format!("expected {} inputs, got {num_inputs}", s.system.initial_inputs.len()),
            ));
        }
        let q = std::slice::from_raw_parts(qual, num_states);
        let pairs = states
            .iter()
            .zip(q)
            .map(|(d, v)| {
                let v = match *v {
                    0 => Qual::Low,
                    1 => Qual::Ok,
                    2 => Qual::High,
                    other => return Err(fail(SrStatus::InvalidArgument, format!("qualitative value {other}"))),
                };
                Ok((d.id.clone(), v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let raw = std::slice::from_raw_parts(inputs, num_inputs);
        if let Some(b) = raw.iter().find(|b| **b > 1) {
            return Err(fail(SrStatus::InvalidArgument, format!("input byte {b} is not 0 or 1")));
        }
        let observed = lift(s.system.automaton.binary_assignment(raw.iter().map(|b| *b == 1).collect()))?;
        let p = lift(ReconfProblem::new(&s.sm, QualitativeObservation::from_pairs(pairs), observed))?;
        match lift(sat_reconf(&p))? {
            ReconfResult::Success(r) => {
                for (i, v) in r.inputs.values().iter().enumerate() {
                    *out_inputs.add(i) = u8::from(*v);
                }
                *found = 1;
                *flips = r.flips.len();
            }
            ReconfResult::NoReconfigurationExists => {
                *found = 0;
                *flips = 0;
            }
        }
        Ok(())
    })
}

/// Runs a suite document and returns the results CSV in `*out_csv`; release
/// it with [`sr_string_free`].
///
/// # Safety
/// `sys` is a live handle; `suite_toml` is NUL-terminated; `out_csv` is writable.
#[no_mangle]
pub unsafe extern "C" fn sr_run_suite(sys: *const SrSystem, suite_toml: *const c_char, out_csv: *mut *mut c_char) -> SrStatus {
    guard(|| {
        non_null(sys, "sys")?;
        non_null(out_csv, "out_csv")?;
        *out_csv = ptr::null_mut();
        let s = &*sys;
        let suite = lift(Suite::parse(text(suite_toml, "suite_toml")?))?;
        let report = lift(run_suite(&s.system, &s.sm, &suite, &RunConfig::default(), 1))?;
        let csv = CString::new(report.to_csv()).map_err(|_| fail(SrStatus::InternalError, "NUL in report"))?;
        *out_csv = csv.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
