//! C interface to the planner.
//!
//! Problems and solutions are opaque handles owned by the caller and
//! released with their `_free` functions. Every fallible call returns an
//! [`SpStatus`]; on failure a message is available from
//! [`sp_last_error`] on the same thread until the next failing call.
//! Strings returned through out-parameters must be released with
//! [`sp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stackplan::planner::{PlanOutcome, Planner, PlannerConfig, Solution};
use stackplan::scenario::{
    export_trace, generate_problem, parse_problem, serialize_problem, Family, ProblemSpec, SceneSpec,
};
use stackplan::Error;

/// Result codes. Zero is success; `SP_STATUS_TIMEOUT` is not an error.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    Timeout = 1,
    NullArgument = -1,
    InvalidUtf8 = -2,
    Parse = -3,
    InvalidInput = -4,
    Generation = -5,
    Internal = -6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpFamily {
    Reverse = 0,
    Transform = 1,
    Rotate = 2,
}

/// A scene together with its start/goal problem.
pub struct SpProblem {
    scene: SceneSpec,
    problem: ProblemSpec,
}

pub struct SpSolution {
    solution: Solution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes removed")));
}

fn fail(status: SpStatus, msg: impl Into<String>) -> SpStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::Scenario(_) => SpStatus::Parse,
        Error::Generation(_) => SpStatus::Generation,
        Error::Input(_) | Error::OracleDomain(_) | Error::EmptyIndex | Error::SamplingFailed { .. } => {
            SpStatus::InvalidInput
        }
        _ => SpStatus::Internal,
    }
}

/// Runs `f`, turning panics into `SP_STATUS_INTERNAL`.
fn guard(f: impl FnOnce() -> SpStatus) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SpStatus::Internal, "internal error (panic)"),
    }
}

unsafe fn utf8<'a>(s: *const c_char) -> Result<&'a str, SpStatus> {
    if s.is_null() {
        return Err(fail(SpStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(SpStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn out_string(s: String, out: *mut *mut c_char) -> SpStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            SpStatus::Ok
        }
        Err(_) => fail(SpStatus::Internal, "output contains a nul byte"),
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on this thread; do not free.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a TOML problem document.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_parse(text: *const c_char, out: *mut *mut SpProblem) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpStatus::NullArgument, "null output pointer");
        }
        let t = match utf8(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_problem(t) {
            Ok((scene, problem)) => {
                *out = Box::into_raw(Box::new(SpProblem { scene, problem }));
                SpStatus::Ok
            }
            Err(e) => fail(SpStatus::Parse, e.to_string()),
        }
    })
}

/// Generates a benchmark problem.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_generate(
    family: SpFamily,
    cubes: usize,
    edge: f64,
    seed: u64,
    out: *mut *mut SpProblem,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpStatus::NullArgument, "null output pointer");
        }
        let family = match family {
            SpFamily::Reverse => Family::Reverse,
            SpFamily::Transform => Family::Transform,
            SpFamily::Rotate => Family::Rotate,
        };
        match generate_problem(family, cubes, edge, seed) {
            Ok((scene, problem)) => {
                *out = Box::into_raw(Box::new(SpProblem { scene, problem }));
                SpStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Writes the problem as a TOML document.
///
/// # Safety
/// `p` must be a live problem handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_to_toml(p: *const SpProblem, out: *mut *mut c_char) -> SpStatus {
    guard(|| {
        if p.is_null() || out.is_null() {
            return fail(SpStatus::NullArgument, "null argument");
        }
        let p = &*p;
        out_string(serialize_problem(&p.scene, &p.problem), out)
    })
}

/// Number of movable objects in the problem, or 0 for null.
///
/// # Safety
/// `p` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_object_count(p: *const SpProblem) -> usize {
    p.as_ref().map_or(0, |p| p.scene.objects.len())
}

/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_free(p: *mut SpProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn planner(p: &SpProblem, seed: u64, time_limit: f64) -> Result<Planner, SpStatus> {
    let cfg = PlannerConfig {
        seed,
        time_limit,
        ..PlannerConfig::for_problem(&p.problem)
    };
    Planner::new(&p.scene, &cfg).map_err(|e| fail(SpStatus::InvalidInput, e.to_string()))
}

/// Plans with the given seed and time limit (seconds). On success `*out`
/// receives a solution; on `SP_STATUS_TIMEOUT` it is left untouched.
///
/// # Safety
/// `p` must be a live problem handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_plan(
    p: *const SpProblem,
    seed: u64,
    time_limit: f64,
    out: *mut *mut SpSolution,
) -> SpStatus {
    guard(|| {
        if p.is_null() || out.is_null() {
            return fail(SpStatus::NullArgument, "null argument");
        }
        let p = &*p;
        let planner = match planner(p, seed, time_limit) {
            Ok(pl) => pl,
            Err(s) => return s,
        };
        match planner.plan(&p.problem) {
            Ok(PlanOutcome::Solved(solution)) => {
                *out = Box::into_raw(Box::new(SpSolution { solution }));
                SpStatus::Ok
            }
            Ok(PlanOutcome::Timeout(_)) => SpStatus::Timeout,
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Shortens a solution; the input handle stays valid.
///
/// # Safety
/// `p` and `s` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_simplify(
    p: *const SpProblem,
    s: *const SpSolution,
    seed: u64,
    out: *mut *mut SpSolution,
) -> SpStatus {
    guard(|| {
        if p.is_null() || s.is_null() || out.is_null() {
            return fail(SpStatus::NullArgument, "null argument");
        }
        let (p, s) = (&*p, &*s);
        let planner = match planner(p, seed, p.problem.time_limit) {
            Ok(pl) => pl,
            Err(st) => return st,
        };
        let (solution, _) = planner.simplify(&s.solution, seed);
        *out = Box::into_raw(Box::new(SpSolution { solution }));
        SpStatus::Ok
    })
}

/// Number of pick-and-place moves, or 0 for null.
///
/// # Safety
/// `s` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn sp_solution_len(s: *const SpSolution) -> usize {
    s.as_ref().map_or(0, |s| s.solution.len())
}

/// Total tree vertices created while searching, or 0 for null.
///
/// # Safety
/// `s` must be null or a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn sp_solution_nodes(s: *const SpSolution) -> usize {
    s.as_ref().map_or(0, |s| s.solution.stats.nodes())
}

/// Replays the solution against the problem; `*valid` receives the verdict.
/// When invalid, the reason is available from [`sp_last_error`].
///
/// # Safety
/// `p` and `s` must be live handles; `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_validate(p: *const SpProblem, s: *const SpSolution, valid: *mut bool) -> SpStatus {
    guard(|| {
        if p.is_null() || s.is_null() || valid.is_null() {
            return fail(SpStatus::NullArgument, "null argument");
        }
        let (p, s) = (&*p, &*s);
        let planner = match planner(p, p.problem.seed, p.problem.time_limit) {
            Ok(pl) => pl,
            Err(st) => return st,
        };
        match planner.validation_error(&p.problem, &s.solution) {
            None => *valid = true,
            Some(reason) => {
                set_error(reason);
                *valid = false;
            }
        }
        SpStatus::Ok
    })
}

/// Exports a JSON trace with frames every `period` seconds.
///
/// # Safety
/// `p` and `s` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_trace_json(
    p: *const SpProblem,
    s: *const SpSolution,
    period: f64,
    out: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        if p.is_null() || s.is_null() || out.is_null() {
            return fail(SpStatus::NullArgument, "null argument");
        }
        let (p, s) = (&*p, &*s);
        let trace = match export_trace(&p.scene, &p.problem, &s.solution, period) {
            Ok(t) => t,
            Err(e) => return fail(SpStatus::InvalidInput, e.to_string()),
        };
        match serde_json::to_string(&trace) {
            Ok(json) => out_string(json, out),
            Err(e) => fail(SpStatus::Internal, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_solution_free(s: *mut SpSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
