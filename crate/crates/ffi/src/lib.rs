//! C ABI over the `mdevsp` crate.
//!
//! Objects cross the boundary as opaque pointers created by `*_load`,
//! `*_build` or `mdevsp_solve` and released with the matching `*_free`.
//! Every fallible call returns an [`MdevspStatus`]; the message of the last
//! failure on the calling thread is available from
//! [`mdevsp_last_error_message`]. Strings returned by the library are owned
//! by the caller and must be released with [`mdevsp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mdevsp::backend::{backend_from_env, SolveStatus};
use mdevsp::generator::{generate_benchmark, BenchmarkSpec};
use mdevsp::graph::SchedulingGraph;
use mdevsp::instance::{load_instance, Instance};
use mdevsp::schedule::VehicleSchedule;
use mdevsp::solve::{solve, Solution, SolveConfig};
use mdevsp::validator::validate;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdevspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    /// The solution failed validation.
    Validation = 6,
    Solver = 7,
    /// The instance has no feasible schedule.
    Infeasible = 8,
    /// The time limit was reached before an incumbent was found.
    TimeLimit = 9,
    Panic = 10,
}

/// Outcome of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdevspSolveStatus {
    Optimal = 0,
    Feasible = 1,
    Infeasible = 2,
    TimeLimit = 3,
}

impl From<SolveStatus> for MdevspSolveStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => MdevspSolveStatus::Optimal,
            SolveStatus::Feasible => MdevspSolveStatus::Feasible,
            SolveStatus::Infeasible => MdevspSolveStatus::Infeasible,
            SolveStatus::TimeLimit => MdevspSolveStatus::TimeLimit,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdevspObjective {
    pub n_vehicles: u32,
    pub n_charges: u32,
    pub deadhead_energy: f64,
}

pub struct MdevspInstance(Instance);

pub struct MdevspGraph(SchedulingGraph);

pub struct MdevspSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

type Failure = (MdevspStatus, String);

fn fail<T>(status: MdevspStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err((status, msg.into()))
}

/// Runs `f`, records its error message and turns panics into
/// [`MdevspStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MdevspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MdevspStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MdevspStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(MdevspStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(MdevspStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| (MdevspStatus::NullPointer, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        return fail(MdevspStatus::NullPointer, "output pointer is null");
    }
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mdevsp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn mdevsp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_instance_load(
    path: *const c_char,
    out: *mut *mut MdevspInstance,
) -> MdevspStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        out_arg(out)?;
        let (inst, _) = load_instance(path).map_err(|e| {
            let status = if matches!(e, mdevsp::instance::InstanceError::Io { .. }) {
                MdevspStatus::Io
            } else {
                MdevspStatus::Parse
            };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(MdevspInstance(inst)));
        Ok(())
    })
}

/// Parses an instance from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_instance_from_json(
    json: *const c_char,
    out: *mut *mut MdevspInstance,
) -> MdevspStatus {
    guard(|| {
        let json = str_arg(json, "json")?;
        out_arg(out)?;
        let (inst, _) = Instance::from_json(json).map_err(|e| (MdevspStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(MdevspInstance(inst)));
        Ok(())
    })
}

/// Generates a seeded random benchmark instance.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_instance_generate_benchmark(
    n_trips: usize,
    n_depots: usize,
    n_stations: usize,
    seed: u64,
    out: *mut *mut MdevspInstance,
) -> MdevspStatus {
    guard(|| {
        out_arg(out)?;
        let inst = generate_benchmark(&BenchmarkSpec::new(n_trips, n_depots, n_stations, seed))
            .map_err(|e| (MdevspStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(MdevspInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `instance` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_instance_free(instance: *mut MdevspInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of service trips; 0 for a null pointer.
///
/// # Safety
/// `instance` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_instance_num_trips(instance: *const MdevspInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.n_trips())
}

/// # Safety
/// `instance` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_instance_num_depots(instance: *const MdevspInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.n_depots())
}

/// Maximum number of overlapping trips, a lower bound on the fleet.
///
/// # Safety
/// `instance` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_instance_fleet_lower_bound(instance: *const MdevspInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.fleet_lower_bound())
}

/// Serializes an instance to JSON. Returns null on failure.
///
/// # Safety
/// `instance` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_instance_to_json(instance: *const MdevspInstance) -> *mut c_char {
    match instance.as_ref() {
        Some(i) => into_c_string(i.0.to_json()),
        None => {
            set_error("instance is null");
            ptr::null_mut()
        }
    }
}

/// Builds the pruned scheduling graph.
///
/// # Safety
/// `instance` must be valid and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_graph_build(
    instance: *const MdevspInstance,
    out: *mut *mut MdevspGraph,
) -> MdevspStatus {
    guard(|| {
        let inst = ref_arg(instance, "instance")?;
        out_arg(out)?;
        *out = Box::into_raw(Box::new(MdevspGraph(SchedulingGraph::build(&inst.0))));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_graph_num_nodes(graph: *const MdevspGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n_nodes())
}

/// # Safety
/// `graph` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_graph_num_arcs(graph: *const MdevspGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n_arcs())
}

/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_graph_free(graph: *mut MdevspGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Solves `instance` under `setting` (for example `2i-CC+VI+I+All`; null
/// selects the default). A non-positive `time_limit_s` keeps the default
/// limit. Infeasible instances and time limits still produce a solution
/// object; query it with [`mdevsp_solution_status`].
///
/// # Safety
/// `instance` must be valid, `setting` null or NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_solve(
    instance: *const MdevspInstance,
    setting: *const c_char,
    time_limit_s: f64,
    out: *mut *mut MdevspSolution,
) -> MdevspStatus {
    guard(|| {
        let inst = ref_arg(instance, "instance")?;
        out_arg(out)?;
        let mut cfg = if setting.is_null() {
            SolveConfig::default()
        } else {
            str_arg(setting, "setting")?
                .parse::<SolveConfig>()
                .map_err(|e| (MdevspStatus::InvalidArgument, e.to_string()))?
        };
        if time_limit_s > 0.0 {
            cfg = cfg.with_time_limit(time_limit_s);
        }
        let backend = backend_from_env().map_err(|e| (MdevspStatus::InvalidArgument, e.to_string()))?;
        let sol = solve(&inst.0, &cfg, backend.as_ref()).map_err(|e| (MdevspStatus::Solver, e.to_string()))?;
        *out = Box::into_raw(Box::new(MdevspSolution(sol)));
        Ok(())
    })
}

/// # Safety
/// `solution` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_solution_status(solution: *const MdevspSolution) -> MdevspSolveStatus {
    match solution.as_ref() {
        Some(s) => s.0.status.into(),
        None => MdevspSolveStatus::Infeasible,
    }
}

/// Writes the objective triple of the incumbent. Fails with `Infeasible` or
/// `TimeLimit` when there is none.
///
/// # Safety
/// `solution` must be valid and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_solution_objective(
    solution: *const MdevspSolution,
    out: *mut MdevspObjective,
) -> MdevspStatus {
    guard(|| {
        let sol = ref_arg(solution, "solution")?;
        out_arg(out)?;
        match sol.0.objective {
            Some(t) => {
                *out = MdevspObjective {
                    n_vehicles: t.n_vehicles,
                    n_charges: t.n_charges,
                    deadhead_energy: t.deadhead_energy,
                };
                Ok(())
            }
            None if sol.0.status == SolveStatus::Infeasible => fail(MdevspStatus::Infeasible, "instance is infeasible"),
            None => fail(MdevspStatus::TimeLimit, "no incumbent within the time limit"),
        }
    })
}

/// Number of cuts added by the separation loop.
///
/// # Safety
/// `solution` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_solution_num_cuts(solution: *const MdevspSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.stats.cuts_added)
}

/// The full solution as JSON. Returns null on failure.
///
/// # Safety
/// `solution` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_solution_to_json(solution: *const MdevspSolution) -> *mut c_char {
    let Some(sol) = solution.as_ref() else {
        set_error("solution is null");
        return ptr::null_mut();
    };
    match serde_json::to_string(&sol.0) {
        Ok(s) => into_c_string(s),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `solution` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_solution_free(solution: *mut MdevspSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Validates schedules given as JSON, either a solution object or a bare
/// list. Returns `Ok` when they pass and `Validation` otherwise. When
/// `report` is not null it receives the report as JSON.
///
/// # Safety
/// `instance` must be valid, `schedules_json` NUL-terminated, `report` null
/// or valid.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_validate(
    instance: *const MdevspInstance,
    schedules_json: *const c_char,
    report: *mut *mut c_char,
) -> MdevspStatus {
    guard(|| {
        let inst = ref_arg(instance, "instance")?;
        let text = str_arg(schedules_json, "schedules_json")?;
        let parse = |e: serde_json::Error| (MdevspStatus::Parse, e.to_string());
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(parse)?;
        if let Some(list) = value.get_mut("schedules") {
            value = list.take();
        }
        let schedules: Vec<VehicleSchedule> = serde_json::from_value(value).map_err(parse)?;
        let r = validate(&inst.0, &schedules);
        if !report.is_null() {
            *report = into_c_string(serde_json::to_string(&r).map_err(parse)?);
        }
        if r.pass {
            Ok(())
        } else {
            let codes: Vec<&str> = r.codes().iter().map(|c| c.as_str()).collect();
            fail(MdevspStatus::Validation, codes.join(", "))
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mdevsp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
