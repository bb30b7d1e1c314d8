//! C interface to `rocover`.
//!
//! Instances are opaque handles created by `roc_*_new`/`roc_*_load` and
//! released with the matching `_free`. Every fallible call returns a
//! [`RocStatus`]; on failure `roc_last_error_message` describes the error
//! for the calling thread. Set and element ids are zero-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rocover::baselines::{exact_opt, greedy_offline, OptLimits};
use rocover::cip::{cip_run, CipConfig};
use rocover::harness::{run_trials, trial_streams, Algorithm, BetaMode};
use rocover::io::{load_instance, AnyInstance};
use rocover::learn_or_cover::{loc_run, unit_loc_run, LocConfig};
use rocover::{CipInstance, Error, SetSystem};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RocStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Infeasible = 5,
    Precondition = 6,
    OracleUnavailable = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque set system handle.
pub struct RocSetSystem(SetSystem);

/// Opaque covering integer program handle.
pub struct RocCipInstance(CipInstance);

/// Summary of `roc_run_trials`. `opt` and `ratio` are NaN when no OPT
/// reference was available.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RocTrialStats {
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub ci: f64,
    pub opt: f64,
    pub ratio: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RocStatus {
    match err {
        Error::Io(_) => RocStatus::Io,
        Error::Parse { .. } | Error::UnsupportedVersion(_) => RocStatus::Parse,
        Error::Uncoverable { .. }
        | Error::EmptyRow { .. }
        | Error::InfeasibleBudget { .. }
        | Error::InfeasibleK { .. } => RocStatus::Infeasible,
        Error::OracleUnavailable(_) => RocStatus::OracleUnavailable,
        Error::InvalidParams(_) | Error::InvalidProbability(_) | Error::CapExceeded { .. } => {
            RocStatus::InvalidArgument
        }
        _ => RocStatus::Precondition,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (RocStatus, String)>) -> RocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RocStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RocStatus::Panic
        }
    }
}

fn lib<T>(r: rocover::Result<T>) -> Result<T, (RocStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RocStatus, String) {
    (RocStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (RocStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (RocStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string(p: *const c_char, what: &str) -> Result<String, (RocStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_string)
        .map_err(|_| (RocStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn roc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a set system in compressed form: set `j` holds
/// `elements[offsets[j] .. offsets[j+1]]`, and `offsets` has `m + 1` entries.
/// Each set lists its elements in ascending order; every element must lie in
/// some set and every cost must be positive.
///
/// # Safety
/// `offsets` must point to `m + 1` values, `elements` to `offsets[m]` values
/// and `costs` to `m` values; `out_sys` must be writable.
#[no_mangle]
pub unsafe extern "C" fn roc_setsystem_new(
    n: usize,
    m: usize,
    offsets: *const usize,
    elements: *const usize,
    costs: *const f64,
    out_sys: *mut *mut RocSetSystem,
) -> RocStatus {
    guard(|| {
        let slot = out(out_sys, "out")?;
        if offsets.is_null() || costs.is_null() {
            return Err(null("offsets or costs"));
        }
        let offsets = std::slice::from_raw_parts(offsets, m + 1);
        let total = offsets[m];
        if offsets.windows(2).any(|w| w[0] > w[1]) || offsets[0] != 0 {
            return Err((RocStatus::InvalidArgument, "offsets must start at 0 and be nondecreasing".into()));
        }
        let elements = if total == 0 {
            &[][..]
        } else if elements.is_null() {
            return Err(null("elements"));
        } else {
            std::slice::from_raw_parts(elements, total)
        };
        let members = offsets.windows(2).map(|w| elements[w[0]..w[1]].to_vec()).collect();
        let costs = std::slice::from_raw_parts(costs, m).to_vec();
        let sys = SetSystem::new(n, members, costs).map_err(|e| (RocStatus::InvalidArgument, e.to_string()))?;
        *slot = Box::into_raw(Box::new(RocSetSystem(sys)));
        Ok(())
    })
}

/// Loads a set-cover (or batched, as its underlying set system) instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_sys` writable.
#[no_mangle]
pub unsafe extern "C" fn roc_setsystem_load(path: *const c_char, out_sys: *mut *mut RocSetSystem) -> RocStatus {
    guard(|| {
        let slot = out(out_sys, "out")?;
        let path = string(path, "path")?;
        let sys = match lib(load_instance(&path))? {
            AnyInstance::SetCover(s) => s,
            AnyInstance::Batched(b) => b.base().clone(),
            AnyInstance::Cip(_) => return Err((RocStatus::InvalidArgument, format!("{path} holds a CIP instance"))),
        };
        *slot = Box::into_raw(Box::new(RocSetSystem(sys)));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn roc_setsystem_free(sys: *mut RocSetSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of elements; 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn roc_setsystem_n(sys: *const RocSetSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.n())
}

/// Number of sets; 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn roc_setsystem_m(sys: *const RocSetSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.m())
}

/// Loads a CIP instance file, or converts a set-cover file into one.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_cip` writable.
#[no_mangle]
pub unsafe extern "C" fn roc_cip_load(path: *const c_char, out_cip: *mut *mut RocCipInstance) -> RocStatus {
    guard(|| {
        let slot = out(out_cip, "out")?;
        let path = string(path, "path")?;
        let cip = match lib(load_instance(&path))? {
            AnyInstance::Cip(c) => c,
            AnyInstance::SetCover(s) => s.to_cip(),
            AnyInstance::Batched(b) => b.base().to_cip(),
        };
        *slot = Box::into_raw(Box::new(RocCipInstance(cip)));
        Ok(())
    })
}

/// The covering program whose rows are the elements of `sys`.
///
/// # Safety
/// `sys` must be a live handle and `out_cip` writable.
#[no_mangle]
pub unsafe extern "C" fn roc_cip_from_setsystem(
    sys: *const RocSetSystem,
    out_cip: *mut *mut RocCipInstance,
) -> RocStatus {
    guard(|| {
        let sys = handle(sys, "sys")?;
        *out(out_cip, "out")? = Box::into_raw(Box::new(RocCipInstance(sys.0.to_cip())));
        Ok(())
    })
}

/// # Safety
/// `cip` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn roc_cip_free(cip: *mut RocCipInstance) {
    if !cip.is_null() {
        drop(Box::from_raw(cip));
    }
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `cip` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn roc_cip_n(cip: *const RocCipInstance) -> usize {
    cip.as_ref().map_or(0, |c| c.0.n())
}

/// Number of columns; 0 for a null handle.
///
/// # Safety
/// `cip` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn roc_cip_m(cip: *const RocCipInstance) -> usize {
    cip.as_ref().map_or(0, |c| c.0.m())
}

/// One LearnOrCover run with budget `beta` on the arrival order and
/// randomness of trial `trial` under `seed`.
///
/// # Safety
/// `sys` must be a live handle and `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn roc_loc_run(
    sys: *const RocSetSystem,
    beta: f64,
    seed: u64,
    trial: usize,
    cost: *mut f64,
) -> RocStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let cost = out(cost, "cost")?;
        let (order, mut rng) = trial_streams(seed, trial, sys.n());
        *cost = lib(loc_run(sys, &order, beta, LocConfig::default(), &mut rng))?.0.total_cost();
        Ok(())
    })
}

/// One run of the unit-cost variant; requires unit costs.
///
/// # Safety
/// `sys` must be a live handle and `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn roc_unit_loc_run(
    sys: *const RocSetSystem,
    seed: u64,
    trial: usize,
    cost: *mut f64,
) -> RocStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let cost = out(cost, "cost")?;
        let (order, mut rng) = trial_streams(seed, trial, sys.n());
        *cost = lib(unit_loc_run(sys, &order, LocConfig::default(), &mut rng))?.0.total_cost();
        Ok(())
    })
}

/// One run of the covering-program algorithm with budget `beta`.
///
/// # Safety
/// `cip` must be a live handle and `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn roc_cip_run(
    cip: *const RocCipInstance,
    beta: f64,
    seed: u64,
    trial: usize,
    cost: *mut f64,
) -> RocStatus {
    guard(|| {
        let cip = &handle(cip, "cip")?.0;
        let cost = out(cost, "cost")?;
        let (order, mut rng) = trial_streams(seed, trial, cip.n());
        *cost = lib(cip_run(cip, &order, beta, CipConfig::default(), &mut rng))?.0.total_cost();
        Ok(())
    })
}

/// Random-order trials. `algorithm` and `beta_mode` take the same strings as
/// the command line (`loc`, `naive`, ... and `known-opt`, `guess-double`,
/// `fixed:<v>`). Pass NaN for `opt` to let the library find a reference.
///
/// # Safety
/// `sys` must be a live handle, the strings NUL-terminated and `stats` writable.
#[no_mangle]
pub unsafe extern "C" fn roc_run_trials(
    sys: *const RocSetSystem,
    algorithm: *const c_char,
    beta_mode: *const c_char,
    trials: usize,
    seed: u64,
    opt: f64,
    stats: *mut RocTrialStats,
) -> RocStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let slot = out(stats, "stats")?;
        let alg: Algorithm = lib(string(algorithm, "algorithm")?.parse())?;
        let mode: BetaMode = lib(string(beta_mode, "beta_mode")?.parse())?;
        let inst = AnyInstance::SetCover(sys.clone());
        let opt = if opt.is_nan() { None } else { Some(opt) };
        let s = lib(run_trials(alg, &inst, "ffi", trials, seed, mode, opt))?;
        *slot = RocTrialStats {
            trials: s.trials,
            mean: s.mean,
            std: s.std,
            min: s.min,
            max: s.max,
            ci: s.ci,
            opt: s.opt.unwrap_or(f64::NAN),
            ratio: s.ratio.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Minimum-cost cover. Writes the cost, whether optimality was proven within
/// `node_budget` search nodes, and the chosen set ids into `sets` (capacity
/// `sets_cap`). `sets_len` always receives the number of ids; if it exceeds
/// `sets_cap` the call returns `BufferTooSmall`.
///
/// # Safety
/// `sys` must be a live handle; `cost`, `exact` and `sets_len` writable;
/// `sets` valid for `sets_cap` writes (may be null when `sets_cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn roc_exact_opt(
    sys: *const RocSetSystem,
    node_budget: u64,
    cost: *mut f64,
    exact: *mut bool,
    sets: *mut usize,
    sets_cap: usize,
    sets_len: *mut usize,
) -> RocStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        let (cost, exact, sets_len) = (out(cost, "cost")?, out(exact, "exact")?, out(sets_len, "sets_len")?);
        let cert = lib(exact_opt(sys, OptLimits { node_budget, ..OptLimits::default() }))?;
        *cost = cert.cost;
        *exact = cert.exact;
        *sets_len = cert.sets.len();
        if cert.sets.len() > sets_cap {
            return Err((
                RocStatus::BufferTooSmall,
                format!("cover has {} sets, buffer holds {sets_cap}", cert.sets.len()),
            ));
        }
        if !cert.sets.is_empty() {
            if sets.is_null() {
                return Err(null("sets"));
            }
            std::slice::from_raw_parts_mut(sets, cert.sets.len()).copy_from_slice(&cert.sets);
        }
        Ok(())
    })
}

/// Cost of the offline greedy cover.
///
/// # Safety
/// `sys` must be a live handle and `cost` writable.
#[no_mangle]
pub unsafe extern "C" fn roc_greedy(sys: *const RocSetSystem, cost: *mut f64) -> RocStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.0;
        *out(cost, "cost")? = lib(greedy_offline(sys))?.cost;
        Ok(())
    })
}
