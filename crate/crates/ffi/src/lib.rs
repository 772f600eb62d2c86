//! C interface to the `ncqpbtr` solver.
//!
//! Problems and solutions are opaque handles created and released through
//! this API. Every fallible call returns an [`NcqpStatus`]; on failure
//! `ncqp_last_error` describes what went wrong on the calling thread.
//! Strings returned through `char **` belong to the caller and are released
//! with `ncqp_string_free`.
//!
//! Pointer contract for every function: handles are NULL or live (not yet
//! freed), array arguments are valid for the stated lengths, and `out`
//! arguments are writable. Functions that return a plain value map a NULL
//! handle to 0 or NaN.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use ncqpbtr::cli::{ProblemFile, SolutionFile};
use ncqpbtr::generator::{generate, GenParams};
use ncqpbtr::problem::{check_psi_convexity, eval_phi, validate, ConvexityStatus};
use ncqpbtr::solver::{
    compute_tau0, phase1_tolerance, problem_size, solve_with, Solution, SolveOptions,
};
use ncqpbtr::{Error, Matrix, ProblemSpec};

/// Result of every fallible call. Values 2 to 6 match the command-line exit
/// codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcqpStatus {
    Ok = 0,
    /// `ncqp_problem_check`: valid, but convexity of psi is not certified.
    ConvexityUnknown = 1,
    Parse = 2,
    /// Infeasible domain, bad bounds or parameters, non-finite data, or a
    /// dimension mismatch.
    InvalidProblem = 3,
    Numerical = 4,
    EntryCondition = 5,
    DimensionTooLarge = 6,
    NullPointer = 10,
    InvalidArgument = 11,
    Panic = 12,
}

impl From<&Error> for NcqpStatus {
    fn from(e: &Error) -> Self {
        match e.exit_code() {
            2 => NcqpStatus::Parse,
            3 => NcqpStatus::InvalidProblem,
            5 => NcqpStatus::EntryCondition,
            6 => NcqpStatus::DimensionTooLarge,
            _ => NcqpStatus::Numerical,
        }
    }
}

pub struct NcqpProblem {
    spec: ProblemSpec,
}

pub struct NcqpSolution {
    solution: Solution,
    file: SolutionFile,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NcqpGenParams {
    pub n: usize,
    pub seed: u64,
    pub q_min_eig: f64,
    pub box_scale: f64,
    pub delta: f64,
    pub tau_f: f64,
    pub pi_f: f64,
    pub tightness: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NcqpCheckReport {
    pub shortest_side: f64,
    /// 1 if convexity of psi is certified, 0 otherwise.
    pub psi_certified: c_int,
    pub barrier_weight: f64,
    pub tau0: f64,
    pub phase1_eps: f64,
    pub problem_size: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: NcqpStatus, msg: impl Into<String>) -> NcqpStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> NcqpStatus {
    fail((&e).into(), e.to_string())
}

/// Runs `f`, turning panics into [`NcqpStatus::Panic`].
fn guard(f: impl FnOnce() -> NcqpStatus) -> NcqpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(NcqpStatus::Panic, "internal panic"),
    }
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], NcqpStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(NcqpStatus::NullPointer, format!("{what} is NULL")));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn out_string(s: String, out: *mut *mut c_char) -> NcqpStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            NcqpStatus::Ok
        }
        Err(_) => fail(NcqpStatus::InvalidArgument, "string contains NUL"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(NcqpStatus::NullPointer, concat!(stringify!($p), " is NULL"));
        })+
    };
}

/// Message for the last failure on this thread. Valid until the next call
/// into this library from the same thread; never NULL.
#[no_mangle]
pub extern "C" fn ncqp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ncqp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a problem from dense arrays (`q` row-major `n*n`, the others of
/// length `n`). The problem is validated, so an infeasible domain is
/// reported here.
#[no_mangle]
pub unsafe extern "C" fn ncqp_problem_new(
    n: usize,
    q: *const f64,
    c: *const f64,
    x_lower: *const f64,
    x_upper: *const f64,
    delta: f64,
    tau_f: f64,
    pi_f: f64,
    out: *mut *mut NcqpProblem,
) -> NcqpStatus {
    guard(|| {
        non_null!(out);
        let Some(nn) = n.checked_mul(n) else {
            return fail(NcqpStatus::InvalidArgument, "n*n overflows");
        };
        let arrays = (|| {
            Ok::<_, NcqpStatus>((
                slice_arg(q, nn, "q")?,
                slice_arg(c, n, "c")?,
                slice_arg(x_lower, n, "x_lower")?,
                slice_arg(x_upper, n, "x_upper")?,
            ))
        })();
        let (q, c, xl, xr) = match arrays {
            Ok(a) => a,
            Err(s) => return s,
        };
        let spec = Matrix::from_row_major(n, q.to_vec())
            .map_err(Error::from)
            .and_then(|q| {
                ProblemSpec::new(q, c.to_vec(), xl.to_vec(), xr.to_vec(), delta, tau_f, pi_f)
            })
            .and_then(|s| validate(&s).map(|_| s));
        match spec {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(NcqpProblem { spec }));
                NcqpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parses a problem file (JSON text).
#[no_mangle]
pub unsafe extern "C" fn ncqp_problem_from_json(
    json: *const c_char,
    out: *mut *mut NcqpProblem,
) -> NcqpStatus {
    guard(|| {
        non_null!(json, out);
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(NcqpStatus::Parse, "problem text is not UTF-8");
        };
        match ProblemFile::from_json(text)
            .and_then(|f| f.to_spec())
            .and_then(|s| validate(&s).map(|_| s))
        {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(NcqpProblem { spec }));
                NcqpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Generator defaults for dimension `n` and `seed`.
#[no_mangle]
pub extern "C" fn ncqp_gen_params_default(n: usize, seed: u64) -> NcqpGenParams {
    let p = GenParams::new(n, seed);
    NcqpGenParams {
        n: p.n,
        seed: p.seed,
        q_min_eig: p.q_min_eig,
        box_scale: p.box_scale,
        delta: p.delta,
        tau_f: p.tau_f,
        pi_f: p.pi_f,
        tightness: p.tightness,
    }
}

/// Deterministic random instance.
#[no_mangle]
pub unsafe extern "C" fn ncqp_problem_generate(
    params: *const NcqpGenParams,
    out: *mut *mut NcqpProblem,
) -> NcqpStatus {
    guard(|| {
        non_null!(params, out);
        let p = &*params;
        let gp = GenParams {
            n: p.n,
            seed: p.seed,
            q_min_eig: p.q_min_eig,
            box_scale: p.box_scale,
            delta: p.delta,
            tau_f: p.tau_f,
            pi_f: p.pi_f,
            tightness: p.tightness,
        };
        match generate(&gp) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(NcqpProblem { spec }));
                NcqpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Dimension of `problem`, or 0 if it is NULL.
#[no_mangle]
pub unsafe extern "C" fn ncqp_problem_dim(problem: *const NcqpProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.spec.n())
}

/// Serializes `problem` as a problem file.
#[no_mangle]
pub unsafe extern "C" fn ncqp_problem_to_json(
    problem: *const NcqpProblem,
    out: *mut *mut c_char,
) -> NcqpStatus {
    guard(|| {
        non_null!(problem, out);
        out_string(
            ProblemFile::from_spec(&(*problem).spec, None).to_json(),
            out,
        )
    })
}

/// Fills `report` and returns `Ok` if convexity of psi is certified,
/// `ConvexityUnknown` if not. `tol` enters only the problem size.
#[no_mangle]
pub unsafe extern "C" fn ncqp_problem_check(
    problem: *const NcqpProblem,
    tol: f64,
    report: *mut NcqpCheckReport,
) -> NcqpStatus {
    guard(|| {
        non_null!(problem, report);
        if !(tol > 0.0 && tol.is_finite()) {
            return fail(
                NcqpStatus::InvalidArgument,
                format!("tol must be positive, got {tol}"),
            );
        }
        let spec = &(*problem).spec;
        let geometry = match validate(spec) {
            Ok(g) => g,
            Err(e) => return from_error(e),
        };
        let certified = check_psi_convexity(spec) == ConvexityStatus::Certified;
        *report = NcqpCheckReport {
            shortest_side: geometry.shortest_side,
            psi_certified: certified as c_int,
            barrier_weight: 4.0 * spec.n() as f64,
            tau0: compute_tau0(spec),
            phase1_eps: phase1_tolerance(&geometry, spec),
            problem_size: problem_size(spec, &geometry, tol),
        };
        if certified {
            NcqpStatus::Ok
        } else {
            NcqpStatus::ConvexityUnknown
        }
    })
}

/// The objective at `x` (length `len`, which must equal the dimension);
/// `+inf` outside the domain.
#[no_mangle]
pub unsafe extern "C" fn ncqp_problem_phi(
    problem: *const NcqpProblem,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> NcqpStatus {
    guard(|| {
        non_null!(problem, out);
        let spec = &(*problem).spec;
        if len != spec.n() {
            return fail(
                NcqpStatus::InvalidArgument,
                format!("x has length {len}, expected {}", spec.n()),
            );
        }
        let x = match slice_arg(x, len, "x") {
            Ok(x) => x,
            Err(s) => return s,
        };
        *out = eval_phi(spec, x);
        NcqpStatus::Ok
    })
}

/// Releases a problem. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ncqp_problem_free(problem: *mut NcqpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves to accuracy `tol`. `threads` caps phase-1 parallelism (0 means 1);
/// the result does not depend on it.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solve(
    problem: *const NcqpProblem,
    tol: f64,
    threads: usize,
    out: *mut *mut NcqpSolution,
) -> NcqpStatus {
    guard(|| {
        non_null!(problem, out);
        let spec = &(*problem).spec;
        match solve_with(
            spec,
            &SolveOptions {
                tol,
                threads: threads.max(1),
            },
        ) {
            Ok((solution, trace)) => {
                let file = SolutionFile::new(spec, &solution, &trace);
                *out = Box::into_raw(Box::new(NcqpSolution { solution, file }));
                NcqpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Dimension of the solution vector, or 0 if `solution` is NULL.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solution_dim(solution: *const NcqpSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solution.x_hat.len())
}

/// Copies the solution into `x`, which must hold exactly the dimension.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solution_x(
    solution: *const NcqpSolution,
    x: *mut f64,
    len: usize,
) -> NcqpStatus {
    guard(|| {
        non_null!(solution, x);
        let xs = &(*solution).solution.x_hat;
        if len != xs.len() {
            return fail(
                NcqpStatus::InvalidArgument,
                format!("buffer has length {len}, expected {}", xs.len()),
            );
        }
        slice::from_raw_parts_mut(x, len).copy_from_slice(xs);
        NcqpStatus::Ok
    })
}

/// Objective value at the solution; NaN if `solution` is NULL.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solution_phi(solution: *const NcqpSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.solution.phi_value)
}

/// Guaranteed bound on the optimality gap; NaN if `solution` is NULL.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solution_certified_gap(solution: *const NcqpSolution) -> f64 {
    solution
        .as_ref()
        .map_or(f64::NAN, |s| s.solution.certified_gap)
}

/// Cholesky solves in the two path-following phases.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solution_linear_solves(solution: *const NcqpSolution) -> usize {
    solution
        .as_ref()
        .map_or(0, |s| s.file.trace.total_linear_solves)
}

/// Number of warnings raised while solving.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solution_warning_count(solution: *const NcqpSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.file.warnings.len())
}

/// The full solution file (JSON), identical to what the command line writes.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solution_to_json(
    solution: *const NcqpSolution,
    out: *mut *mut c_char,
) -> NcqpStatus {
    guard(|| {
        non_null!(solution, out);
        out_string((*solution).file.to_json(), out)
    })
}

/// Releases a solution. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ncqp_solution_free(solution: *mut NcqpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Releases a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ncqp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
