//! C ABI for the ground-state computer simulator.
//!
//! Every fallible function returns a [`GsqcStatus`]; on failure the message
//! is kept per thread and read back with [`gsqc_last_error`]. Programs and
//! run results are opaque handles released by their `_free` functions.
//! Array outputs take a caller buffer and its length. When the buffer is
//! too short, the call writes the required length to `*written` and
//! returns `GSQC_STATUS_BUFFER_TOO_SMALL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gsqc::detection::choose_beta;
use gsqc::eigensolve::{analytic_levels, char_det, solve, SolverOptions};
use gsqc::hamiltonian::assemble;
use gsqc::lattice::{enumerate_basis, Program};
use gsqc::semantics::{run_program, RunResult};
use gsqc::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsqcStatus {
    Ok = 0,
    /// Bound violation, non-factoring output or I/O failure.
    Failure = 1,
    /// Invalid program, option or argument domain.
    Validation = 2,
    /// Eigensolver or numerical failure.
    Solver = 3,
    /// Development residual or input-recovery failure.
    Consistency = 4,
    NullPointer = 5,
    /// A string argument was not UTF-8.
    InvalidString = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

impl From<&Error> for GsqcStatus {
    fn from(e: &Error) -> Self {
        match e.exit_code() {
            2 => GsqcStatus::Validation,
            3 => GsqcStatus::Solver,
            4 => GsqcStatus::Consistency,
            _ => GsqcStatus::Failure,
        }
    }
}

/// Opaque validated program.
pub struct GsqcProgram {
    inner: Program,
}

/// Opaque result of [`gsqc_run`].
pub struct GsqcRunResult {
    inner: RunResult,
}

/// Scalar diagnostics of a run. `gap` is NaN when it was not resolved.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct GsqcDiagnostics {
    pub ground_energy: f64,
    pub gap: f64,
    pub residual: f64,
    pub fidelity: f64,
    pub p_all_final: f64,
    pub dimension: u64,
    pub matvecs: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: GsqcStatus, msg: impl Into<String>) -> GsqcStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), GsqcStatus>) -> GsqcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GsqcStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(GsqcStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn check(e: Error) -> GsqcStatus {
    fail(GsqcStatus::from(&e), e.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, GsqcStatus> {
    p.as_ref()
        .ok_or_else(|| fail(GsqcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, GsqcStatus> {
    p.as_mut()
        .ok_or_else(|| fail(GsqcStatus::NullPointer, format!("{what} is null")))
}

/// Copies `values` into a caller buffer of `len` doubles.
unsafe fn write_array(
    values: &[f64],
    out: *mut f64,
    len: usize,
    written: *mut usize,
) -> Result<(), GsqcStatus> {
    let written = out_ref(written, "written")?;
    *written = values.len();
    if len < values.len() {
        return Err(fail(
            GsqcStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if !values.is_empty() {
        if out.is_null() {
            return Err(fail(GsqcStatus::NullPointer, "output buffer is null"));
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gsqc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gsqc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a program document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsqc_program_from_json(
    json: *const c_char,
    out: *mut *mut GsqcProgram,
) -> GsqcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        if json.is_null() {
            return Err(fail(GsqcStatus::NullPointer, "json is null"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(GsqcStatus::InvalidString, format!("json: {e}")))?;
        let program = Program::from_json(text).map_err(check)?;
        *out = Box::into_raw(Box::new(GsqcProgram { inner: program }));
        Ok(())
    })
}

/// Releases a program; NULL is ignored.
///
/// # Safety
/// `program` must come from [`gsqc_program_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn gsqc_program_free(program: *mut GsqcProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// # Safety
/// `program` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gsqc_program_num_qubits(
    program: *const GsqcProgram,
    out: *mut usize,
) -> GsqcStatus {
    guard(|| {
        let p = deref(program, "program")?;
        *out_ref(out, "out")? = p.inner.num_qubits;
        Ok(())
    })
}

/// Configuration-space dimension of the program.
///
/// # Safety
/// `program` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gsqc_program_dimension(
    program: *const GsqcProgram,
    out: *mut u64,
) -> GsqcStatus {
    guard(|| {
        let p = deref(program, "program")?;
        let basis = enumerate_basis(&p.inner).map_err(check)?;
        *out_ref(out, "out")? = basis.dim() as u64;
        Ok(())
    })
}

/// Lowest `k` eigenvalues of the program's Hamiltonian.
///
/// # Safety
/// `program` and `written` must be valid; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gsqc_spectrum(
    program: *const GsqcProgram,
    k: usize,
    out: *mut f64,
    len: usize,
    written: *mut usize,
) -> GsqcStatus {
    guard(|| {
        let p = deref(program, "program")?;
        if k == 0 {
            return Err(fail(GsqcStatus::Validation, "k must be at least 1"));
        }
        let (_, h) = assemble(&p.inner).map_err(check)?;
        let opts = SolverOptions::for_epsilon(p.inner.epsilon).with_k(k.min(h.dim()));
        let res = solve(&h, &opts).map_err(check)?;
        write_array(&res.eigenvalues, out, len, written)
    })
}

/// Solves a pinned program and checks it against the circuit.
///
/// # Safety
/// `program` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gsqc_run(
    program: *const GsqcProgram,
    out: *mut *mut GsqcRunResult,
) -> GsqcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let p = deref(program, "program")?;
        let r = run_program(&p.inner).map_err(check)?;
        *out = Box::into_raw(Box::new(GsqcRunResult { inner: r }));
        Ok(())
    })
}

/// Releases a run result; NULL is ignored.
///
/// # Safety
/// `result` must come from [`gsqc_run`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn gsqc_run_result_free(result: *mut GsqcRunResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gsqc_run_result_diagnostics(
    result: *const GsqcRunResult,
    out: *mut GsqcDiagnostics,
) -> GsqcStatus {
    guard(|| {
        let r = &deref(result, "result")?.inner;
        let d = &r.diagnostics;
        *out_ref(out, "out")? = GsqcDiagnostics {
            ground_energy: d.ground_energy,
            gap: d.gap.unwrap_or(f64::NAN),
            residual: d.residual,
            fidelity: d.fidelity,
            p_all_final: r.detection.p_all_final,
            dimension: d.dimension as u64,
            matvecs: d.matvecs as u64,
        };
        Ok(())
    })
}

/// Output amplitudes, `2^M` of them, indexed with qubit 0 as the most
/// significant bit. Real and imaginary parts go to separate buffers.
///
/// # Safety
/// `re` and `im` must each hold `len` doubles; `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsqc_run_result_output(
    result: *const GsqcRunResult,
    re: *mut f64,
    im: *mut f64,
    len: usize,
    written: *mut usize,
) -> GsqcStatus {
    guard(|| {
        let amps = &deref(result, "result")?.inner.output.amplitudes;
        let real: Vec<f64> = amps.iter().map(|z| z.re).collect();
        let imag: Vec<f64> = amps.iter().map(|z| z.im).collect();
        write_array(&real, re, len, written)?;
        write_array(&imag, im, len, written)
    })
}

/// Single-qubit characteristic polynomial `det(H - E)` with tipping `beta`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsqc_char_det(
    energy: f64,
    num_steps: usize,
    epsilon: f64,
    beta: f64,
    out: *mut f64,
) -> GsqcStatus {
    guard(|| {
        let v = char_det(energy, num_steps, epsilon, beta).map_err(check)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// The `2(N+1)` exact single-qubit levels, ascending.
///
/// # Safety
/// `out` must hold `len` doubles; `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gsqc_analytic_levels(
    num_steps: usize,
    epsilon: f64,
    out: *mut f64,
    len: usize,
    written: *mut usize,
) -> GsqcStatus {
    guard(|| {
        if num_steps == 0 || epsilon.is_nan() || epsilon <= 0.0 {
            return Err(fail(
                GsqcStatus::Validation,
                "num_steps must be >= 1 and epsilon positive",
            ));
        }
        write_array(&analytic_levels(num_steps, epsilon), out, len, written)
    })
}

/// `1/sqrt(MN)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gsqc_choose_beta(
    num_qubits: usize,
    num_steps: usize,
    out: *mut f64,
) -> GsqcStatus {
    guard(|| {
        let b = choose_beta(num_qubits, num_steps).map_err(check)?;
        *out_ref(out, "out")? = b;
        Ok(())
    })
}
