//! C ABI over `serrin-annulus`.
//!
//! Every function returns an [`SaStatus`]; results go through out-pointers.
//! Solutions and branches are opaque handles released with their `_free`
//! function. Panics are caught at the boundary and reported as
//! `SA_STATUS_PANIC`.

use std::os::raw::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use serrin_annulus::annulus::{build_grid, solve_dirichlet, DirichletSolution, FourierPerturbation};
use serrin_annulus::bifurcation::find_lambda_star;
use serrin_annulus::continuation::{continue_branch, tangent_vector, BranchPoint, NewtonOptions};
use serrin_annulus::modes::{eigen_closed_form, mode_matrix};
use serrin_annulus::radial::{boundary_data, u_radial, ProblemParams, RadialSolution};
use serrin_annulus::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaStatus {
    Ok = 0,
    InvalidArgument = 1,
    Inadmissible = 2,
    NotConverged = 3,
    Singular = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

impl From<&Error> for SaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Inadmissible(_) => Self::Inadmissible,
            Error::NotConverged { .. } | Error::NoSignChange { .. } => Self::NotConverged,
            Error::Singular(_) => Self::Singular,
            _ => Self::InvalidArgument,
        }
    }
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn sa_status_message(status: SaStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        SaStatus::Ok => b"ok\0",
        SaStatus::InvalidArgument => b"invalid argument\0",
        SaStatus::Inadmissible => b"perturbation is not admissible\0",
        SaStatus::NotConverged => b"iteration did not converge\0",
        SaStatus::Singular => b"singular linear system\0",
        SaStatus::NullPointer => b"null pointer argument\0",
        SaStatus::BufferTooSmall => b"output buffer too small\0",
        SaStatus::Panic => b"internal error\0",
    };
    text.as_ptr().cast()
}

fn guard(f: impl FnOnce() -> Result<(), SaStatus>) -> SaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SaStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => SaStatus::Panic,
    }
}

fn lift<T>(r: serrin_annulus::Result<T>) -> Result<T, SaStatus> {
    r.map_err(|e| SaStatus::from(&e))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), SaStatus> {
    if out.is_null() {
        return Err(SaStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

unsafe fn read_slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], SaStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(SaStatus::NullPointer);
    }
    Ok(slice::from_raw_parts(data, len))
}

/// Inner Dirichlet value `a` and Neumann constant `c` of the radial solution.
///
/// # Safety
/// `a` and `c` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_boundary_data(n: u32, lambda: f64, a: *mut f64, c: *mut f64) -> SaStatus {
    guard(|| {
        let (av, cv) = boundary_data(lift(ProblemParams::new(n, lambda))?);
        write(a, av)?;
        write(c, cv)
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_u_radial(n: u32, lambda: f64, r: f64, out: *mut f64) -> SaStatus {
    guard(|| {
        let p = lift(ProblemParams::new(n, lambda))?;
        write(out, lift(u_radial(p, r))?)
    })
}

/// Symmetric mode matrix, row-major into `out[0..4]`.
///
/// # Safety
/// `out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sa_mode_matrix(n: u32, lambda: f64, k: f64, out: *mut f64) -> SaStatus {
    guard(|| {
        if out.is_null() {
            return Err(SaStatus::NullPointer);
        }
        let m = lift(mode_matrix(lift(ProblemParams::new(n, lambda))?, k))?.entries();
        slice::from_raw_parts_mut(out, 4).copy_from_slice(&[m[0][0], m[0][1], m[1][0], m[1][1]]);
        Ok(())
    })
}

/// Eigenvalues `mu1 < mu2` of the mode matrix.
///
/// # Safety
/// `mu1` and `mu2` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_eigen_closed_form(
    n: u32,
    lambda: f64,
    k: f64,
    mu1: *mut f64,
    mu2: *mut f64,
) -> SaStatus {
    guard(|| {
        let e = lift(eigen_closed_form(lift(ProblemParams::new(n, lambda))?, k))?;
        write(mu1, e.mu1)?;
        write(mu2, e.mu2)
    })
}

/// Bifurcation value of the given degree.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_find_lambda_star(n: u32, degree: u32, tol: f64, out: *mut f64) -> SaStatus {
    guard(|| write(out, lift(find_lambda_star(n, degree, tol))?.lambda_star))
}

/// Opaque Dirichlet solution on a perturbed planar annulus.
pub struct SaDirichlet {
    solution: DirichletSolution,
}

/// Solves with inner value `a_lambda`. `coeffs1`/`coeffs2` hold the
/// coefficients of `cos(2j theta)` for the inner and outer perturbation.
///
/// # Safety
/// Coefficient pointers must be valid for `len1`/`len2` reads (or those
/// lengths zero); `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_dirichlet_solve(
    lambda: f64,
    coeffs1: *const f64,
    len1: usize,
    coeffs2: *const f64,
    len2: usize,
    nr: usize,
    nt: usize,
    out: *mut *mut SaDirichlet,
) -> SaStatus {
    guard(|| {
        if out.is_null() {
            return Err(SaStatus::NullPointer);
        }
        let v = FourierPerturbation::new(read_slice(coeffs1, len1)?.to_vec(), read_slice(coeffs2, len2)?.to_vec());
        let a = RadialSolution::new(lift(ProblemParams::new(2, lambda))?).a;
        let grid = lift(build_grid(lambda, &v, nr, nt))?;
        let solution = lift(solve_dirichlet(&grid, a))?;
        out.write(Box::into_raw(Box::new(SaDirichlet { solution })));
        Ok(())
    })
}

/// Number of angular samples in each normal-derivative trace (0 for null).
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sa_dirichlet_trace_len(sol: *const SaDirichlet) -> usize {
    sol.as_ref().map_or(0, |s| s.solution.inner.values.len())
}

/// Copies the normal-derivative trace on the inner (`outer == 0`) or outer
/// curve at `theta_i = 2 pi i / len`.
///
/// # Safety
/// `sol` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sa_dirichlet_copy_trace(
    sol: *const SaDirichlet,
    outer: c_int,
    buf: *mut f64,
    len: usize,
) -> SaStatus {
    guard(|| {
        let s = sol.as_ref().ok_or(SaStatus::NullPointer)?;
        let trace = if outer == 0 { &s.solution.inner } else { &s.solution.outer };
        if buf.is_null() {
            return Err(SaStatus::NullPointer);
        }
        if len < trace.values.len() {
            return Err(SaStatus::BufferTooSmall);
        }
        slice::from_raw_parts_mut(buf, trace.values.len()).copy_from_slice(&trace.values);
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a handle from `sa_dirichlet_solve`, freed once.
#[no_mangle]
pub unsafe extern "C" fn sa_dirichlet_free(sol: *mut SaDirichlet) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Opaque sequence of converged branch points.
pub struct SaBranch {
    points: Vec<BranchPoint>,
}

/// Scalar summary of one branch point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SaBranchPoint {
    pub s: f64,
    pub lambda_s: f64,
    pub lambda_star: f64,
    pub residual_sup: f64,
    pub neumann_constant: f64,
    pub inner_dirichlet: f64,
}

/// Continues the planar branch of the given even `mode` through the
/// amplitudes `s[0..count]`. On `SA_STATUS_NOT_CONVERGED` the handle is still
/// returned and holds the converged prefix. `modes = 0` and `tol <= 0`
/// select defaults.
///
/// # Safety
/// `s` must be valid for `count` reads and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_branch_continue(
    mode: u32,
    s: *const f64,
    count: usize,
    nr: usize,
    nt: usize,
    modes: usize,
    tol: f64,
    out: *mut *mut SaBranch,
) -> SaStatus {
    guard(|| {
        if out.is_null() {
            return Err(SaStatus::NullPointer);
        }
        out.write(ptr::null_mut());
        let amplitudes = read_slice(s, count)?;
        let star = lift(find_lambda_star(2, mode, 1e-13))?.lambda_star;
        let tangent = lift(tangent_vector(2, star, mode))?;
        let defaults = NewtonOptions::default();
        let opts = NewtonOptions {
            nr,
            nt,
            modes: if modes == 0 { defaults.modes.max(mode as usize / 2 + 4) } else { modes },
            tol: if tol > 0.0 { tol } else { defaults.tol },
            ..defaults
        };
        let trace = continue_branch(tangent, amplitudes, &opts);
        let status = trace.failure.as_ref().map(|(_, e)| SaStatus::from(e));
        out.write(Box::into_raw(Box::new(SaBranch { points: trace.points })));
        status.map_or(Ok(()), Err)
    })
}

/// # Safety
/// `branch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sa_branch_len(branch: *const SaBranch) -> usize {
    branch.as_ref().map_or(0, |b| b.points.len())
}

/// # Safety
/// `branch` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_branch_point(branch: *const SaBranch, index: usize, out: *mut SaBranchPoint) -> SaStatus {
    guard(|| {
        let b = branch.as_ref().ok_or(SaStatus::NullPointer)?;
        let p = b.points.get(index).ok_or(SaStatus::InvalidArgument)?;
        write(
            out,
            SaBranchPoint {
                s: p.s,
                lambda_s: p.lambda_s,
                lambda_star: p.lambda_star,
                residual_sup: p.residual_sup,
                neumann_constant: p.neumann_constant,
                inner_dirichlet: p.inner_dirichlet,
            },
        )
    })
}

/// # Safety
/// `branch` must be null or a handle from `sa_branch_continue`, freed once.
#[no_mangle]
pub unsafe extern "C" fn sa_branch_free(branch: *mut SaBranch) {
    if !branch.is_null() {
        drop(Box::from_raw(branch));
    }
}
