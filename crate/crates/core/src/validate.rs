//! Self-check suite behind `serrin-annulus validate`.
//!
//! The eigenvalue routine is injected so that a deliberately broken variant
//! can be shown to fail the oracle checks.

use serde::{Deserialize, Serialize};

use crate::annulus::{evaluate_f, linearization_fd, FourierPerturbation};
use crate::bifurcation::find_lambda_star;
use crate::cheeger::cheeger_report;
use crate::continuation::{continue_branch, tangent_vector, verify_overdetermined, NewtonOptions};
use crate::error::Result;
use crate::modes::{eigen_closed_form, eigen_direct, mode_matrix, mode_matrix_via_profiles, EigenPair};
use crate::radial::{ProblemParams, RadialSolution};

pub type EigenRoutine = dyn Fn(ProblemParams, f64) -> Result<EigenPair> + Sync;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub observed: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub quick: bool,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &str, observed: f64, bound: f64) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: observed < bound,
        observed: format!("{observed:e}"),
        expected: format!("< {bound:e}"),
    }
}

fn failed(name: &str, err: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: false,
        observed: format!("error: {err}"),
        expected: "success".into(),
    }
}

fn lambda_grid(quick: bool) -> Vec<f64> {
    let step = if quick { 4 } else { 1 };
    (1..=19).step_by(step).map(|i| f64::from(i) * 0.05).collect()
}

fn eigen_checks(quick: bool, eigen: &EigenRoutine, out: &mut Vec<CheckResult>) -> Result<()> {
    let grid = lambda_grid(quick);
    let mut oracle: f64 = 0.0;
    let mut construction: f64 = 0.0;
    let mut translation: f64 = 0.0;
    let mut monotone = true;
    for n in 2..=5 {
        for k in 0..=20u32 {
            let kf = f64::from(k);
            let mut prev = f64::INFINITY;
            for &l in &grid {
                let p = ProblemParams::new(n, l)?;
                let m = mode_matrix(p, kf)?;
                let e = eigen(p, kf)?;
                let d = eigen_direct(&m);
                oracle = oracle.max((e.mu1 - d.mu1).abs()).max((e.mu2 - d.mu2).abs());
                let via = mode_matrix_via_profiles(p, kf)?;
                for (a, b) in m.entries().iter().flatten().zip(via.entries().iter().flatten()) {
                    construction = construction.max((a - b).abs());
                }
                if k == 1 {
                    let c = RadialSolution::new(p).c;
                    translation = translation.max(e.mu2.abs()).max((e.mu1 + 1.0 / c).abs());
                }
                if k >= 2 {
                    monotone &= e.mu1 < prev && e.mu2 > 0.0;
                    prev = e.mu1;
                }
                if k < 20 {
                    let next = eigen(p, kf + 1.0)?;
                    monotone &= next.mu1 > e.mu1 && next.mu2 > e.mu2;
                }
                if k == 0 {
                    monotone &= e.mu1 < e.mu2 && e.mu2 < 0.0;
                }
            }
        }
    }
    out.push(check("eigenvalue oracle: closed form vs direct", oracle, 1e-10));
    out.push(check("matrix oracle: closed form vs radial profiles", construction, 1e-12));
    out.push(check("translation mode: mu_(1,2) = 0, mu_(1,1) = -1/c", translation, 1e-12));
    out.push(CheckResult {
        name: "monotonicity scans".into(),
        passed: monotone,
        observed: monotone.to_string(),
        expected: "true".into(),
    });

    let mut limit: f64 = 0.0;
    let mut asym: f64 = 0.0;
    for n in 2..=5 {
        for k in 2..=10 {
            let mu = eigen(ProblemParams::new(n, 1e-6)?, f64::from(k))?.mu1;
            limit = limit.max((mu - f64::from(k - 1)).abs());
        }
        for l in [0.25, 0.5, 0.75] {
            let e = eigen(ProblemParams::new(n, l)?, 1e4)?;
            asym = asym.max((e.mu1 / 1e4 - 1.0).abs()).max((l * e.mu2 / 1e4 - 1.0).abs());
        }
    }
    out.push(check("small inner radius limit", limit, 1e-3));
    out.push(check("large degree asymptotics", asym, 1e-2));
    Ok(())
}

fn bifurcation_check(out: &mut Vec<CheckResult>) -> Result<()> {
    let mut prev = 0.0;
    let mut residual: f64 = 0.0;
    let mut increasing = true;
    for m in 2..=20 {
        let b = find_lambda_star(2, m, 1e-12)?;
        increasing &= b.lambda_star > prev;
        residual = residual.max(b.residual);
        prev = b.lambda_star;
    }
    let mut c = check("bifurcation values: residual, increasing", residual, 1e-12);
    c.passed &= increasing;
    out.push(c);
    Ok(())
}

fn pde_checks(quick: bool, out: &mut Vec<CheckResult>) -> Result<()> {
    let f0 = evaluate_f(0.5, &FourierPerturbation::zero(1), 32, 64)?.sup_norm();
    out.push(check("trivial annulus: sup |F(0)|", f0, 1e-8));
    let degrees: &[usize] = if quick { &[2] } else { &[0, 1, 2, 3, 4] };
    let p = ProblemParams::new(2, 0.5)?;
    let mut worst: f64 = 0.0;
    for &m in degrees {
        let fd = linearization_fd(0.5, m, 1e-5, 24, 64)?;
        let exact = mode_matrix(p, m as f64)?.entries();
        for (a, b) in fd.matrix.iter().flatten().zip(exact.iter().flatten()) {
            worst = worst.max((a - b).abs() / b.abs());
        }
    }
    out.push(check("finite-difference linearization, relative", worst, 1e-4));
    Ok(())
}

fn branch_checks(out: &mut Vec<CheckResult>) -> Result<()> {
    let star = find_lambda_star(2, 2, 1e-13)?.lambda_star;
    let tangent = tangent_vector(2, star, 2)?;
    let trace = continue_branch(tangent, &[0.005, -0.005, 0.01, -0.01, 0.02, -0.02], &NewtonOptions::default());
    if let Some((s, e)) = trace.failure {
        out.push(failed(&format!("branch continuation at s = {s}"), e));
        return Ok(());
    }
    let mut residual: f64 = 0.0;
    let mut gap: f64 = 0.0;
    let mut grad_ok = true;
    for p in &trace.points {
        let rep = verify_overdetermined(p)?;
        residual = residual.max(rep.max_joint_deviation / rep.c);
        let ch = cheeger_report(p)?;
        gap = gap.max(ch.gap_abs);
        grad_ok &= ch.grad_bound_ok;
    }
    out.push(check("branch: overdetermined residual", residual, 1e-6));
    let mut c = check("branch: Cheeger gap and gradient bound", gap, 1e-5);
    c.passed &= grad_ok;
    out.push(c);
    Ok(())
}

/// Runs the suite with a custom eigenvalue routine.
pub fn run_validation_with(quick: bool, eigen: &EigenRoutine) -> ValidationSummary {
    let mut checks = Vec::new();
    if let Err(e) = eigen_checks(quick, eigen, &mut checks) {
        checks.push(failed("eigenvalue checks", e));
    }
    if let Err(e) = bifurcation_check(&mut checks) {
        checks.push(failed("bifurcation values", e));
    }
    if let Err(e) = pde_checks(quick, &mut checks) {
        checks.push(failed("collocation checks", e));
    }
    if !quick {
        if let Err(e) = branch_checks(&mut checks) {
            checks.push(failed("branch checks", e));
        }
    }
    ValidationSummary {
        quick,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn run_validation(quick: bool) -> ValidationSummary {
    run_validation_with(quick, &eigen_closed_form)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let s = run_validation(true);
        assert!(s.passed, "{:#?}", s.checks);
    }

    #[test]
    fn sign_error_is_caught() {
        // flip the sign of the trace term in the characteristic polynomial
        let broken = |p: ProblemParams, k: f64| -> Result<EigenPair> {
            let m = mode_matrix(p, k)?;
            let l = p.lambda();
            let root = (m.cap_c * m.cap_c - 4.0 * l * m.cap_d).max(0.0).sqrt();
            let inv_c = 1.0 / RadialSolution::new(p).c;
            let mut e = eigen_closed_form(p, k)?;
            e.mu1 = (-m.cap_c - root) / (2.0 * l) - inv_c;
            e.mu2 = (-m.cap_c + root) / (2.0 * l) - inv_c;
            Ok(e)
        };
        let s = run_validation_with(true, &broken);
        assert!(!s.passed);
        let oracle = &s.checks[0];
        assert!(oracle.name.starts_with("eigenvalue oracle") && !oracle.passed);
    }
}
