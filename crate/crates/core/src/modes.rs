//! The linearized domain-variation operator restricted to one
//! spherical-harmonic degree.
//!
//! On `W = span{(Y, 0), (0, Y)}` with `Y` a unit-norm harmonic of degree `k`,
//! the operator acts as a symmetric 2×2 matrix in the orthonormal basis
//! `e₁ = (λ^((1-n)/2) Y, 0)`, `e₂ = (0, Y)`. Three constructions are provided
//! and checked against each other:
//!
//! * [`mode_matrix`]: the explicit power-law entries,
//! * [`mode_matrix_via_profiles`]: assembled from the harmonic extensions
//!   `A(r) Y`, `B(r) Y` and the radial second derivative,
//! * [`shifted_matrix`]: the hyperbolic form in `α = n/2 + k - 1`,
//!   `ω = -α ln λ`, from which [`eigen_closed_form`] is derived.
//!
//! `k` is a real number ≥ 0 so that the family can be differentiated in `k`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{ProblemParams, RadialSolution};

/// `M_{λ,k}` together with the auxiliary quantities of its hyperbolic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMatrix {
    pub params: ProblemParams,
    pub k: f64,
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
    /// `n/2 + k - 1`
    pub alpha: f64,
    /// `-α ln λ`
    pub omega: f64,
    /// Linear coefficient of the shifted characteristic polynomial.
    pub cap_c: f64,
    /// `α² - n²/4 = (n + k - 1)(k - 1)`
    pub cap_d: f64,
}

impl ModeMatrix {
    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m12, self.m22]]
    }
}

/// Eigenvalues `mu1 < mu2` with unit eigenvectors whose first entry is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub mu1: f64,
    pub mu2: f64,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

/// Harmonic radial profiles and their derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfiles {
    pub a: f64,
    pub b: f64,
    pub da: f64,
    pub db: f64,
}

fn check_degree(k: f64) -> Result<()> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Degree(k));
    }
    Ok(())
}

/// `x coth x`, finite at 0 and free of overflow for large `x`.
fn x_coth_x(x: f64) -> f64 {
    if x < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        let q2 = (-2.0 * x).exp();
        x * (1.0 + q2) / -(-2.0 * x).exp_m1()
    }
}

/// `x / sinh x`, finite at 0 and underflowing gracefully for large `x`.
fn x_csch_x(x: f64) -> f64 {
    if x < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x * 2.0 * (-x).exp() / -(-2.0 * x).exp_m1()
    }
}

/// `(α, ω, α coth ω, α / sinh ω)`; the last two have the limit `-1/ln λ`
/// when `α → 0` (n = 2, k = 0).
fn hyperbolic_parts(params: ProblemParams, k: f64) -> (f64, f64, f64, f64) {
    let alpha = params.nf() / 2.0 + k - 1.0;
    let t = -params.lambda().ln();
    let omega = alpha * t;
    (alpha, omega, x_coth_x(omega) / t, x_csch_x(omega) / t)
}

fn capital_c_d(params: ProblemParams, alpha: f64, alpha_coth: f64) -> (f64, f64) {
    let n = params.nf();
    let l = params.lambda();
    let c = alpha_coth * (l + 1.0) + n / 2.0 * (l - 1.0);
    let d = alpha * alpha - n * n / 4.0;
    (c, d)
}

fn with_auxiliaries(params: ProblemParams, k: f64, m11: f64, m12: f64, m22: f64) -> ModeMatrix {
    let (alpha, omega, alpha_coth, _) = hyperbolic_parts(params, k);
    let (cap_c, cap_d) = capital_c_d(params, alpha, alpha_coth);
    ModeMatrix {
        params,
        k,
        m11,
        m12,
        m22,
        alpha,
        omega,
        cap_c,
        cap_d,
    }
}

/// `M_{λ,k}` from its explicit entries.
///
/// For `k > 0` the power-law entries are evaluated after dividing numerator
/// and denominator by `λ^(2-n-k)`, which keeps them finite for large `k`.
/// `k = 0` uses the dedicated formulas (logarithmic when `n = 2`).
pub fn mode_matrix(params: ProblemParams, k: f64) -> Result<ModeMatrix> {
    check_degree(k)?;
    let n = params.nf();
    let l = params.lambda();
    let inv_c = 1.0 / RadialSolution::new(params).c;
    let (m11, m12, m22) = if k == 0.0 && params.n() == 2 {
        let ln = l.ln();
        (
            -1.0 / (l * ln) - 1.0 / l - inv_c,
            l.powf(-0.5) / ln,
            -1.0 / ln + 1.0 - inv_c,
        )
    } else if k == 0.0 {
        let p = l.powf(2.0 - n);
        let den = p - 1.0;
        (
            (n - 2.0) * p / den / l - (n - 1.0) / l - inv_c,
            l.powf((1.0 - n) / 2.0) * (2.0 - n) / den,
            (n - 2.0) / den + (n - 1.0) - inv_c,
        )
    } else {
        // e = n + k - 2, so λ^(2-n-k) = λ^(-e) and q² = λ^(k+e)
        let e = n + k - 2.0;
        let q2 = l.powf(k + e);
        let den = -((k + e) * l.ln()).exp_m1();
        (
            ((e + k * q2) / den - (n - 1.0)) / l - inv_c,
            -(e + k) * l.powf(e + (1.0 - n) / 2.0) / den,
            (k + e * q2) / den + (n - 1.0) - inv_c,
        )
    };
    Ok(with_auxiliaries(params, k, m11, m12, m22))
}

/// `M̃_{λ,k} = M_{λ,k} + (1/c_λ)·id` in hyperbolic form.
pub fn shifted_matrix(params: ProblemParams, k: f64) -> Result<[[f64; 2]; 2]> {
    check_degree(k)?;
    let n = params.nf();
    let l = params.lambda();
    let (_, _, p, q) = hyperbolic_parts(params, k);
    let off = -q / l.sqrt();
    Ok([[(p - n / 2.0) / l, off], [off, p + n / 2.0]])
}

/// Radial factors `A`, `B` of the harmonic extensions of `e₁`, `e₂`:
/// `A(λ) = λ^((1-n)/2)`, `A(1) = 0`, `B(λ) = 0`, `B(1) = 1`.
pub fn harmonic_radial_profiles(params: ProblemParams, k: f64, r: f64) -> Result<RadialProfiles> {
    check_degree(k)?;
    let l = params.lambda();
    if r.is_nan() || r < l || r > 1.0 {
        return Err(Error::RadiusOutOfRange { r, lambda: l });
    }
    let n = params.nf();
    let scale = l.powf((1.0 - n) / 2.0);
    if params.n() == 2 && k == 0.0 {
        let ln_l = l.ln();
        return Ok(RadialProfiles {
            a: scale * r.ln() / ln_l,
            b: -(r.ln() - ln_l) / ln_l,
            da: scale / (r * ln_l),
            db: -1.0 / (r * ln_l),
        });
    }
    // divide through by λ^(2-n-k); every power below is ≤ 1
    let e = n + k - 2.0;
    let den = -((k + e) * l.ln()).exp_m1();
    let inner = (l / r).powf(e);
    let lam_e = l.powf(e);
    let rk = r.powf(k);
    let lk = l.powf(k);
    Ok(RadialProfiles {
        a: scale * (inner - rk * lam_e) / den,
        b: (rk - lk * inner) / den,
        da: scale * (-e * inner / r - k * r.powf(k - 1.0) * lam_e) / den,
        db: (k * r.powf(k - 1.0) + e * lk * inner / r) / den,
    })
}

/// Full (not symmetrized) matrix assembled from the harmonic extensions.
pub fn profile_matrix(params: ProblemParams, k: f64) -> Result<[[f64; 2]; 2]> {
    let l = params.lambda();
    let n = params.nf();
    let radial = RadialSolution::new(params);
    let at_inner = harmonic_radial_profiles(params, k, l)?;
    let at_outer = harmonic_radial_profiles(params, k, 1.0)?;
    let (_, d2u_inner) = radial.derivs(l)?;
    let (_, d2u_outer) = radial.derivs(1.0)?;
    // first component is expressed in the e₁ basis, hence the λ^((n-1)/2)
    let back = l.powf((n - 1.0) / 2.0);
    Ok([
        [-at_inner.da * back + d2u_inner / radial.c, -at_inner.db * back],
        [at_outer.da, at_outer.db + d2u_outer / radial.c],
    ])
}

/// `M_{λ,k}` assembled from `A'`, `B'` at both radii and `u''/c_λ`.
pub fn mode_matrix_via_profiles(params: ProblemParams, k: f64) -> Result<ModeMatrix> {
    let m = profile_matrix(params, k)?;
    Ok(with_auxiliaries(params, k, m[0][0], m[0][1], m[1][1]))
}

/// Unit eigenvector of `[[a, b], [b, d]]` for eigenvalue `mu`, first entry ≥ 0.
fn unit_eigenvector(a: f64, b: f64, d: f64, mu: f64) -> [f64; 2] {
    let c1 = [b, mu - a];
    let c2 = [mu - d, b];
    let n1 = c1[0].hypot(c1[1]);
    let n2 = c2[0].hypot(c2[1]);
    let (v, norm) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    if norm == 0.0 {
        return [1.0, 0.0];
    }
    let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
    [sign * v[0] / norm, sign * v[1] / norm]
}

/// Eigenpairs from the closed-form roots of the shifted characteristic
/// polynomial `λ μ̃² - C μ̃ + D = 0`, shifted back by `-1/c_λ`.
pub fn eigen_closed_form(params: ProblemParams, k: f64) -> Result<EigenPair> {
    check_degree(k)?;
    let l = params.lambda();
    let (alpha, _, alpha_coth, _) = hyperbolic_parts(params, k);
    let (c, d) = capital_c_d(params, alpha, alpha_coth);
    let inv_c = 1.0 / RadialSolution::new(params).c;
    // the discriminant is a sum of squares; rounding can push it below 0 at k = 1
    let root = (c * c - 4.0 * l * d).max(0.0).sqrt();
    let (t1, t2) = if c >= 0.0 {
        let big = c + root;
        (if big == 0.0 { 0.0 } else { 2.0 * d / big }, big / (2.0 * l))
    } else {
        let big = c - root;
        (big / (2.0 * l), 2.0 * d / big)
    };
    let m = shifted_matrix(params, k)?;
    Ok(EigenPair {
        mu1: t1 - inv_c,
        mu2: t2 - inv_c,
        v1: unit_eigenvector(m[0][0], m[0][1], m[1][1], t1),
        v2: unit_eigenvector(m[0][0], m[0][1], m[1][1], t2),
    })
}

/// Generic symmetric 2×2 eigensolver.
pub fn eigen_direct(mat: &ModeMatrix) -> EigenPair {
    eigen_symmetric(mat.m11, mat.m12, mat.m22)
}

pub fn eigen_symmetric(a: f64, b: f64, d: f64) -> EigenPair {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b);
    let mu1 = mean - radius;
    let mu2 = mean + radius;
    EigenPair {
        mu1,
        mu2,
        v1: unit_eigenvector(a, b, d, mu1),
        v2: unit_eigenvector(a, b, d, mu2),
    }
}

/// One sample of an eigenvalue branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub n: u32,
    pub k: u32,
    pub j: u8,
    pub lambda: f64,
    pub mu: f64,
}

/// Samples `μ_{k,j}(λ)` for every `k` in `degrees`, `j ∈ {1, 2}` and every
/// `λ` in `lambdas`, ordered by `k`, then `j`, then grid position.
pub fn eigen_branch_table(n: u32, degrees: &[u32], lambdas: &[f64]) -> Result<Vec<BranchRow>> {
    if degrees.is_empty() {
        return Err(Error::InvalidArgument("empty degree list".into()));
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    let params: Vec<ProblemParams> = lambdas
        .iter()
        .map(|&l| ProblemParams::new(n, l))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(degrees.len() * lambdas.len() * 2);
    for &k in degrees {
        let pairs: Vec<EigenPair> = params
            .iter()
            .map(|&p| eigen_closed_form(p, f64::from(k)))
            .collect::<Result<_>>()?;
        for j in 1..=2u8 {
            for (p, e) in params.iter().zip(&pairs) {
                rows.push(BranchRow {
                    n,
                    k,
                    j,
                    lambda: p.lambda(),
                    mu: if j == 1 { e.mu1 } else { e.mu2 },
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_branch_csv<W: Write>(rows: &[BranchRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,k,j,lambda,mu")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            r.k,
            r.j,
            crate::output::num(r.lambda),
            crate::output::num(r.mu)
        )?;
    }
    Ok(())
}
