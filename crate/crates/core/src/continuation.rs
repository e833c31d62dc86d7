//! Newton continuation of the bifurcating branch `v(s) = s(z + w(s))` in the
//! plane, with amplitude `s` fixed and `(w, λ)` unknown.
//!
//! The correction `w` is kept orthogonal to the tangent `z` by construction:
//! on the bifurcating harmonic it is a multiple of the weighted-orthogonal
//! complement `z⊥`, and on every other retained harmonic it is free. The
//! unknowns are therefore `λ`, the `z⊥` coefficient, and two cosine
//! coefficients per other harmonic. They are matched by the `cos 2jθ`
//! projections of `F_λ(v)/s` on both boundary curves, a square system.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus::{
    build_grid, evaluate_f, residual_from, solve_dirichlet, DirichletSolution, FResidual,
    FourierPerturbation,
};
use crate::error::{Error, Result};
use crate::modes::eigen_closed_form;
use crate::radial::{ProblemParams, RadialSolution};

/// Kernel direction of `M_{λ*,m}` in the basis `e₁ = (λ*^(-1/2) Y_m, 0)`,
/// `e₂ = (0, Y_m)`, normalized to unit weighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tangent {
    pub mode: u32,
    pub lambda_star: f64,
    pub a: f64,
    pub b: f64,
}

impl Tangent {
    fn index(&self) -> usize {
        self.mode as usize / 2
    }

    /// `α·e₁ + β·e₂` as cosine coefficients on `J + 1` modes.
    fn combination(&self, alpha: f64, beta: f64, modes: usize) -> FourierPerturbation {
        let mut p = FourierPerturbation::zero(modes);
        let y = 1.0 / PI.sqrt();
        p.coeffs1[self.index()] = alpha * y / self.lambda_star.sqrt();
        p.coeffs2[self.index()] = beta * y;
        p
    }

    pub fn as_perturbation(&self, modes: usize) -> FourierPerturbation {
        self.combination(self.a, self.b, modes)
    }

    /// Unit vector weighted-orthogonal to the tangent.
    pub fn complement(&self, modes: usize) -> FourierPerturbation {
        self.combination(-self.b, self.a, modes)
    }
}

pub fn tangent_vector(n: u32, lambda_star: f64, mode: u32) -> Result<Tangent> {
    if n != 2 {
        return Err(Error::InvalidArgument(format!(
            "branch continuation is implemented for n = 2 only, got n = {n}"
        )));
    }
    if mode < 2 || mode % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "bifurcating mode must be even and >= 2, got {mode}"
        )));
    }
    let eig = eigen_closed_form(ProblemParams::new(n, lambda_star)?, f64::from(mode))?;
    if eig.mu1.abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda_star} is not a bifurcation value of mode {mode} (mu = {:e})",
            eig.mu1
        )));
    }
    Ok(Tangent {
        mode,
        lambda_star,
        a: eig.v1[0],
        b: eig.v1[1],
    })
}

/// `⟨p, q⟩_λ = λ∫p₁q₁ dθ + ∫p₂q₂ dθ` for cosine-series pairs.
pub fn weighted_inner(lambda: f64, p: &FourierPerturbation, q: &FourierPerturbation) -> f64 {
    let dot = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .enumerate()
            .map(|(j, (a, b))| if j == 0 { 2.0 * PI * a * b } else { PI * a * b })
            .sum()
    };
    lambda * dot(&p.coeffs1, &q.coeffs1) + dot(&p.coeffs2, &q.coeffs2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub mode: u32,
    pub s: f64,
    pub lambda_s: f64,
    pub lambda_star: f64,
    pub tangent: Tangent,
    /// Correction, weighted-orthogonal to the tangent at `λ*`.
    pub w: FourierPerturbation,
    /// Full perturbation `s(z + w)`.
    pub v: FourierPerturbation,
    pub residual_sup: f64,
    pub neumann_constant: f64,
    pub inner_dirichlet: f64,
    pub iterations: usize,
    pub nr: usize,
    pub nt: usize,
}

impl BranchPoint {
    pub fn solve(&self) -> Result<DirichletSolution> {
        let grid = build_grid(self.lambda_s, &self.v, self.nr, self.nt)?;
        solve_dirichlet(&grid, self.inner_dirichlet)
    }

    /// `⟨w, z⟩_{λ*}`
    pub fn orthogonality(&self) -> f64 {
        let modes = self.w.coeffs1.len();
        weighted_inner(self.lambda_star, &self.w, &self.tangent.as_perturbation(modes))
    }

    /// `‖w‖_{λ*} = ‖v/s - z‖_{λ*}`
    pub fn w_norm(&self) -> f64 {
        weighted_inner(self.lambda_star, &self.w, &self.w).sqrt()
    }

    /// Largest coefficient of a non-constant harmonic in `v`.
    pub fn nonconstant_amplitude(&self) -> f64 {
        self.v
            .coeffs1
            .iter()
            .skip(1)
            .chain(self.v.coeffs2.iter().skip(1))
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Boundary curves sampled at `samples` angles: `(θ, r_inner, r_outer)`.
    pub fn boundary_curves(&self, samples: usize) -> Vec<(f64, f64, f64)> {
        (0..samples)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / samples as f64;
                (t, self.lambda_s + self.v.v1(t), 1.0 - self.v.v2(t))
            })
            .collect()
    }
}

pub fn write_boundary_csv<W: Write>(point: &BranchPoint, samples: usize, mut out: W) -> std::io::Result<()> {
    use crate::output::num;
    writeln!(out, "theta,r_inner,r_outer")?;
    for (t, ri, ro) in point.boundary_curves(samples) {
        writeln!(out, "{},{},{}", num(t), num(ri), num(ro))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub nr: usize,
    pub nt: usize,
    /// Highest retained index `J` of the `cos 2jθ` modes.
    pub modes: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            nr: 24,
            nt: 64,
            modes: 8,
            tol: 1e-8,
            max_iterations: 30,
            fd_step: 1e-6,
        }
    }
}

/// Unknown vector layout: `[λ, t, c₁ⱼ (j ≠ m/2), c₂ⱼ (j ≠ m/2)]`.
struct Layout {
    tangent: Tangent,
    modes: usize,
}

impl Layout {
    fn len(&self) -> usize {
        2 * self.modes + 2
    }

    fn free_modes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.modes).filter(move |j| *j != self.tangent.index())
    }

    fn pack(&self, lambda: f64, w: &FourierPerturbation) -> Vec<f64> {
        let count = self.modes + 1;
        let mut x = vec![lambda, weighted_inner(self.tangent.lambda_star, w, &self.tangent.complement(count))];
        x.extend(self.free_modes().map(|j| w.coeffs1.get(j).copied().unwrap_or(0.0)));
        x.extend(self.free_modes().map(|j| w.coeffs2.get(j).copied().unwrap_or(0.0)));
        x
    }

    fn unpack(&self, x: &[f64]) -> (f64, FourierPerturbation) {
        let count = self.modes + 1;
        let mut w = self.tangent.complement(count).scaled(x[1]);
        let free: Vec<usize> = self.free_modes().collect();
        for (i, &j) in free.iter().enumerate() {
            w.coeffs1[j] = x[2 + i];
            w.coeffs2[j] = x[2 + free.len() + i];
        }
        (x[0], w)
    }

    fn perturbation(&self, s: f64, w: &FourierPerturbation) -> FourierPerturbation {
        self.tangent
            .as_perturbation(self.modes + 1)
            .axpy(1.0, w)
            .scaled(s)
    }
}

struct Evaluation {
    residual: FResidual,
    solution: DirichletSolution,
}

fn evaluate(lambda: f64, v: &FourierPerturbation, opts: &NewtonOptions) -> Result<Evaluation> {
    let rad = RadialSolution::new(ProblemParams::new(2, lambda)?);
    let grid = build_grid(lambda, v, opts.nr, opts.nt)?;
    let solution = solve_dirichlet(&grid, rad.a)?;
    Ok(Evaluation {
        residual: residual_from(&solution, rad.c),
        solution,
    })
}

/// `cos 2jθ` coefficients of both components of `F/s`, `j = 0..=J`.
fn projected(res: &FResidual, s: f64, modes: usize) -> Vec<f64> {
    let f1 = res.f1.cosine.iter().step_by(2).take(modes + 1);
    let f2 = res.f2.cosine.iter().step_by(2).take(modes + 1);
    f1.chain(f2).map(|c| c / s).collect()
}

fn trivial_point(tangent: Tangent, opts: &NewtonOptions) -> Result<BranchPoint> {
    let count = opts.modes + 1;
    let lambda = tangent.lambda_star;
    let rad = RadialSolution::new(ProblemParams::new(2, lambda)?);
    let zero = FourierPerturbation::zero(count);
    let f = evaluate_f(lambda, &zero, opts.nr, opts.nt)?;
    Ok(BranchPoint {
        mode: tangent.mode,
        s: 0.0,
        lambda_s: lambda,
        lambda_star: lambda,
        tangent,
        w: zero.clone(),
        v: zero,
        residual_sup: f.sup_norm(),
        neumann_constant: rad.c,
        inner_dirichlet: rad.a,
        iterations: 0,
        nr: opts.nr,
        nt: opts.nt,
    })
}

/// Damped Newton with a forward-difference Jacobian for `F_λ(s(z + w)) = 0`.
/// `init` supplies the starting `(λ, w)`; `None` starts from `(λ*, 0)`.
pub fn newton_solve_branch_point(
    tangent: Tangent,
    s: f64,
    init: Option<&BranchPoint>,
    opts: &NewtonOptions,
) -> Result<BranchPoint> {
    if opts.modes < tangent.index() + 4 {
        return Err(Error::InvalidArgument(format!(
            "need J >= {} retained modes for mode {}, got {}",
            tangent.index() + 4,
            tangent.mode,
            opts.modes
        )));
    }
    if 4 * opts.modes > opts.nt {
        return Err(Error::InvalidArgument(format!(
            "Nt = {} cannot resolve J = {} modes",
            opts.nt, opts.modes
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    if s == 0.0 {
        return trivial_point(tangent, opts);
    }
    let layout = Layout {
        tangent,
        modes: opts.modes,
    };
    let mut x = match init {
        Some(p) => layout.pack(p.lambda_s, &p.w),
        None => layout.pack(tangent.lambda_star, &FourierPerturbation::zero(opts.modes + 1)),
    };

    let eval_at = |x: &[f64]| -> Result<Evaluation> {
        let (lambda, w) = layout.unpack(x);
        evaluate(lambda, &layout.perturbation(s, &w), opts)
    };

    let mut current = eval_at(&x)?;
    let mut iterations = 0;
    loop {
        let sup = current.residual.sup_norm();
        if sup < opts.tol {
            let (lambda, w) = layout.unpack(&x);
            let v = layout.perturbation(s, &w);
            return Ok(BranchPoint {
                mode: tangent.mode,
                s,
                lambda_s: lambda,
                lambda_star: tangent.lambda_star,
                tangent,
                w,
                v,
                residual_sup: sup,
                neumann_constant: current.solution.pooled_neumann_mean(),
                inner_dirichlet: current.solution.a,
                iterations,
                nr: opts.nr,
                nt: opts.nt,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NotConverged {
                what: "branch Newton",
                iterations,
                residual: sup,
            });
        }
        iterations += 1;

        let g0 = projected(&current.residual, s, opts.modes);
        let size = layout.len();
        let columns: Vec<Result<Vec<f64>>> = (0..size)
            .into_par_iter()
            .map(|k| {
                let mut xp = x.clone();
                xp[k] += opts.fd_step;
                let g = projected(&eval_at(&xp)?.residual, s, opts.modes);
                Ok(g.iter().zip(&g0).map(|(a, b)| (a - b) / opts.fd_step).collect())
            })
            .collect();
        let mut jac = DMatrix::zeros(size, size);
        for (k, col) in columns.into_iter().enumerate() {
            for (i, v) in col?.into_iter().enumerate() {
                jac[(i, k)] = v;
            }
        }
        let step = jac
            .lu()
            .solve(&-DVector::from_vec(g0.clone()))
            .ok_or(Error::Singular("branch Newton Jacobian"))?;

        let norm0 = g0.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + damping * d).collect();
            if let Ok(ev) = eval_at(&trial) {
                let g = projected(&ev.residual, s, opts.modes);
                let norm = g.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm < norm0 || ev.residual.sup_norm() < opts.tol {
                    accepted = Some((trial, ev));
                    break;
                }
            }
            damping *= 0.5;
        }
        match accepted {
            Some((trial, ev)) => {
                x = trial;
                current = ev;
            }
            None => {
                return Err(Error::NotConverged {
                    what: "branch Newton line search",
                    iterations,
                    residual: sup,
                })
            }
        }
    }
}

/// Converged prefix of a branch and, when it stopped early, the reason.
#[derive(Debug, Clone)]
pub struct BranchTrace {
    pub points: Vec<BranchPoint>,
    pub failure: Option<(f64, Error)>,
}

/// Solves at each amplitude in order, warm-starting from the last converged
/// point of the same sign.
pub fn continue_branch(tangent: Tangent, s_list: &[f64], opts: &NewtonOptions) -> BranchTrace {
    let mut points: Vec<BranchPoint> = Vec::new();
    for &s in s_list {
        let init = points
            .iter()
            .rev()
            .find(|p| p.s != 0.0 && p.s.signum() == s.signum());
        match newton_solve_branch_point(tangent, s, init, opts) {
            Ok(p) => points.push(p),
            Err(e) => {
                return BranchTrace {
                    points,
                    failure: Some((s, e)),
                }
            }
        }
    }
    BranchTrace {
        points,
        failure: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverdeterminedReport {
    pub inner_mean: f64,
    pub inner_max_deviation: f64,
    pub outer_mean: f64,
    pub outer_max_deviation: f64,
    /// Pooled Neumann constant.
    pub c: f64,
    /// Largest deviation of either trace from `c`.
    pub max_joint_deviation: f64,
    pub inner_dirichlet: f64,
    pub min_interior_u: f64,
    pub positive: bool,
    pub nonconstant_amplitude: f64,
    pub nonconstant: bool,
}

pub fn verify_overdetermined(point: &BranchPoint) -> Result<OverdeterminedReport> {
    let sol = point.solve()?;
    let c = sol.pooled_neumann_mean();
    let stats = |values: &[f64]| {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let dev = values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        let joint = values.iter().fold(0.0f64, |m, v| m.max((v - c).abs()));
        (mean, dev, joint)
    };
    let (inner_mean, inner_dev, inner_joint) = stats(&sol.inner.values);
    let (outer_mean, outer_dev, outer_joint) = stats(&sol.outer.values);
    let min_u = sol.min_interior();
    let amplitude = point.nonconstant_amplitude();
    Ok(OverdeterminedReport {
        inner_mean,
        inner_max_deviation: inner_dev,
        outer_mean,
        outer_max_deviation: outer_dev,
        c,
        max_joint_deviation: inner_joint.max(outer_joint),
        inner_dirichlet: point.inner_dirichlet,
        min_interior_u: min_u,
        positive: min_u > 0.0,
        nonconstant_amplitude: amplitude,
        nonconstant: amplitude > 0.0,
    })
}
