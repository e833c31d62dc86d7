//! Spectral collocation for `-Δu = 1` on perturbed planar annuli
//! `λ + v₁(θ) < r < 1 - v₂(θ)`.
//!
//! The domain is mapped onto `[0, 1] × S¹` by the linear radial blend
//! `r(s, θ) = (λ + v₁)(1 - s) + (1 - v₂) s`. The Laplacian is rewritten with
//! the chain rule through the exact inverse `s = (r - λ - v₁) / (1 - v₂ - λ - v₁)`
//! and discretized with Chebyshev–Gauss–Lobatto points in `s` and equispaced
//! Fourier points in `θ`. Boundary curves are even cosine series, so the
//! solution is even in `θ`; when every harmonic is a multiple of `p` it is
//! also `2π/p`-periodic. The solver stores only the nodes of one half period
//! and folds the angular differentiation matrices accordingly.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{ProblemParams, RadialSolution};
use crate::spectral;

/// Cosine series `Σ_q coeffs[q] cos(qθ)`, indexed by harmonic.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CosineSeries {
    pub coeffs: Vec<f64>,
}

impl CosineSeries {
    pub fn single(harmonic: usize, amplitude: f64) -> Self {
        let mut coeffs = vec![0.0; harmonic + 1];
        coeffs[harmonic] = amplitude;
        Self { coeffs }
    }

    /// Value, first and second derivative at `theta`.
    pub fn eval3(&self, theta: f64) -> (f64, f64, f64) {
        let mut v = (0.0, 0.0, 0.0);
        for (q, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let q = q as f64;
            let (s, co) = (q * theta).sin_cos();
            v.0 += c * co;
            v.1 -= c * q * s;
            v.2 -= c * q * q * co;
        }
        v
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval3(theta).0
    }

    /// Greatest common divisor of the harmonics present; 0 when constant.
    fn period_divisor(&self) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| **c != 0.0)
            .fold(0, |g, (q, _)| gcd(g, q))
    }

    fn max_harmonic(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    fn add(&self, other: &Self, scale: f64) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|q| {
                self.coeffs.get(q).copied().unwrap_or(0.0)
                    + scale * other.coeffs.get(q).copied().unwrap_or(0.0)
            })
            .collect();
        Self { coeffs }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Invariant boundary perturbation: `v_i(θ) = Σ_j coeffs_i[j] cos(2jθ)`.
///
/// Only even cosine modes are representable, which is exactly the class of
/// functions invariant under the reflections in both coordinate axes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FourierPerturbation {
    pub coeffs1: Vec<f64>,
    pub coeffs2: Vec<f64>,
}

impl FourierPerturbation {
    pub fn new(coeffs1: Vec<f64>, coeffs2: Vec<f64>) -> Self {
        Self { coeffs1, coeffs2 }
    }

    /// All-zero perturbation with `modes` coefficients per boundary.
    pub fn zero(modes: usize) -> Self {
        Self::new(vec![0.0; modes], vec![0.0; modes])
    }

    fn to_series(coeffs: &[f64]) -> CosineSeries {
        let mut out = vec![0.0; 2 * coeffs.len().max(1) - 1];
        for (j, &c) in coeffs.iter().enumerate() {
            out[2 * j] = c;
        }
        CosineSeries { coeffs: out }
    }

    pub fn inner_series(&self) -> CosineSeries {
        Self::to_series(&self.coeffs1)
    }

    pub fn outer_series(&self) -> CosineSeries {
        Self::to_series(&self.coeffs2)
    }

    pub fn v1(&self, theta: f64) -> f64 {
        self.inner_series().eval(theta)
    }

    pub fn v2(&self, theta: f64) -> f64 {
        self.outer_series().eval(theta)
    }

    /// True when some non-constant mode is present on either boundary.
    pub fn is_nonconstant(&self) -> bool {
        self.coeffs1.iter().chain(&self.coeffs2).enumerate().any(|(i, c)| {
            let j = if i < self.coeffs1.len() { i } else { i - self.coeffs1.len() };
            j > 0 && *c != 0.0
        })
    }

    pub fn check_admissible(&self, lambda: f64) -> Result<()> {
        check_curves(lambda, &self.inner_series(), &self.outer_series())
    }

    /// `self + scale · other`, padded to the longer length.
    pub fn axpy(&self, scale: f64, other: &Self) -> Self {
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            (0..a.len().max(b.len()))
                .map(|i| a.get(i).copied().unwrap_or(0.0) + scale * b.get(i).copied().unwrap_or(0.0))
                .collect()
        };
        Self::new(mix(&self.coeffs1, &other.coeffs1), mix(&self.coeffs2, &other.coeffs2))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.coeffs1.iter().map(|c| c * factor).collect(),
            self.coeffs2.iter().map(|c| c * factor).collect(),
        )
    }
}

fn check_curves(lambda: f64, inner: &CosineSeries, outer: &CosineSeries) -> Result<()> {
    let samples = (16 * inner.max_harmonic().max(outer.max_harmonic())).max(512);
    for i in 0..samples {
        let theta = 2.0 * PI * i as f64 / samples as f64;
        let r_in = lambda + inner.eval(theta);
        let r_out = 1.0 - outer.eval(theta);
        if !(r_in > 0.0) {
            return Err(Error::Inadmissible(format!(
                "inner boundary reaches the origin at theta = {theta:.6}"
            )));
        }
        if !(r_in < r_out) {
            return Err(Error::Inadmissible(format!(
                "boundary curves cross at theta = {theta:.6} (r_in = {r_in:.6}, r_out = {r_out:.6})"
            )));
        }
    }
    Ok(())
}

/// Collocation grid on the mapped annulus, restricted to the nodes of one
/// half symmetry period `θ ∈ [0, π/p]`.
#[derive(Debug, Clone)]
pub struct MappedAnnulusGrid {
    pub lambda: f64,
    pub inner: CosineSeries,
    pub outer: CosineSeries,
    pub nr: usize,
    pub nt: usize,
    /// Rotational symmetry order `p` used to reduce the angular grid.
    pub fold: usize,
    /// Radial nodes in `[0, 1]`, `s[0] = 0` on the inner boundary.
    pub s: Vec<f64>,
    /// Reduced angular nodes `2πj/nt`, `j = 0..=nt/(2p)`.
    pub theta: Vec<f64>,
    rin: Vec<f64>,
    rin_t: Vec<f64>,
    rin_tt: Vec<f64>,
    len: Vec<f64>,
    len_t: Vec<f64>,
    len_tt: Vec<f64>,
    ds: DMatrix<f64>,
    ds2: DMatrix<f64>,
    dt: DMatrix<f64>,
    dt2: DMatrix<f64>,
}

/// Largest divisor `p` of the curves' common period such that the reduced
/// grid still has at least 8 points per period.
fn choose_fold(divisor: usize, nt: usize) -> usize {
    let target = if divisor == 0 { 2 } else { divisor };
    (1..=target)
        .rev()
        .find(|&p| target % p == 0 && nt % (2 * p) == 0 && nt / p >= 8)
        .unwrap_or(1)
}

impl MappedAnnulusGrid {
    pub fn from_curves(
        lambda: f64,
        inner: CosineSeries,
        outer: CosineSeries,
        nr: usize,
        nt: usize,
    ) -> Result<Self> {
        Self::with_fold(lambda, inner, outer, nr, nt, None)
    }

    fn with_fold(
        lambda: f64,
        inner: CosineSeries,
        outer: CosineSeries,
        nr: usize,
        nt: usize,
        fold: Option<usize>,
    ) -> Result<Self> {
        ProblemParams::new(2, lambda)?;
        if nr < 8 {
            return Err(Error::InvalidArgument(format!("Nr = {nr} < 8")));
        }
        if nt < 8 || nt % 2 != 0 {
            return Err(Error::InvalidArgument(format!("Nt = {nt} must be even and >= 8")));
        }
        check_curves(lambda, &inner, &outer)?;
        let fold = fold
            .unwrap_or_else(|| choose_fold(gcd(inner.period_divisor(), outer.period_divisor()), nt));
        let nphi = nt / fold;

        let (x, dx) = spectral::chebyshev(nr);
        let s: Vec<f64> = x.iter().map(|x| (1.0 - x) / 2.0).collect();
        let ds = dx * -2.0;
        let ds2 = &ds * &ds;

        let (d1, d2) = spectral::fourier(nphi);
        let p = fold as f64;
        let dt = spectral::fold_even(&d1) * p;
        let dt2 = spectral::fold_even(&d2) * (p * p);

        let theta: Vec<f64> = (0..=nphi / 2).map(|j| 2.0 * PI * j as f64 / nt as f64).collect();
        let mut grid = Self {
            lambda,
            inner,
            outer,
            nr,
            nt,
            fold,
            s,
            theta: theta.clone(),
            rin: Vec::new(),
            rin_t: Vec::new(),
            rin_tt: Vec::new(),
            len: Vec::new(),
            len_t: Vec::new(),
            len_tt: Vec::new(),
            ds,
            ds2,
            dt,
            dt2,
        };
        for &t in &theta {
            let (v1, v1t, v1tt) = grid.inner.eval3(t);
            let (v2, v2t, v2tt) = grid.outer.eval3(t);
            grid.rin.push(lambda + v1);
            grid.rin_t.push(v1t);
            grid.rin_tt.push(v1tt);
            grid.len.push(1.0 - v2 - lambda - v1);
            grid.len_t.push(-v2t - v1t);
            grid.len_tt.push(-v2tt - v1tt);
        }
        Ok(grid)
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn unknowns(&self) -> usize {
        self.nr * self.n_theta()
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta() + j
    }

    /// Physical radius of node `(i, j)`.
    pub fn radius(&self, i: usize, j: usize) -> f64 {
        self.rin[j] + self.s[i] * self.len[j]
    }

    /// `∂r/∂s`; positive for admissible curves.
    pub fn jacobian(&self, j: usize) -> f64 {
        self.len[j]
    }

    /// Inner and outer boundary radii at a reduced angular node.
    pub fn boundary_radii(&self, j: usize) -> (f64, f64) {
        (self.rin[j], self.rin[j] + self.len[j])
    }

    /// Inverse-map derivatives `(S_r, S_θ, S_θθ)` at node `(i, j)`.
    fn inverse_map(&self, i: usize, j: usize) -> (f64, f64, f64) {
        let l = self.len[j];
        let r_t = self.rin_t[j] + self.s[i] * self.len_t[j];
        let r_tt = self.rin_tt[j] + self.s[i] * self.len_tt[j];
        let s_t = -r_t / l;
        let s_tt = -(r_tt + 2.0 * s_t * self.len_t[j]) / l;
        (1.0 / l, s_t, s_tt)
    }

    fn assemble(&self, a: f64) -> (DMatrix<f64>, DVector<f64>) {
        let (nr, nth) = (self.nr, self.n_theta());
        let size = self.unknowns();
        let mut mat = DMatrix::zeros(size, size);
        let mut rhs = DVector::zeros(size);
        for j in 0..nth {
            mat[(self.idx(0, j), self.idx(0, j))] = 1.0;
            rhs[self.idx(0, j)] = a;
            mat[(self.idx(nr - 1, j), self.idx(nr - 1, j))] = 1.0;
        }
        for i in 1..nr - 1 {
            for j in 0..nth {
                let row = self.idx(i, j);
                let r = self.radius(i, j);
                let (s_r, s_t, s_tt) = self.inverse_map(i, j);
                let r2 = r * r;
                let c_ss = s_r * s_r + s_t * s_t / r2;
                let c_s = s_r / r + s_tt / r2;
                let c_tt = 1.0 / r2;
                let c_st = 2.0 * s_t / r2;
                for k in 0..nr {
                    mat[(row, self.idx(k, j))] += c_ss * self.ds2[(i, k)] + c_s * self.ds[(i, k)];
                }
                for l in 0..nth {
                    mat[(row, self.idx(i, l))] += c_tt * self.dt2[(j, l)];
                }
                for k in 0..nr {
                    let dsk = c_st * self.ds[(i, k)];
                    if dsk == 0.0 {
                        continue;
                    }
                    for l in 0..nth {
                        mat[(row, self.idx(k, l))] += dsk * self.dt[(j, l)];
                    }
                }
                rhs[row] = -1.0;
            }
        }
        (mat, rhs)
    }

    /// Expands reduced angular samples to `nt` points on `[0, 2π)`.
    fn unfold(&self, reduced: &[f64]) -> Vec<f64> {
        let nphi = self.nt / self.fold;
        (0..self.nt)
            .map(|i| reduced[spectral::fold_index(i, nphi)])
            .collect()
    }
}

/// Builds the grid for an invariant perturbation.
pub fn build_grid(
    lambda: f64,
    perturbation: &FourierPerturbation,
    nr: usize,
    nt: usize,
) -> Result<MappedAnnulusGrid> {
    MappedAnnulusGrid::from_curves(
        lambda,
        perturbation.inner_series(),
        perturbation.outer_series(),
        nr,
        nt,
    )
}

/// A function of `θ` sampled on `nt` equispaced points, with its cosine
/// coefficients (harmonics `0..=nt/2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    pub cosine: Vec<f64>,
}

impl Trace {
    fn from_samples(values: Vec<f64>) -> Self {
        let nt = values.len();
        let theta: Vec<f64> = (0..nt).map(|i| 2.0 * PI * i as f64 / nt as f64).collect();
        let cosine = (0..=nt / 2)
            .map(|q| {
                let sum: f64 = values
                    .iter()
                    .zip(&theta)
                    .map(|(v, t)| v * (q as f64 * t).cos())
                    .sum();
                let weight = if q == 0 || 2 * q == nt { 1.0 } else { 2.0 };
                weight * sum / nt as f64
            })
            .collect();
        Self {
            theta,
            values,
            cosine,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.cosine[0]
    }

    /// Trapezoidal `∫₀^{2π} self · weight dθ`.
    pub fn integrate_against(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let h = 2.0 * PI / self.values.len() as f64;
        self.values
            .iter()
            .zip(&self.theta)
            .map(|(v, &t)| v * weight(t))
            .sum::<f64>()
            * h
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "theta,value")?;
        for (t, v) in self.theta.iter().zip(&self.values) {
            writeln!(out, "{},{}", crate::output::num(*t), crate::output::num(*v))?;
        }
        Ok(())
    }
}

/// Collocation solution of the Dirichlet problem together with the inner
/// normal derivative on both boundary curves.
#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub grid: MappedAnnulusGrid,
    pub a: f64,
    /// Nodal values, row-major in `(s, θ)`.
    pub u: Vec<f64>,
    pub inner: Trace,
    pub outer: Trace,
}

/// Solves `-Δu = 1`, `u = a` on the inner curve, `u = 0` on the outer one.
pub fn solve_dirichlet(grid: &MappedAnnulusGrid, a: f64) -> Result<DirichletSolution> {
    let (mat, rhs) = grid.assemble(a);
    let u = mat
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("Dirichlet collocation"))?;
    let u: Vec<f64> = u.iter().copied().collect();
    let nth = grid.n_theta();
    let last = grid.nr - 1;
    let mut inner = Vec::with_capacity(nth);
    let mut outer = Vec::with_capacity(nth);
    for j in 0..nth {
        let us_in: f64 = (0..grid.nr).map(|k| grid.ds[(0, k)] * u[grid.idx(k, j)]).sum();
        let us_out: f64 = (0..grid.nr).map(|k| grid.ds[(last, k)] * u[grid.idx(k, j)]).sum();
        // |∇S| on each curve; u is constant along it, so ∇u = U_s ∇S
        let stretch = |i: usize| {
            let (s_r, s_t, _) = grid.inverse_map(i, j);
            let r = grid.radius(i, j);
            (s_r * s_r + s_t * s_t / (r * r)).sqrt()
        };
        inner.push(us_in * stretch(0));
        outer.push(-us_out * stretch(last));
    }
    Ok(DirichletSolution {
        inner: Trace::from_samples(grid.unfold(&inner)),
        outer: Trace::from_samples(grid.unfold(&outer)),
        grid: grid.clone(),
        a,
        u,
    })
}

impl DirichletSolution {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.idx(i, j)]
    }

    /// `|∇u|` at every node, row-major in `(s, θ)`.
    pub fn gradient_magnitude(&self) -> Vec<f64> {
        let g = &self.grid;
        let nth = g.n_theta();
        let mut out = Vec::with_capacity(g.unknowns());
        for i in 0..g.nr {
            for j in 0..nth {
                let u_s: f64 = (0..g.nr).map(|k| g.ds[(i, k)] * self.value(k, j)).sum();
                let u_t: f64 = (0..nth).map(|l| g.dt[(j, l)] * self.value(i, l)).sum();
                let (s_r, s_t, _) = g.inverse_map(i, j);
                let r = g.radius(i, j);
                let u_r = u_s * s_r;
                let u_theta = u_s * s_t + u_t;
                out.push((u_r * u_r + u_theta * u_theta / (r * r)).sqrt());
            }
        }
        out
    }

    pub fn min_interior(&self) -> f64 {
        let nth = self.grid.n_theta();
        (1..self.grid.nr - 1)
            .flat_map(|i| (0..nth).map(move |j| (i, j)))
            .map(|(i, j)| self.value(i, j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Max-norm of the collocation residual at interior nodes relative to
    /// the right-hand side.
    pub fn discrete_residual(&self) -> f64 {
        let (mat, rhs) = self.grid.assemble(self.a);
        let u = DVector::from_column_slice(&self.u);
        let res = &mat * &u - &rhs;
        res.amax() / rhs.amax().max(1.0)
    }

    /// Mean of both normal-derivative traces over the equispaced angles.
    ///
    /// Unlike the arc-length mean this is not fixed by the divergence
    /// theorem, so it only matches `|Ω|/P` when the traces are constant.
    pub fn pooled_neumann_mean(&self) -> f64 {
        let all: Vec<f64> = self.inner.values.iter().chain(&self.outer.values).copied().collect();
        all.iter().sum::<f64>() / all.len() as f64
    }

    /// Arc-length weighted mean of the normal derivative over both curves;
    /// equals `|Ω|/P` up to discretization error for any domain.
    pub fn flux_mean(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (trace, series, sign, base) in [
            (&self.inner, &self.grid.inner, 1.0, self.grid.lambda),
            (&self.outer, &self.grid.outer, -1.0, 1.0),
        ] {
            for (v, &t) in trace.values.iter().zip(&trace.theta) {
                let (w, wt, _) = series.eval3(t);
                let r = base + sign * w;
                let ds = r.hypot(wt);
                num += v * ds;
                den += ds;
            }
        }
        num / den
    }

    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            lambda: self.grid.lambda,
            nr: self.grid.nr,
            nt: self.grid.nt,
            fold: self.grid.fold,
            inner_perturbation: self.grid.inner.coeffs.clone(),
            outer_perturbation: self.grid.outer.coeffs.clone(),
            a: self.a,
            inner_trace_cosine: self.inner.cosine.clone(),
            outer_trace_cosine: self.outer.cosine.clone(),
            min_interior_u: self.min_interior(),
        }
    }
}

/// Grid metadata and coefficient arrays of a solve, for JSON export.
/// Perturbation arrays are indexed by harmonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub lambda: f64,
    pub nr: usize,
    pub nt: usize,
    pub fold: usize,
    pub inner_perturbation: Vec<f64>,
    pub outer_perturbation: Vec<f64>,
    pub a: f64,
    pub inner_trace_cosine: Vec<f64>,
    pub outer_trace_cosine: Vec<f64>,
    pub min_interior_u: f64,
}

/// Inner normal derivative traces `(inner curve, outer curve)`.
pub fn normal_derivative_traces(sol: &DirichletSolution) -> (Trace, Trace) {
    (sol.inner.clone(), sol.outer.clone())
}

/// Normalized Neumann mismatch `((∂_ν u - c_λ)/c_λ)` on both curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FResidual {
    pub f1: Trace,
    pub f2: Trace,
}

impl FResidual {
    pub fn sup_norm(&self) -> f64 {
        self.f1.sup_norm().max(self.f2.sup_norm())
    }
}

pub(crate) fn residual_from(sol: &DirichletSolution, c: f64) -> FResidual {
    let map = |t: &Trace| Trace::from_samples(t.values.iter().map(|v| (v - c) / c).collect());
    FResidual {
        f1: map(&sol.inner),
        f2: map(&sol.outer),
    }
}

pub(crate) fn evaluate_curves(
    lambda: f64,
    inner: CosineSeries,
    outer: CosineSeries,
    nr: usize,
    nt: usize,
) -> Result<(FResidual, DirichletSolution)> {
    let grid = MappedAnnulusGrid::from_curves(lambda, inner, outer, nr, nt)?;
    let radial = RadialSolution::new(ProblemParams::new(2, lambda)?);
    let sol = solve_dirichlet(&grid, radial.a)?;
    Ok((residual_from(&sol, radial.c), sol))
}

/// `F_λ(v)`: Dirichlet value `a_λ` on the inner curve, Neumann traces
/// normalized by `c_λ`.
pub fn evaluate_f(
    lambda: f64,
    perturbation: &FourierPerturbation,
    nr: usize,
    nt: usize,
) -> Result<FResidual> {
    Ok(evaluate_curves(
        lambda,
        perturbation.inner_series(),
        perturbation.outer_series(),
        nr,
        nt,
    )?
    .0)
}

/// Unit-norm circular harmonic `cos(mθ)/√π` (`1/√(2π)` for `m = 0`).
pub fn unit_harmonic_amplitude(m: usize) -> f64 {
    if m == 0 {
        1.0 / (2.0 * PI).sqrt()
    } else {
        1.0 / PI.sqrt()
    }
}

/// Finite-difference linearization of `F_λ` on one harmonic subspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationFd {
    /// Matrix in the basis `e₁ = (λ^(-1/2) Y_m, 0)`, `e₂ = (0, Y_m)`.
    pub matrix: [[f64; 2]; 2],
    /// Largest relative Fourier content of the directional derivatives
    /// outside harmonic `m`.
    pub leakage: f64,
}

/// Central differences of `F_λ` in the directions `e₁`, `e₂` of harmonic `m`,
/// projected back with the weighted inner product `λ∫w₁z₁ + ∫w₂z₂`.
pub fn linearization_fd(lambda: f64, m: usize, h: f64, nr: usize, nt: usize) -> Result<LinearizationFd> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h = {h} must be > 0")));
    }
    if m > nt / 4 {
        return Err(Error::InvalidArgument(format!("harmonic {m} not resolved by Nt = {nt}")));
    }
    let y = unit_harmonic_amplitude(m);
    let e1 = CosineSeries::single(m, y / lambda.sqrt());
    let e2 = CosineSeries::single(m, y);
    let zero = CosineSeries::default();
    let runs: Vec<(usize, f64)> = vec![(0, h), (0, -h), (1, h), (1, -h)];
    let results: Vec<Result<FResidual>> = runs
        .par_iter()
        .map(|&(dir, step)| {
            let (inner, outer) = if dir == 0 {
                (zero.add(&e1, step), zero.clone())
            } else {
                (zero.clone(), zero.add(&e2, step))
            };
            Ok(evaluate_curves(lambda, inner, outer, nr, nt)?.0)
        })
        .collect();
    let results: Vec<FResidual> = results.into_iter().collect::<Result<_>>()?;

    let mf = m as f64;
    let mut matrix = [[0.0; 2]; 2];
    let mut leakage: f64 = 0.0;
    for dir in 0..2 {
        let (plus, minus) = (&results[2 * dir], &results[2 * dir + 1]);
        let diff = |a: &Trace, b: &Trace| {
            Trace::from_samples(
                a.values
                    .iter()
                    .zip(&b.values)
                    .map(|(p, q)| (p - q) / (2.0 * h))
                    .collect(),
            )
        };
        let d1 = diff(&plus.f1, &minus.f1);
        let d2 = diff(&plus.f2, &minus.f2);
        let basis = |t: f64| y * (mf * t).cos();
        matrix[0][dir] = lambda * d1.integrate_against(basis) / lambda.sqrt();
        matrix[1][dir] = d2.integrate_against(basis);
        for tr in [&d1, &d2] {
            let total: f64 = tr.cosine.iter().map(|c| c * c).sum::<f64>().sqrt();
            let off: f64 = tr
                .cosine
                .iter()
                .enumerate()
                .filter(|(q, _)| *q != m)
                .map(|(_, c)| c * c)
                .sum::<f64>()
                .sqrt();
            if total > 0.0 {
                leakage = leakage.max(off / total);
            }
        }
    }
    Ok(LinearizationFd { matrix, leakage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::u_radial;

    fn trivial(lambda: f64, nr: usize, nt: usize) -> DirichletSolution {
        let grid = build_grid(lambda, &FourierPerturbation::zero(1), nr, nt).unwrap();
        let a = RadialSolution::new(ProblemParams::new(2, lambda).unwrap()).a;
        solve_dirichlet(&grid, a).unwrap()
    }

    fn max_error(sol: &DirichletSolution) -> f64 {
        let p = ProblemParams::new(2, sol.grid.lambda).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..sol.grid.nr {
            for j in 0..sol.grid.n_theta() {
                let r = sol.grid.radius(i, j).clamp(p.lambda(), 1.0);
                err = err.max((sol.value(i, j) - u_radial(p, r).unwrap()).abs());
            }
        }
        err
    }

    #[test]
    fn zero_perturbation_map_is_radial() {
        let grid = build_grid(0.5, &FourierPerturbation::zero(3), 10, 16).unwrap();
        for i in 0..grid.nr {
            let r0 = grid.radius(i, 0);
            assert!((r0 - (0.5 + 0.5 * grid.s[i])).abs() < 1e-15);
            for j in 0..grid.n_theta() {
                assert_eq!(grid.radius(i, j), r0);
            }
        }
    }

    #[test]
    fn inner_curve_range() {
        let v = FourierPerturbation::new(vec![0.0, 0.1], vec![0.0]);
        let grid = build_grid(0.5, &v, 8, 64).unwrap();
        let radii: Vec<f64> = (0..grid.n_theta()).map(|j| grid.boundary_radii(j).0).collect();
        let lo = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo - 0.4).abs() < 1e-14 && (hi - 0.6).abs() < 1e-14);
        assert!(grid.theta.iter().all(|t| *t <= PI / 2.0 + 1e-15));
    }

    #[test]
    fn crossing_curves_rejected() {
        let v = FourierPerturbation::new(vec![0.6], vec![0.0]);
        assert!(matches!(build_grid(0.5, &v, 8, 16), Err(Error::Inadmissible(_))));
        let v = FourierPerturbation::new(vec![-0.1, 0.45], vec![0.0]);
        assert!(matches!(build_grid(0.5, &v, 8, 16), Err(Error::Inadmissible(_))));
        assert!(build_grid(0.5, &FourierPerturbation::zero(1), 6, 16).is_err());
        assert!(build_grid(0.5, &FourierPerturbation::zero(1), 8, 15).is_err());
    }

    #[test]
    fn trivial_annulus_matches_closed_form() {
        let sol = trivial(0.5, 32, 64);
        assert!(max_error(&sol) < 1e-8);
        let c = 0.25;
        for tr in [&sol.inner, &sol.outer] {
            assert!(tr.values.iter().all(|v| (v - c).abs() < 1e-8));
            assert_eq!(tr.values.len(), 64);
        }
        assert!(sol.min_interior() > 0.0);
        assert!(sol.discrete_residual() < 1e-10);
    }

    #[test]
    fn spectral_convergence_on_trivial_annulus() {
        let coarse = max_error(&trivial(0.3, 8, 8));
        let fine = max_error(&trivial(0.3, 16, 16));
        assert!(fine < 1e-10 || coarse > 1e3 * fine, "{coarse} {fine}");
        assert!(max_error(&trivial(0.3, 32, 32)) < 1e-10);
    }

    #[test]
    fn f_vanishes_at_zero() {
        let f = evaluate_f(0.5, &FourierPerturbation::zero(2), 32, 64).unwrap();
        assert!(f.sup_norm() < 1e-8);
    }

    #[test]
    fn perturbed_traces_are_even_and_pi_periodic() {
        let v = FourierPerturbation::new(vec![0.0, 0.01], vec![0.0, 0.0, 0.003]);
        let f = evaluate_f(0.5, &v, 24, 64).unwrap();
        let nt = f.f1.values.len();
        for tr in [&f.f1, &f.f2] {
            for i in 0..nt {
                let mirror = (nt - i) % nt;
                let shift = (i + nt / 2) % nt;
                assert!((tr.values[i] - tr.values[mirror]).abs() < 1e-14);
                assert!((tr.values[i] - tr.values[shift]).abs() < 1e-14);
            }
            let spread = tr.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - tr.values.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(spread > 1e-4);
        }
    }

    #[test]
    fn fold_does_not_change_the_solution() {
        // same domain, solved with fold 2 and with a full-circle grid
        let inner = CosineSeries::single(2, 0.02);
        let outer = CosineSeries::single(4, 0.01);
        let folded = MappedAnnulusGrid::from_curves(0.45, inner.clone(), outer.clone(), 20, 32).unwrap();
        let full = MappedAnnulusGrid::with_fold(0.45, inner, outer, 20, 32, Some(1)).unwrap();
        assert_eq!((folded.fold, full.fold), (2, 1));
        let a = solve_dirichlet(&folded, 0.01).unwrap();
        let b = solve_dirichlet(&full, 0.01).unwrap();
        for (x, y) in a.inner.values.iter().zip(&b.inner.values) {
            assert!((x - y).abs() < 1e-11);
        }
        for (x, y) in a.outer.values.iter().zip(&b.outer.values) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn pooled_mean_satisfies_divergence_identity() {
        // ∮ ∂_ν u ds = |Ω| for -Δu = 1 with the inner normal
        let v = FourierPerturbation::new(vec![0.01, 0.02], vec![0.0, -0.01, 0.005]);
        let grid = build_grid(0.4, &v, 28, 64).unwrap();
        let sol = solve_dirichlet(&grid, 0.02).unwrap();
        let c = sol.flux_mean();
        let geo = crate::cheeger::perimeter_area(0.4, &v).unwrap();
        assert!((c * geo.perimeter - geo.area).abs() < 1e-9);
    }

    #[test]
    fn linearization_degree_two() {
        let params = ProblemParams::new(2, 0.5).unwrap();
        let exact = crate::modes::mode_matrix(params, 2.0).unwrap().entries();
        let fd = linearization_fd(0.5, 2, 1e-5, 24, 64).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let rel = (fd.matrix[i][j] - exact[i][j]).abs() / exact[i][j].abs();
                assert!(rel < 1e-4, "({i},{j}) {} vs {}", fd.matrix[i][j], exact[i][j]);
            }
        }
        assert!((fd.matrix[0][1] - fd.matrix[1][0]).abs() < 1e-4);
        assert!(fd.leakage < 1e-6);
    }

    #[test]
    fn linearization_translation_mode() {
        let fd = linearization_fd(0.5, 1, 1e-5, 20, 32).unwrap();
        let m = fd.matrix;
        let e = crate::modes::eigen_symmetric(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
        assert!((e.mu1 + 4.0).abs() < 1e-4);
        assert!(e.mu2.abs() < 1e-4);
    }
}
