//! Perimeter and area of perturbed planar annuli, the self-Cheeger ratio
//! `P(Ω)/|Ω| = 1/c` and the interior gradient bound `|∇u| < c`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::annulus::{DirichletSolution, FourierPerturbation};
use crate::continuation::BranchPoint;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainGeometry {
    pub perimeter: f64,
    pub area: f64,
    pub inner_length: f64,
    pub outer_length: f64,
}

/// Trapezoidal quadrature over `θ`; exponentially accurate for smooth
/// periodic integrands.
pub fn perimeter_area_with(lambda: f64, v: &FourierPerturbation, nodes: usize) -> Result<DomainGeometry> {
    v.check_admissible(lambda)?;
    let (inner, outer) = (v.inner_series(), v.outer_series());
    let h = 2.0 * PI / nodes as f64;
    let mut geo = DomainGeometry {
        perimeter: 0.0,
        area: 0.0,
        inner_length: 0.0,
        outer_length: 0.0,
    };
    for i in 0..nodes {
        let t = i as f64 * h;
        let (v1, v1t, _) = inner.eval3(t);
        let (v2, v2t, _) = outer.eval3(t);
        let (r_in, r_out) = (lambda + v1, 1.0 - v2);
        geo.inner_length += r_in.hypot(v1t) * h;
        geo.outer_length += r_out.hypot(v2t) * h;
        geo.area += 0.5 * (r_out * r_out - r_in * r_in) * h;
    }
    geo.perimeter = geo.inner_length + geo.outer_length;
    Ok(geo)
}

pub fn perimeter_area(lambda: f64, v: &FourierPerturbation) -> Result<DomainGeometry> {
    let harmonics = 2 * v.coeffs1.len().max(v.coeffs2.len());
    perimeter_area_with(lambda, v, (16 * harmonics).max(256))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub grad_max_interior: f64,
    pub grad_max_boundary: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Largest `|∇u|` over interior and boundary collocation nodes; `ok` iff the
/// interior maximum stays strictly below `c`.
pub fn gradient_bound_check(sol: &DirichletSolution, c: f64) -> GradientReport {
    let grad = sol.gradient_magnitude();
    let nth = sol.grid.n_theta();
    let last = sol.grid.nr - 1;
    let mut interior: f64 = 0.0;
    let mut boundary: f64 = 0.0;
    for (idx, g) in grad.iter().enumerate() {
        let i = idx / nth;
        if i == 0 || i == last {
            boundary = boundary.max(*g);
        } else {
            interior = interior.max(*g);
        }
    }
    GradientReport {
        grad_max_interior: interior,
        grad_max_boundary: boundary,
        bound: c,
        ok: interior < c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheegerReport {
    pub perimeter: f64,
    pub area: f64,
    pub ratio: f64,
    pub inv_c: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub grad_max_interior: f64,
    pub grad_bound_ok: bool,
}

impl CheegerReport {
    pub fn assemble(geo: &DomainGeometry, c: f64, grad: &GradientReport) -> Self {
        let ratio = geo.perimeter / geo.area;
        let inv_c = 1.0 / c;
        let gap_abs = (ratio - inv_c).abs();
        Self {
            perimeter: geo.perimeter,
            area: geo.area,
            ratio,
            inv_c,
            gap_abs,
            gap_rel: gap_abs / inv_c,
            grad_max_interior: grad.grad_max_interior,
            grad_bound_ok: grad.ok,
        }
    }

    /// `||Ω| - c·P(Ω)|`
    pub fn divergence_gap(&self) -> f64 {
        (self.area - self.perimeter / self.inv_c).abs()
    }
}

/// Ratio and gradient checks for the domain of a branch point, using its
/// measured Neumann constant.
pub fn cheeger_report(point: &BranchPoint) -> Result<CheegerReport> {
    let geo = perimeter_area(point.lambda_s, &point.v)?;
    let sol = point.solve()?;
    let grad = gradient_bound_check(&sol, point.neumann_constant);
    Ok(CheegerReport::assemble(&geo, point.neumann_constant, &grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circles() {
        let g = perimeter_area(0.5, &FourierPerturbation::zero(3)).unwrap();
        assert!((g.perimeter - 3.0 * PI).abs() < 1e-12);
        assert!((g.area - 0.75 * PI).abs() < 1e-12);
        assert!((g.inner_length - PI).abs() < 1e-12);
    }

    #[test]
    fn mean_zero_perturbation_changes_area_quadratically() {
        let area = |eps: f64| {
            perimeter_area(0.5, &FourierPerturbation::new(vec![0.0, eps], vec![0.0]))
                .unwrap()
                .area
        };
        let base = 0.75 * PI;
        let (d1, d2) = (base - area(1e-2), base - area(2e-2));
        // -½∮(2λv + v²) = -π ε²/2 exactly
        assert!((d1 - PI * 1e-4 / 2.0).abs() < 1e-14);
        assert!((d2 / d1 - 4.0).abs() < 1e-9);
    }

    #[test]
    fn quadrature_is_converged_at_256_nodes() {
        let v = FourierPerturbation::new(vec![0.01, 0.03, -0.004], vec![0.0, 0.02, 0.0, 0.001]);
        let a = perimeter_area_with(0.4, &v, 256).unwrap();
        let b = perimeter_area_with(0.4, &v, 1024).unwrap();
        assert!((a.perimeter - b.perimeter).abs() < 1e-12 * b.perimeter);
        assert!((a.area - b.area).abs() < 1e-12 * b.area);
    }

    #[test]
    fn trivial_annulus_is_self_cheeger() {
        use crate::radial::{ProblemParams, RadialSolution};
        for lambda in [0.2, 0.5, 0.8] {
            let rad = RadialSolution::new(ProblemParams::new(2, lambda).unwrap());
            let geo = perimeter_area(lambda, &FourierPerturbation::zero(1)).unwrap();
            let grid = crate::annulus::build_grid(lambda, &FourierPerturbation::zero(1), 24, 16).unwrap();
            let sol = crate::annulus::solve_dirichlet(&grid, rad.a).unwrap();
            let grad = gradient_bound_check(&sol, rad.c);
            let rep = CheegerReport::assemble(&geo, rad.c, &grad);
            assert!((rep.ratio - 2.0 / (1.0 - lambda)).abs() < 1e-12);
            assert!(rep.gap_abs < 1e-12);
            assert!(rep.divergence_gap() < 1e-12);
            assert!(rep.grad_bound_ok);
            assert!((grad.grad_max_boundary - rad.c).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_inadmissible() {
        assert!(perimeter_area(0.5, &FourierPerturbation::new(vec![0.6], vec![])).is_err());
    }
}
