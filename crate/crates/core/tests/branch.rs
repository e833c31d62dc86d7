use serrin_annulus::bifurcation::find_lambda_star;
use serrin_annulus::cheeger::cheeger_report;
use serrin_annulus::continuation::{
    continue_branch, newton_solve_branch_point, tangent_vector, NewtonOptions, Tangent,
};

fn tangent(mode: u32) -> Tangent {
    let star = find_lambda_star(2, mode, 1e-13).unwrap().lambda_star;
    tangent_vector(2, star, mode).unwrap()
}

#[test]
fn branch_is_tangent_to_the_kernel() {
    let trace = continue_branch(tangent(2), &[0.005, 0.01, 0.02], &NewtonOptions::default());
    assert!(trace.failure.is_none());
    let norms: Vec<f64> = trace.points.iter().map(|p| p.w_norm()).collect();
    assert!(norms[0] < norms[1] && norms[1] < norms[2], "{norms:?}");
    for p in &trace.points {
        assert!(p.orthogonality().abs() < 1e-10);
    }
}

#[test]
fn correction_decays_with_mode_index() {
    let p = newton_solve_branch_point(tangent(2), 0.02, None, &NewtonOptions::default()).unwrap();
    let size = |j: usize| p.w.coeffs1[j].abs().max(p.w.coeffs2[j].abs());
    assert!(size(2) > size(4) && size(4) > size(6));
}

#[test]
fn truncation_is_converged_in_modes() {
    let base = NewtonOptions::default();
    let coarse = newton_solve_branch_point(tangent(2), 0.01, None, &base).unwrap();
    let fine = newton_solve_branch_point(tangent(2), 0.01, None, &NewtonOptions { modes: 16, ..base }).unwrap();
    assert!((coarse.lambda_s - fine.lambda_s).abs() < 1e-9);
    for j in 0..=8 {
        assert!((coarse.v.coeffs1[j] - fine.v.coeffs1[j]).abs() < 1e-9);
        assert!((coarse.v.coeffs2[j] - fine.v.coeffs2[j]).abs() < 1e-9);
    }
}

#[test]
fn cheeger_gap_tightens_with_tolerance() {
    let gap = |tol: f64| {
        let opts = NewtonOptions { tol, ..NewtonOptions::default() };
        let p = newton_solve_branch_point(tangent(2), 0.01, None, &opts).unwrap();
        (cheeger_report(&p).unwrap().gap_abs, p.iterations)
    };
    // one quadratic Newton step can satisfy both 1e-6 and 1e-9 at once
    let (g6, _) = gap(1e-6);
    let (g9, _) = gap(1e-9);
    assert!(g9 <= g6, "{g9} vs {g6}");
    let (g4, it4) = gap(1e-4);
    let (g10, it10) = gap(1e-10);
    assert!(it10 > it4);
    assert!(g10 < g4, "{g10} vs {g4}");
}

#[test]
fn higher_mode_branch_converges() {
    let trace = continue_branch(tangent(4), &[0.005, -0.005], &NewtonOptions::default());
    assert!(trace.failure.is_none(), "{:?}", trace.failure);
    for p in &trace.points {
        assert!(p.residual_sup < 1e-8);
    }
}
