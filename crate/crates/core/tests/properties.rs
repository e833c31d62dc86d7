use proptest::prelude::*;
use serrin_annulus::annulus::FourierPerturbation;
use serrin_annulus::cheeger::perimeter_area;
use serrin_annulus::modes::{eigen_closed_form, eigen_direct, mode_matrix, mode_matrix_via_profiles};
use serrin_annulus::radial::{u_radial_derivs, RadialSolution};
use serrin_annulus::{u_radial, ProblemParams};

proptest! {
    #[test]
    fn radial_solution_is_positive_inside(n in 2u32..8, lambda in 0.01f64..0.99, t in 0.01f64..0.99) {
        let p = ProblemParams::new(n, lambda).unwrap();
        let r = lambda + t * (1.0 - lambda);
        prop_assert!(u_radial(p, r).unwrap() > 0.0);
        let rad = RadialSolution::new(p);
        prop_assert!((u_radial(p, lambda).unwrap() - rad.a).abs() < 1e-14);
        prop_assert!(u_radial(p, 1.0).unwrap().abs() < 1e-15);
        let (du_in, _) = u_radial_derivs(p, lambda).unwrap();
        let (du_out, _) = u_radial_derivs(p, 1.0).unwrap();
        prop_assert!((du_in - rad.c).abs() < 1e-13 && (du_out + rad.c).abs() < 1e-13);
    }

    #[test]
    fn closed_form_matches_direct(n in 2u32..7, lambda in 0.02f64..0.98, k in 0.0f64..60.0) {
        let p = ProblemParams::new(n, lambda).unwrap();
        let m = mode_matrix(p, k).unwrap();
        let a = eigen_closed_form(p, k).unwrap();
        let b = eigen_direct(&m);
        let scale = 1.0 + b.mu1.abs().max(b.mu2.abs());
        prop_assert!((a.mu1 - b.mu1).abs() < 1e-11 * scale);
        prop_assert!((a.mu2 - b.mu2).abs() < 1e-11 * scale);
        let via = mode_matrix_via_profiles(p, k).unwrap();
        for (x, y) in m.entries().iter().flatten().zip(via.entries().iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-11 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn eigenvalues_increase_with_degree(n in 2u32..6, lambda in 0.02f64..0.98, k in 0.0f64..40.0) {
        let p = ProblemParams::new(n, lambda).unwrap();
        let lo = eigen_closed_form(p, k).unwrap();
        let hi = eigen_closed_form(p, k + 0.5).unwrap();
        prop_assert!(hi.mu1 > lo.mu1 && hi.mu2 > lo.mu2);
    }

    #[test]
    fn mean_zero_perturbations_shrink_area(lambda in 0.1f64..0.6, eps in -0.05f64..0.05, j in 1usize..6) {
        let mut c1 = vec![0.0; j + 1];
        c1[j] = eps;
        let v = FourierPerturbation::new(c1, vec![0.0]);
        let geo = perimeter_area(lambda, &v).unwrap();
        let exact = std::f64::consts::PI * (1.0 - lambda * lambda - eps * eps / 2.0);
        prop_assert!((geo.area - exact).abs() < 1e-12);
        prop_assert!(geo.perimeter >= 2.0 * std::f64::consts::PI * (1.0 + lambda) - 1e-12);
    }
}
