//! Bifurcation values `λ*_m`, where the first eigenvalue branch of degree
//! `m ≥ 2` crosses zero, and the degree map for the reflection group
//! `O(n-1) × Z₂`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::eigen_closed_form;
use crate::radial::{ProblemParams, LAMBDA_MAX, LAMBDA_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationValue {
    pub n: u32,
    pub degree: u32,
    pub lambda_star: f64,
    /// `|μ_{m,1}(λ*)|`
    pub residual: f64,
}

pub(crate) fn first_eigenvalue(n: u32, degree: u32, lambda: f64) -> Result<f64> {
    Ok(eigen_closed_form(ProblemParams::new(n, lambda)?, f64::from(degree))?.mu1)
}

/// Bisection for the unique zero of `λ ↦ μ_{m,1}(λ)` on
/// `[LAMBDA_MIN, LAMBDA_MAX]`.
///
/// The branch is strictly decreasing, positive near 0 and unbounded below
/// near 1, so the bracket is validated once and then halved down to
/// floating-point resolution.
pub fn find_lambda_star(n: u32, degree: u32, tol: f64) -> Result<BifurcationValue> {
    if degree < 2 {
        return Err(Error::InvalidArgument(format!(
            "bifurcation degree must be >= 2, got {degree}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let f = |l: f64| first_eigenvalue(n, degree, l);
    let (mut lo, mut hi) = (LAMBDA_MIN, LAMBDA_MAX);
    let (mut f_lo, mut f_hi) = (f(lo)?, f(hi)?);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoSignChange {
            n,
            m: degree,
            lo,
            hi,
        });
    }
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || iterations >= 200 {
            break;
        }
        iterations += 1;
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            f_lo = 0.0;
            f_hi = 0.0;
            break;
        }
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let (lambda_star, residual) = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo.abs())
    } else {
        (hi, f_hi.abs())
    };
    if hi - lo >= tol || residual >= tol {
        return Err(Error::NotConverged {
            what: "bisection",
            iterations,
            residual,
        });
    }
    Ok(BifurcationValue {
        n,
        degree,
        lambda_star,
        residual,
    })
}

/// Degree `i_k` of the `k`-th invariant harmonic for `G = O(n-1) × Z₂`.
///
/// The invariant harmonics are the even zonal ones (in the plane:
/// `cos 2kθ`), so `i_k = 2k` in every dimension. `i_0 = 0`, and `i_1 = 2`
/// excludes the translation modes of degree 1.
pub fn g_invariant_degree(_n: u32, k: u32) -> u32 {
    2 * k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub n: u32,
    pub k: u32,
    pub i_k: u32,
    pub lambda_star: f64,
    pub residual: f64,
}

/// `λ_k = λ*_{i_k}` for `k = 1..=k_max`.
pub fn bifurcation_table(n: u32, k_max: u32, tol: f64) -> Result<Vec<BifurcationRow>> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    (1..=k_max)
        .map(|k| {
            let i_k = g_invariant_degree(n, k);
            let b = find_lambda_star(n, i_k, tol)?;
            Ok(BifurcationRow {
                n,
                k,
                i_k,
                lambda_star: b.lambda_star,
                residual: b.residual,
            })
        })
        .collect()
}

pub fn write_bifurcation_csv<W: Write>(rows: &[BifurcationRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,k,i_k,lambda_star,residual")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            r.k,
            r.i_k,
            crate::output::num(r.lambda_star),
            crate::output::num(r.residual)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{eigen_direct, mode_matrix};

    #[test]
    fn degree_two_in_the_plane() {
        assert!(first_eigenvalue(2, 2, 0.25).unwrap() > 0.0);
        assert!(first_eigenvalue(2, 2, 0.30).unwrap() < 0.0);
        let b = find_lambda_star(2, 2, 1e-12).unwrap();
        assert!(b.lambda_star > 0.25 && b.lambda_star < 0.30);
        assert!(b.residual < 1e-12);
        // cross-check with the generic eigensolver
        let m = mode_matrix(ProblemParams::new(2, b.lambda_star).unwrap(), 2.0).unwrap();
        assert!(eigen_direct(&m).mu1.abs() < 1e-10);
        // 2 - √3, confirmed independently with a root finder
        assert!((b.lambda_star - (2.0 - 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn roots_increase_with_degree() {
        for n in 2..=5 {
            let mut prev = 0.0;
            for m in 2..=40 {
                let b = find_lambda_star(n, m, 1e-12).unwrap();
                assert!(b.lambda_star > prev, "n={n} m={m}");
                assert!(b.residual < 1e-12);
                prev = b.lambda_star;
            }
        }
    }

    #[test]
    fn small_lambda_limit_is_positive() {
        for n in 2..=5 {
            let mu = first_eigenvalue(n, 2, LAMBDA_MIN).unwrap();
            assert!((mu - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn single_sign_change() {
        for n in 2..=5 {
            for m in 2..=10 {
                let values: Vec<f64> = (1..=200)
                    .map(|i| first_eigenvalue(n, m, f64::from(i) / 201.0).unwrap())
                    .collect();
                let changes = values.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
                assert_eq!(changes, 1, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn invariant_degrees() {
        assert_eq!(g_invariant_degree(2, 1), 2);
        assert_eq!(g_invariant_degree(2, 3), 6);
        assert_eq!(g_invariant_degree(5, 2), 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(find_lambda_star(2, 1, 1e-12).is_err());
        assert!(find_lambda_star(2, 2, 0.0).is_err());
        assert!(bifurcation_table(2, 0, 1e-12).is_err());
    }

    #[test]
    fn table_is_increasing() {
        let rows = bifurcation_table(2, 5, 1e-12).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.windows(2).all(|w| w[1].lambda_star > w[0].lambda_star));
        assert!(rows.iter().all(|r| r.residual < 1e-12));
        let rows = bifurcation_table(3, 10, 1e-12).unwrap();
        assert!(rows[9].lambda_star > rows[0].lambda_star);
    }
}
