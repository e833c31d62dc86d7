//! Chebyshev and Fourier collocation differentiation matrices.

use std::f64::consts::PI;

use nalgebra::DMatrix;

/// Chebyshev–Gauss–Lobatto points `x_j = cos(πj/(n-1))` on `[-1, 1]`
/// (descending) and the first-derivative matrix.
pub fn chebyshev(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    assert!(n >= 2);
    let deg = (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|j| (PI * j as f64 / deg).cos()).collect();
    let weight = |i: usize| {
        let c = if i == 0 || i == n - 1 { 2.0 } else { 1.0 };
        if i % 2 == 0 {
            c
        } else {
            -c
        }
    };
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = weight(i) / weight(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        // negative-sum trick: exact differentiation of constants
        d[(i, i)] = -row_sum;
    }
    (x, d)
}

/// First and second Fourier differentiation matrices on `n` (even)
/// equispaced points of `[0, 2π)`.
pub fn fourier(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    assert!(n >= 2 && n % 2 == 0);
    let h = 2.0 * PI / n as f64;
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                d2[(i, j)] = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;
                continue;
            }
            let diff = i as isize - j as isize;
            let sign = if diff.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let half = diff as f64 * h / 2.0;
            d1[(i, j)] = 0.5 * sign / half.tan();
            d2[(i, j)] = -0.5 * sign / (half.sin() * half.sin());
        }
    }
    (d1, d2)
}

/// Index of the node `j` of an `n`-point periodic grid on the even half
/// `0..=n/2`.
pub fn fold_index(j: usize, n: usize) -> usize {
    let j = j % n;
    if j > n / 2 {
        n - j
    } else {
        j
    }
}

/// Restricts a periodic differentiation matrix to functions even about
/// `θ = 0`: rows and columns `0..=n/2`, with mirrored columns summed.
pub fn fold_even(d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let m = n / 2 + 1;
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..n {
            out[(i, fold_index(j, n))] += d[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_differentiates_polynomials_exactly() {
        let (x, d) = chebyshev(12);
        let f: Vec<f64> = x.iter().map(|&t| t.powi(5) - 2.0 * t * t + 3.0).collect();
        for i in 0..12 {
            let df: f64 = (0..12).map(|j| d[(i, j)] * f[j]).sum();
            let exact = 5.0 * x[i].powi(4) - 4.0 * x[i];
            assert!((df - exact).abs() < 1e-11, "{i}: {df} vs {exact}");
        }
    }

    #[test]
    fn folded_fourier_matches_full_on_cosines() {
        let n = 16;
        let (d1, d2) = fourier(n);
        let (f1, f2) = (fold_even(&d1), fold_even(&d2));
        let theta = |j: usize| 2.0 * PI * j as f64 / n as f64;
        let half: Vec<f64> = (0..=n / 2).map(|j| (3.0 * theta(j)).cos() + 0.5).collect();
        for i in 0..=n / 2 {
            let a: f64 = (0..=n / 2).map(|j| f1[(i, j)] * half[j]).sum();
            let b: f64 = (0..=n / 2).map(|j| f2[(i, j)] * half[j]).sum();
            assert!((a + 3.0 * (3.0 * theta(i)).sin()).abs() < 1e-12);
            assert!((b + 9.0 * (3.0 * theta(i)).cos()).abs() < 1e-11);
        }
    }
}
