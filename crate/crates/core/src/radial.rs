//! Radial solutions of `-Δu = 1` on the standard annulus `λ < |x| < 1`.
//!
//! For every inner radius there is exactly one pair `(a, c)` such that the
//! radial solution with `u = 0` on the outer sphere and `u = a` on the inner
//! sphere has the same inner normal derivative `c` on both spheres. The
//! profile is non-monotone: it rises from the inner sphere and falls to zero
//! at the outer one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest inner radius accepted by public entry points.
pub const LAMBDA_MIN: f64 = 1e-6;
/// Largest inner radius accepted by public entry points.
pub const LAMBDA_MAX: f64 = 1.0 - 1e-6;

/// Ambient dimension and inner radius of the reference annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    n: u32,
    lambda: f64,
}

impl ProblemParams {
    pub fn new(n: u32, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        if !(LAMBDA_MIN..=LAMBDA_MAX).contains(&lambda) {
            return Err(Error::InnerRadius(lambda));
        }
        Ok(Self { n, lambda })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub(crate) fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r.is_nan() || r < self.lambda || r > 1.0 {
            return Err(Error::RadiusOutOfRange {
                r,
                lambda: self.lambda,
            });
        }
        Ok(())
    }
}

/// The radial solution `u_λ` together with its boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub params: ProblemParams,
    /// Dirichlet value on the inner sphere.
    pub a: f64,
    /// Common inner normal derivative on both spheres.
    pub c: f64,
}

impl RadialSolution {
    pub fn new(params: ProblemParams) -> Self {
        let (a, c) = data(params);
        Self { params, a, c }
    }

    /// Integration constant in `u'(r) = C / r^(n-1) - r / n`.
    pub fn flux_constant(&self) -> f64 {
        let n = self.params.nf();
        let l = self.params.lambda;
        (1.0 + l) / (n * (1.0 + l.powf(1.0 - n)))
    }

    pub fn u(&self, r: f64) -> Result<f64> {
        self.params.check_radius(r)?;
        Ok(profile(self.params, r))
    }

    /// First and second radial derivatives at `r`.
    pub fn derivs(&self, r: f64) -> Result<(f64, f64)> {
        self.params.check_radius(r)?;
        let n = self.params.nf();
        let du = self.flux_constant() / r.powf(n - 1.0) - r / n;
        let d2u = -1.0 - (n - 1.0) * du / r;
        Ok((du, d2u))
    }
}

fn data(params: ProblemParams) -> (f64, f64) {
    let l = params.lambda;
    let c = (1.0 - l.powi(params.n as i32)) / (params.nf() * (1.0 + l.powi(params.n as i32 - 1)));
    let a = if params.n == 2 {
        0.5 * l * l.ln() + 0.25 * (1.0 - l * l)
    } else {
        let n = params.nf();
        l * (l.powf(n - 2.0) - 1.0) / (n - 2.0) * (1.0 + l) / (1.0 + l.powf(n - 1.0)) / n
            + (1.0 - l * l) / (2.0 * n)
    };
    (a, c)
}

fn profile(params: ProblemParams, r: f64) -> f64 {
    let l = params.lambda;
    if params.n == 2 {
        0.5 * l * r.ln() + 0.25 * (1.0 - r * r)
    } else {
        let n = params.nf();
        l.powf(n - 1.0) / (n * (n - 2.0)) * (1.0 + l) / (1.0 + l.powf(n - 1.0))
            * (1.0 - r.powf(2.0 - n))
            + (1.0 - r * r) / (2.0 * n)
    }
}

/// Returns `(a_λ, c_λ)`.
pub fn boundary_data(params: ProblemParams) -> (f64, f64) {
    data(params)
}

pub fn u_radial(params: ProblemParams, r: f64) -> Result<f64> {
    RadialSolution::new(params).u(r)
}

/// Returns `(u'(r), u''(r))`.
pub fn u_radial_derivs(params: ProblemParams, r: f64) -> Result<(f64, f64)> {
    RadialSolution::new(params).derivs(r)
}
