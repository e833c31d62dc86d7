//! Numerical laboratory for overdetermined torsion problems on annuli:
//! radial solutions, the spectrum of the domain-variation linearization,
//! bifurcation values, a spectral solver for perturbed planar annuli, branch
//! continuation and Cheeger-ratio checks.

pub mod annulus;
pub mod bifurcation;
pub mod cli;
pub mod cheeger;
pub mod continuation;
pub mod error;
pub mod modes;
pub mod output;
pub mod radial;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
pub use radial::{boundary_data, u_radial, ProblemParams, RadialSolution};
