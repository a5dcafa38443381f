//! Orthonormal polynomials, Christoffel-Darboux kernels and leverage scores
//! for weighted point clouds in `C^d`.
//!
//! The crate is organised around a small pipeline:
//!
//! * [`measures`] holds point clouds, monomial orderings and affine normalization;
//! * [`orthopoly`] builds orthonormal bases by rank-aware Gram-Schmidt or Arnoldi;
//! * [`cdkernel`] evaluates kernels, cosines, Christoffel functions and leverage scores;
//! * [`perturb`] compares kernels of nearby measures and of measures with added point masses;
//! * [`reference`] collects closed-form kernels, Green functions and conformal maps used as oracles.
//!
//! ```
//! use christoffel::measures::{DiscreteMeasure, MonomialOrdering};
//! use christoffel::orthopoly::{orthonormalize, GramSchmidtConfig};
//! use christoffel::cdkernel::KernelEngine;
//! use num_complex::Complex64;
//!
//! let atoms: Vec<Vec<Complex64>> = (0..8)
//!     .map(|k| vec![Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 8.0)])
//!     .collect();
//! let mu = DiscreteMeasure::uniform(atoms).unwrap();
//! let basis = orthonormalize(&mu, &MonomialOrdering::graded_lex(1), 3, &GramSchmidtConfig::default()).unwrap();
//! let engine = KernelEngine::new(basis);
//! let z = [Complex64::new(0.0, 0.0)];
//! assert!((engine.diagonal(&z) - 1.0).abs() < 1e-12);
//! ```

pub mod cdkernel;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod orthopoly;
pub mod perturb;
pub mod quadrature;
pub mod reference;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
