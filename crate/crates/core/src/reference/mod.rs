//! Closed-form oracles: pluricomplex Green functions of classical compact
//! sets, exterior conformal maps, and explicit Christoffel-Darboux kernels.
//!
//! Everything here is independent of the numerical pipeline in
//! [`crate::orthopoly`] and is meant to be compared against it.

pub mod conformal;
pub mod green;
pub mod kernels;

pub use conformal::ConformalMap;
pub use green::{interval_green, BallNorm, GreenFunction, GreenKind, Polynomial};
pub use kernels::{
    bergman_disk_exterior, bergman_disk_kernel, bergman_disk_max, bergman_predictors,
    chebyshev_corner_value, chebyshev_tensor_kernel, chebyshev_univariate_kernel,
    complex_ball_kernel, joukowski_parameter, polydisk_kernel, BergmanPrediction, ClosedFormKernel,
};
