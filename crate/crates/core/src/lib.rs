//! Eigenvalue approximation for Fredholm integral operators whose kernels are
//! Green's functions: continuous on the unit square, smooth on each side of
//! the diagonal, with a kink across it.
//!
//! Eight projection methods are provided, built on piecewise polynomials of
//! degree `<= 2r` over a uniform mesh. They are the classical,
//! Sloan-iterated, modified and iterated-modified variants of the Galerkin
//! and collocation methods. Refinement studies report the errors and their
//! experimental orders of convergence.
//!
//! ```
//! use greenspec::kernel::greens_laplace;
//! use greenspec::methods::{run_method, MethodOptions, MethodTag};
//!
//! let k = greens_laplace();
//! let res = run_method(MethodTag::ModifiedGalerkin, &k, 8, 0, &MethodOptions::default()).unwrap();
//! let err = (res.lambda - 1.0 / std::f64::consts::PI.powi(2)).abs();
//! assert!(err < 2e-5);
//! ```

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod discretize;
pub mod eigen;
pub mod error;
pub mod func;
pub mod kernel;
pub mod linalg;
pub mod mesh;
pub mod methods;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use func::{EvalFn, SharedFn};
pub use kernel::GreenKernel;
pub use methods::{MethodResult, MethodTag};
