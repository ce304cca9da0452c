//! Minimization of the rotating Gross-Pitaevskii energy on the unit L² sphere
//! with Sobolev (H_A) gradients, projected/Riemannian steepest descent and
//! Riemannian conjugate gradients, plus a normalized backward-Euler baseline.
//!
//! The discretization is a uniform finite-difference lattice with a masked
//! interior and homogeneous Dirichlet data (see [`grid`]). All discrete
//! operators are built so that the L² gradient returned by
//! [`model::l2_gradient`] is the exact derivative of [`model::energy`].

// `!(x >= tol)` is used on purpose so that NaN fails the guard
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod manufactured;
pub mod model;
pub mod optim;
pub mod par;
pub mod postprocess;
pub mod riemannian;
pub mod sobolev;
pub mod verify;

pub use error::{GpError, Result};
pub use field::{Field, VecField};
pub use grid::{Grid, Shape};
pub use model::{ModelParams, Trap};
pub use num_complex::Complex64;
