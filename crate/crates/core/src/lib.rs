//! Maximal eigenpair computation for matrices with nonnegative off-diagonal
//! elements, and for the wider class of real and complex matrices whose
//! powers eventually have a positive real part (up to a shift).
//!
//! The crate provides three routes to the pair `(rho(A), g)`:
//!
//! * [`tridiag`]: efficient initials for tridiagonal Q-matrices followed by a
//!   weighted Rayleigh quotient iteration with an O(N) explicit solver.
//! * [`general`]: the same construction for dense irreducible matrices, where
//!   the three auxiliary sequences come from linear solves.
//! * [`iterate`]: power iteration, plain Rayleigh quotient iteration, and the
//!   two global algorithms started from the uniform vector.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and the table reproductions live in the `maxeig` crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations, rust_2018_idioms)]
// `!(x > 0.0)` is deliberate: NaN must fail positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod general;
pub mod iterate;
pub mod linsolve;
pub mod models;
pub mod numat;
mod scalar;
pub mod tridiag;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scalar::Scalar;

pub use iterate::{
    algorithm1, algorithm2, power_iteration, rqi, verify_maximal, Capture, EigenpairResult,
    GlobalOptions, IterationTrace, Normalization, PowerOptions, Run, StopRule, Target,
    Termination, TraceStep, ZUpdate,
};

pub use numat::{DenseMatrix, Measure, TridiagonalSystem};
pub use models::{Model, ModelName, ModelParams, ModelSpec, TriangularRule};
pub use general::{general_rqi, GeneralInitials, GeneralOptions, GeneralRun, GeneralZ0};
pub use tridiag::{tridiag_rqi, HTransform, InitialData, TridiagOptions, TridiagRun, TridiagZ0};

