//! Recovery of binary k-sparse solutions of underdetermined linear systems
//! through linear-programming relaxations.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`] and [`lp`]: dense matrices, LU, and the bounded-variable
//!   simplex solver every other module is built on.
//! * [`recovery`]: the relaxations (ℓ∞, ℓ1 box, nonnegative ℓ1, box
//!   feasibility, square inverse) and the success predicate.
//! * [`uniqueness`]: the hull-separation certificate, the generic
//!   no-improving-direction test, and an optimal-face oracle.
//! * [`ksets`]: brute-force k-set counting and Monte Carlo estimators.
//! * [`randgen`]: seeded matrix and signal sampling.
//! * [`experiment`]: sweeps, level sets, transition points and the entropy fit.
//! * [`table`], [`config`], [`plot`]: persisted formats.

pub mod config;
pub mod error;
pub mod experiment;
pub mod ksets;
pub mod linalg;
pub mod lp;
pub mod par;
pub mod plot;
pub mod randgen;
pub mod recovery;
pub mod table;
pub mod uniqueness;

pub use error::{Error, Result};
pub use linalg::{lu_solve, DenseMatrix};
pub use lp::{solve_lp, LpOutcome, LpProblem, LpStatus, Method, SolverSettings};
