//! Numerical laboratory for Moreau sweeping processes.
//!
//! The crate integrates differential inclusions of the form
//! `u' + N(C(t), u) ∋ f(u)` with the catching-up scheme
//! `u[i+1] = P_{C(t[i+1])}(u[i] + h f(u[i]))`, and ships the pieces that
//! scheme needs: exact and iterative projections onto closed (possibly
//! nonconvex) sets, a disk-based crowd model whose feasible set is not
//! uniformly prox-regular once walls are added, a fast-marching solver for
//! exit-directed velocity fields, ℓ_p duality maps, and a harness that
//! audits the discrete bounds a run must satisfy.
//!
//! Heavy loops (multistart projection, convergence sweeps, sampled checks)
//! dispatch through [`exec::Execution`], which uses rayon when the
//! `parallel` feature is enabled and falls back to a plain loop otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod catchup;
pub mod crowd;
pub mod duality;
pub mod eikonal;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod nnls;
pub mod options;
pub mod output;
pub mod projection;
pub mod scenario;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{ConstraintSet, Motion, MovingSet, Vector};
pub use options::{SolverOptions, Tolerances};
