//! Covariance and inverse-covariance estimation for Gaussian models that are
//! invariant under a known finite permutation group.
//!
//! The crate provides, in order of the estimation pipeline:
//!
//! - [`group`]: finite permutation groups, their edge orbits, and the orbit
//!   parameters that govern sample-complexity gains;
//! - [`basis`]: symmetry-adapted bases and block diagonalization of the
//!   fixed-point subspace;
//! - [`gauss`]: invariant ground-truth models and Gaussian sampling;
//! - [`estimator`]: Reynolds projection onto the fixed-point subspace (three
//!   independent routes), matrix norms, and the projection-plus-thresholding
//!   sparse covariance estimator;
//! - [`logdet`]: the l1-penalized log-determinant program for sparse
//!   concentration (graphical-model) selection, with a symmetry-aware path;
//! - [`harness`]: seeded Monte Carlo experiment drivers with CSV/JSON output;
//! - [`io`]: file formats shared by the library, the CLI, and the examples.
//!
//! The runnable examples under `examples/` walk through each capability; the
//! thin `symcov` binary exposes the same operations as subcommands.

pub mod basis;
pub mod error;
pub mod estimator;
pub mod gauss;
pub mod group;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod logdet;
pub mod seed;
