//! Derivative-free minimization of smooth convex functions with
//! sub-zeroth-order oracles.
//!
//! The crate implements an ellipsoid method whose cutting direction is
//! estimated from weak feedback:
//!
//! * the sign of a directional derivative ([`oracles::OracleKind::DirectionalPreference`]),
//! * a pairwise comparison of function values ([`oracles::OracleKind::Comparator`]),
//! * exact function values ([`oracles::OracleKind::Value`]),
//! * function values corrupted by Gaussian noise ([`oracles::OracleKind::NoisyValue`]).
//!
//! Cone pruning ([`pruning`]) narrows the set of possible gradient directions
//! until it is tight enough for a shallow cut ([`geometry::shallow_cut`]) that
//! provably keeps a minimizer while shrinking the ellipsoid volume. The
//! [`solvers`] module drives the three deterministic methods and [`regret`]
//! holds the three-phase low-regret method for noisy values.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
mod error;
pub mod geometry;
mod linalg;
pub mod oracles;
pub mod problems;
pub mod pruning;
pub mod regret;
mod sign;
pub mod solvers;

pub use error::Error;
pub use linalg::{angle_between, unit_vector, Matrix, Vector};
pub use sign::Sign;
