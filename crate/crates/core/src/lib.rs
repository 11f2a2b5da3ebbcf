//! Exact tropical Metzler pencils for stochastic min-max operators.
//!
//! The crate turns a stochastic mean-payoff game graph into a finite
//! description of its sub-fixed-point set as the projection of a tropical
//! Metzler spectrahedron, and provides the pieces needed to check that
//! description: exact max-plus arithmetic, the graph transformations with
//! their coordinate lifts, pencil synthesis and combination, an exact LP
//! frontend for piecewise-affine maps, and a sampling harness.

pub mod convex;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod harness;
pub mod linalg;
pub mod lp;
pub mod pencil;
pub mod rational;
pub mod sample;
pub mod transform;
pub mod trop;

pub use error::{Error, Result};
pub use rational::Rational;
pub use trop::{Sign, SignedTrop, Trop};
