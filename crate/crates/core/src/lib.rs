//! Exact metric geometry of weighted graphs: shortest-path distance
//! matrices, their split decompositions and ℓ1 embeddings, distance inertia,
//! and the K2,3-minor machinery that ties them together.
//!
//! Exact rationals are used everywhere except eigenvalue computation, which
//! runs in double precision with an explicit zero tolerance.

pub mod error;
pub mod graph;
pub mod lab;
pub mod lp;
pub mod metric;
pub mod minors;
pub mod rational;
pub mod spectral;
pub mod splits;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Rational;
