//! Particle kinetics for ordered fluids.
//!
//! A fluid with microstructure carries, next to position and momentum, an
//! order parameter living on a compact manifold acted on by rotations. This
//! crate implements four such manifolds (gas volume fraction on `[0,1]`, rod
//! directors on the circle and the sphere, head-tail symmetric directors on
//! the projective line), the conserved quantities of binary interactions,
//! a family of impulse-based collision rules, a stochastic homogeneous
//! solver with entropy monitoring, and the mean-field alignment dynamics of
//! rod ensembles.
//!
//! The `okin` binary drives all of it from flat key-value scenario files and
//! writes self-describing CSV output; see the README for the schema.

pub mod collisions;
pub mod config;
pub mod dsmc;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod meanfield;
pub mod mechanics;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
