//! Stability constants, spurious pressure modes and convergence studies for
//! continuous vector Lagrange x discontinuous pressure elements of the mixed
//! Laplacian on structured triangulations of the unit square.
//!
//! The pipeline is [`mesh`] -> [`assembly`] -> [`eigensolve`] -> [`stability`],
//! with [`poisson`] solving the source problem on the same forms.

pub mod assembly;
pub mod dense;
pub mod eigensolve;
pub mod element;
pub mod error;
pub mod mesh;
pub mod poisson;
pub mod sparse;
pub mod stability;

pub use error::{Error, Result};
