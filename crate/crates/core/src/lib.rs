//! Exact computations in the algebraic model for rational torus-equivariant
//! cohomology theories: diagrams of modules over the quotient-pair poset of a
//! torus, spheres, Euler-class localization, fixed points, inflation, and the
//! right adjoints that make a diagram extended and quasi-coherent.

pub mod algebra;
pub mod cli;
pub mod diagram;
pub mod error;
pub mod experiments;
pub mod family;
pub mod functors;
pub mod io;
pub mod lattice;
pub mod spheres;
pub mod torus;

pub use error::{Error, Result};
