//! Exact chain-level machinery for bounding the simplicial volume of
//! fillings of cusped hyperbolic manifolds: symmetrized singular chains,
//! fat triangulations of flat tori, transfer and straightening, and
//! l1-minimal fillings computed by exact linear programming.

pub mod chains;
pub mod lattice;
pub mod error;
pub mod fillnorm;
pub mod hypvolume;
pub mod linalg;
pub mod pipeline;
pub mod rational;
pub mod torus;

pub use error::{Error, Result};
pub use rational::Rational;
