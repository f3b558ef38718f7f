//! Weyl-Moyal quantization on degenerate Poisson vector spaces, and fiberwise
//! over sampled Poisson bundles.
//!
//! The exact finite Weyl model in [`weyl`] makes the algebraic identities
//! hold to rounding error; [`grid`] checks the continuum commutation relations
//! with a discretization tolerance instead.

pub mod bundle;
pub mod dfr;
pub mod error;
pub mod grid;
pub mod heisenberg;
pub mod io;
pub mod lattice;
pub mod leaves;
pub mod linalg;
pub mod par;
pub mod star;
pub mod weyl;

pub use error::{Error, Result};
pub use lattice::{GaussianSpec, LatticeSpec, PhaseSpaceFunction};
pub use linalg::{Bivector, DarbouxFrame, KernelSplit};
pub use par::Exec;
pub use weyl::{FiniteWeylSystem, WeylOperator};
