//! Double saddle-point systems from three-field Biot poroelasticity.
//!
//! The crate assembles the block system
//!
//! ```text
//!     | A   Bᵀ  0  |
//!     | B  -D   Cᵀ |
//!     | 0   C   E  |
//! ```
//!
//! for mixed (MFE) and mixed-hybrid (MHFE) discretizations on structured
//! grids, builds block triangular and block diagonal preconditioners from
//! inexpensive Schur complement approximations, runs GMRES/MINRES/PCG, and
//! computes eigenvalue bounds of the preconditioned operators from spectral
//! indicators.

pub mod assembly;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod linalg;
pub mod precond;
pub mod schur;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
