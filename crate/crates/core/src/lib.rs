//! Compact gas-kinetic scheme (CGKS) for the 3D compressible Euler and
//! Navier-Stokes equations on unstructured hybrid meshes.
//!
//! The solver evolves two degrees of freedom per cell: the cell-averaged
//! conservative variables and their cell-averaged slopes. The time-dependent
//! BGK interface flux supplies both the flux integrals and a time-accurate
//! interface state, from which the slopes are updated by the divergence
//! theorem. Third-order spatial accuracy comes from a compact quadratic
//! reconstruction over the von Neumann stencil, available in two
//! interchangeable flavors:
//!
//! * [`recon::ReconPath::Original`] - the constrained least-squares
//!   reconstruction that persists one solve matrix per cell, and
//! * [`recon::ReconPath::TwoStep`] - the matrix-free variant that first fits
//!   linear profiles of the evolved slopes (fixing the quadratic terms) and
//!   then fits the linear terms against shifted cell averages.

pub mod error;
pub mod flux;
pub mod kinetic;
pub mod mesh;
pub mod meshtools;
#[doc(hidden)]
pub mod oracles;
pub mod recon;
pub mod solver;
pub mod state;
pub mod vec3;

pub use error::CgksError;
pub use state::Conserved;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, CgksError>;
