//! Mesh generation for benchmark boxes, external mesh ingestion and
//! periodic pairing.

mod boxgen;
mod msh;
mod native;
mod periodic;

pub use boxgen::{gen_box, gen_mixed_box, jitter_interior_nodes, BoxSpec, BoxStyle};
pub use msh::read_msh;
pub use native::{read_native, write_native};
pub use periodic::pair_periodic;

use crate::state::Conserved;

/// Boundary treatment attached to a mesh patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatchKind {
    /// Paired with a translated partner patch; resolved at mesh build time.
    Periodic,
    /// Subsonic/supersonic far field via 1D Riemann invariants along the
    /// face normal against the given free stream.
    FarfieldRiemann { free_stream: Conserved },
    /// Inviscid wall: normal velocity reflected.
    SlipWall,
    /// Viscous adiabatic wall: full velocity reversed, density and pressure
    /// mirrored.
    NoslipAdiabaticWall,
}
