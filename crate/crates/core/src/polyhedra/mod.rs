//! Rational polyhedral cones and lattice polytopes.

mod cone;
pub(crate) mod dd;
mod hilbert;
mod polytope;

pub use cone::{dual_cone, intersect, Cone};
pub(crate) use cone::dot_i;
pub use hilbert::hilbert_basis;
pub use polytope::{mixed_volume, normalized_volume_of_points, LatticePolytope};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyhedraError {
    #[error("cone is not pointed")]
    NotPointed,
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("mixed volume {0} is not an integer")]
    NonIntegral(String),
}
