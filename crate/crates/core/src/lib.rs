//! Fano complete intersections in toric Fano manifolds: search, Laurent
//! polynomial mirrors, period sequences, Picard-Fuchs operators and their
//! ramification.

pub mod catalog;
pub mod io;
pub mod lattice;
pub mod laurent;
pub mod mirror;
pub mod monodromy;
pub mod periods;
pub mod pipeline;
pub mod polyhedra;
pub mod search;
pub mod toric;

/// Small integer vector used for rays, classes and exponents.
pub type IVec = Vec<i64>;
