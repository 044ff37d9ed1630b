//! Executable constructions around 3SUM-Indexing lower bounds.
//!
//! Groups and instances live in [`group`] and [`threesum`]. The two
//! reductions ([`butterfly_reduction`], [`lsd`]) turn reachability and set
//! disjointness into 3SUM-Indexing instances; [`adversary`] builds inputs with
//! a prescribed answer pattern, and [`refuter`] produces checkable
//! impossibility certificates for 2-bit-probe schemes.

pub mod adversary;
pub mod butterfly;
pub mod butterfly_reduction;
pub mod combinatorics;
pub mod error;
pub mod graph;
pub mod group;
pub mod lsd;
pub mod refuter;
pub mod threesum;

pub use error::{Error, Result};
pub use group::{GroupElement, GroupSpec};
pub use threesum::ThreeSumInstance;
