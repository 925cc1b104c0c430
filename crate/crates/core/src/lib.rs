//! Experimental number theory around modular inverses: unit-group tables,
//! Dirichlet character sums over progressions, counts of residue tuples whose
//! product's inverse is constrained to progressions and boxes, and discrepancy
//! machinery for the resulting point sets.
//!
//! Everything is desk-scale and verification-oriented: exact integer or
//! rational arithmetic wherever a claim is exact, floating point with explicit
//! residual checks where it is not.

pub mod arith;
pub mod characters;
pub mod charsums;
pub mod discrepancy;
pub mod error;
pub mod lehmer;
pub mod rat;
pub mod region;

pub use arith::{Factorization, Modulus, UnitGroupStructure};
pub use characters::{CharacterGroup, DirichletCharacter, RootOfUnity};
pub use discrepancy::{DiscrepancyMode, PointSet, RegionClass};
pub use error::{Error, Result};
pub use lehmer::{LatticePointSet, LehmerInstance, TorusBox};
pub use rat::Rat;
pub use region::RegionSpec;
