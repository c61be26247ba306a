//! Hidden sums over GF(2) and the trapdoors they create in translation-based ciphers.
//!
//! * [`gf2`]: bit-packed vectors, matrices and affine maps.
//! * [`hiddensum`]: hidden-sum groups, the ∘ operation, coordinates and standard forms.
//! * [`enumerate`]: exhaustive enumeration of block normal forms and the counts.
//! * [`classify`]: conjugacy classes under `GL(V,+)`.
//! * [`tbcipher`]: translation-based ciphers and the 6-bit toy cipher.
//! * [`attack`]: global deduction from `N + 1` chosen plaintexts.

pub mod algebra;
pub mod attack;
pub mod classify;
pub mod enumerate;
pub mod exec;
pub mod gf2;
pub mod hiddensum;
pub mod tbcipher;

pub use algebra::{Algebra, AlgebraError, Standardized};
pub use exec::Exec;
pub use gf2::{AffineMap, Gf2Error, Gf2Matrix, Gf2Vector};
pub use hiddensum::{
    EmbeddedHiddenSum, GeneratedGroup, HiddenSum, HiddenSumError, StandardHiddenSum,
};
