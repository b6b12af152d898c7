//! Exact sign calculus, graded products, morphism algebras, iterated cores,
//! decompositions and cocycle verification for split [n]-manifolds and
//! decomposed symmetric n-fold vector bundles.
//!
//! All arithmetic is over arbitrary-precision rationals; every check is an
//! exact equality.

pub mod cocycles;
pub mod cores;
pub mod decomp;
pub mod error;
pub mod exec;
pub mod io;
pub mod nman;
pub mod oracle;
pub mod partitions;
pub mod random;
pub mod snvb;
pub mod suite;
pub mod tensors;

pub use error::{Error, Result};
pub use partitions::{IntPartition, OrderedPartition, Permutation, Subset};
pub use tensors::{MultiTensor, Rational};
