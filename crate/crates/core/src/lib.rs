//! Gabor systems over finite abelian groups.
//!
//! The crate builds time–frequency shifted windows over products of cyclic
//! groups, decides spark and full spark by exhaustive (parallel) subset
//! enumeration, constructs and verifies machine-checkable spark-deficiency
//! certificates for non-cyclic groups, synthesizes Clifford unitaries for odd
//! dimensions, and checks support-size identities of the short-time Fourier
//! transform.

pub mod certificates;
pub mod clifford;
pub mod cyclotomic;
pub mod error;
pub mod gabor;
pub mod group;
pub mod linalg;
pub mod numtheory;
pub mod rng;
pub mod selftest;
pub mod spark;
pub mod uncertainty;

pub use error::{Error, Result};
pub use num_complex::Complex64;
