//! Sieve bounds, smooth-number counts, multiplicative semigroups and exact
//! sumset decomposition search, for experiments on additive irreducibility
//! of multiplicatively structured sets.
//!
//! Loops over elements, moduli, segments and random batches go through
//! [`Exec`], which fans out on rayon when the `parallel` feature is on and
//! otherwise runs sequentially with identical results.

pub mod arith;
pub mod error;
pub mod exec;
pub mod irreducibility;
pub mod primes;
pub mod semigroup;
pub mod sieves;
pub mod smooth;
pub mod sumset;
pub mod verify;

pub use error::{Result, SieveError};
pub use exec::Exec;
pub use primes::{PrimeSubset, PrimeTable, Selector};
pub use sumset::IntegerSet;
