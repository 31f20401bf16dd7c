//! Stabilizer codes over finite local commutative Frobenius rings.
pub mod code;
pub mod codefile;
pub mod error;
pub mod isometry;
pub mod metrics;
pub mod normalforms;
pub mod pauli;
pub mod reduction;
pub mod ring;

pub use code::{Code, StandardForm};
pub use error::{Category, Error, Limits, Result};
pub use ring::{verify_frobenius, Elem, LocalRing, RingSpec};
