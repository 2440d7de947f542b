//! Independent reference implementations used by the tests and `heom oracle`.

pub mod exact;
pub mod generator;
pub mod quad;

pub use exact::*;
pub use generator::{ordered_vector_generator, GeneratorDiff, OracleGenerator};
pub use quad::{integrate, integrate_to_infinity, QuadResult};
pub mod suite;
