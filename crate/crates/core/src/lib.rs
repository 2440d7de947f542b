//! Hierarchical equations of motion for open quantum systems coupled to
//! fermionic, bosonic or mixed thermal baths.
//!
//! Operators are dense `d×d` complex matrices; the generator acting on the
//! stacked, column-vectorized auxiliary density operators is sparse.
// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod error;
pub mod hierarchy;
pub mod io;
pub mod liouvillian;
pub mod models;
pub mod observables;
pub mod oracle;
pub mod solvers;
pub mod sparse;
pub mod superop;

pub use error::{HeomError, Result};

pub type C64 = num_complex::Complex64;
pub type Op = nalgebra::DMatrix<C64>;
