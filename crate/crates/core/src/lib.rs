//! Pure-state quantum metrology laboratory.
//!
//! Probe states are prepared and evolved under `exp(-i phi H)`, measured with
//! a POVM, and compared against the Cramér-Rao, Heisenberg, uncertainty and
//! Margolus-Levitin bounds. Generator networks track how many black-box
//! queries a generator spends.

// Negated comparisons such as `!(x > 0.0)` deliberately reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod hilbert;
pub mod measurement;
pub mod metrology;
mod numeric;

pub use error::{MetroError, Result};
