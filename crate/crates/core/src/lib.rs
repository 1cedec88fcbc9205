//! Fast rectangular matrix multiplication as bilinear algorithms, and the
//! communication cost of running them recursively.
//!
//! * [`algorithm`], [`laurent`], [`textfmt`], [`symmetry`], [`tensor`], [`catalog`]:
//!   the `(U, V, W)` data model, exact validation, and built-in algorithms.
//! * [`executor`]: recursive execution over exact rationals or `f64`.
//! * [`cdag`], [`graph`], [`expansion`]: computation graphs of the recursive
//!   algorithm, their structure and edge expansion.
//! * [`memsim`]: LRU simulation of the recursive schedule and the words-moved
//!   recurrence.
//! * [`bounds`]: lower and upper bounds on words moved, and their tightness.

pub mod algorithm;
pub mod bounds;
pub mod catalog;
pub mod cdag;
pub mod error;
pub mod executor;
pub mod expansion;
pub mod graph;
pub mod memsim;
pub mod laurent;
pub mod symmetry;
pub mod tensor;
pub mod textfmt;

pub use algorithm::{BilinearAlgorithm, CoefMatrix, Dims, ValidationReport};
pub use error::{Error, Result};
pub use laurent::Laurent;
pub use symmetry::Symmetry;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/algorithms.md")]
    mod algorithms {}
    #[doc = include_str!("../../../book/src/executing.md")]
    mod executing {}
    #[doc = include_str!("../../../book/src/cdag.md")]
    mod cdag {}
    #[doc = include_str!("../../../book/src/communication.md")]
    mod communication {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
