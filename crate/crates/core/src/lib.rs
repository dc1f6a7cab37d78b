//! Model theory for commuting tuples of contractions on finite-dimensional
//! Hilbert spaces: fundamental operators, Andô dilations, Hardy-space lifts,
//! functional models and characteristic triples.

pub mod ando;
pub mod chartriple;
pub mod cli;
pub mod error;
pub mod fundamental;
pub mod hardy;
pub mod lifts;
pub mod numkit;
pub mod report;
pub mod tuples;

pub use error::{Error, Result};
pub use numkit::{ComplexMatrix, TolerancePolicy};
pub use tuples::{ContractionTuple, GeneratorKind};
