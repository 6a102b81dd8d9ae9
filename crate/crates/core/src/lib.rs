//! Relational-indeterminate table computing.
//!
//! A [`RelationTable`] is a bit table over arguments (columns) and values
//! (rows). Functions are tables with at most one mark per column. Tables
//! combine by [`abstraction`] (cell-wise union), are compared by
//! [`containment`] (cell-wise implication), and are applied to a cue by
//! [`reduction`], which draws a constituent function near the cue. The
//! [`entropy`] of a table is the mean over columns of `log2` of the number
//! of marked rows.
//!
//! [`AssociativeMemory`] keeps one table per class label and exposes the
//! register / recognize / retrieve cycle built from these operations.
//!
//! With the default `parallel` feature the cell-wise kernels, per-register
//! recognition and experiment sweeps run on rayon; without it everything
//! runs sequentially and produces identical results.

pub mod codec;
pub mod corpus;
pub mod error;
pub mod experiment;
pub mod format;
pub mod kernels;
pub mod memory;
pub mod profile;
pub mod reduction;
pub mod table;

pub use codec::{decode, encode, GlyphImage, QuantizerConfig};
pub use error::{Error, Result};
pub use format::Bundle;
pub use memory::{AssociativeMemory, RecognitionReport, Retrieval};
pub use profile::{shannon_entropy, MessageDistribution, TauProfile};
pub use reduction::reduction;
pub use table::{
    abstraction, constituent_functions, containment, cue_containment, entropy, CueFunction,
    EntropyValue, RelationTable,
};
