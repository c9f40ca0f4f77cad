//! Word embeddings by direct optimization of the skip-gram
//! negative-sampling objective over the manifold of rank-d matrices.
//!
//! The pipeline: [`corpus`] turns text into co-occurrence statistics,
//! [`sgns`] evaluates the objective and its gradient as functions of the
//! score matrix, [`manifold`] runs projector-splitting retraction steps,
//! [`baselines`] provides the SVD-SPPMI and SGD competitors, [`embedding`]
//! splits a low-rank solution into word vectors, and [`eval`] scores them
//! on word-similarity datasets.

pub mod baselines;
pub mod corpus;
pub mod embedding;
mod error;
pub mod eval;
pub mod manifold;
pub mod sgns;

pub use error::{Error, Result};
