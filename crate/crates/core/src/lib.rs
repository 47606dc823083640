//! Financial term hypernym classification.
//!
//! The pipeline: normalize text ([`corpus`]), train or load word vectors
//! ([`embedding`]), compose term and label vectors ([`termrep`]), split
//! terms by whether they literally contain a label and rank labels per
//! subset ([`classify`]), then score whole systems ([`eval`]).

pub mod classify;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod termrep;

pub use error::{Error, Result};
