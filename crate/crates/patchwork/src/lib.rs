//! Exact computation with vector configurations over small finite fields.
pub mod config;
pub mod decompose;
pub mod error;
pub mod extremal;
pub mod field;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod patch;
pub mod ratio;
pub mod selftest;
pub mod structure;

pub use error::{Error, Result};
