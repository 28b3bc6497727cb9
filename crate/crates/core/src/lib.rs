//! Fast phase retrieval for signals lying in a union of finitely generated
//! cones: detect the cone with one magnitude per exclusion, then recover the
//! signal from `rank` magnitudes through a single circulant solve.
//!
//! Indices are 0-based throughout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anchor;
pub mod cone;
pub mod design;
pub mod detect;
pub mod error;
pub mod feasibility;
pub mod harness;
pub mod linalg;
pub mod recover;
pub mod rng;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
