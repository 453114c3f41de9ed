#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! One-bit compressive sensing with norm estimation.

pub mod bench;
pub mod edf;
pub mod error;
pub mod lp;
pub mod measurement;
pub mod pipeline;
pub mod recovery;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
