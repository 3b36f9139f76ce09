//! Information measures between order statistics of i.i.d. samples.

// range checks are written `!(lo < x && x < hi)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod continuous;
pub mod discrete;
pub mod error;
pub mod oracles;
pub mod special;

pub use error::{Error, Result};
