// `!(a < b)` guards double as NaN rejection.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chareq;
pub mod cli;
pub mod error;
pub mod fields;
pub mod io;
pub mod meanvalue;
pub mod par;
pub mod quadrature;
pub mod specfun;
pub mod synthesis;
pub mod tworadii;
pub mod zeroscan;

pub use error::{Error, Result};
