// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod error;
pub mod flow;
pub mod oscillator;
pub mod quad;
pub mod radialfd;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
