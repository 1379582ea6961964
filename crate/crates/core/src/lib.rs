#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod bench;
pub mod convergence;
pub mod decompose;
pub mod error;
pub mod factorize;
pub mod gss;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod spin;
pub mod state;
pub mod sweep;
pub mod tensor;
#[doc(hidden)]
pub mod testing;
pub mod topology;

pub use error::{Error, Result};
pub use faer::c64;
pub use scalar::Scalar;
pub use tensor::Tensor;
