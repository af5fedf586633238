//! Numerical kernels shared by the physics modules.

pub mod quad;
pub mod sum;
pub mod tridiag;

pub use sum::{compensated_sum, NeumaierSum};
