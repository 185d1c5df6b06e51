//! Tensor-based homogeneous polynomial dynamical systems (HPDS).
//!
//! A degree `k - 1` HPDS with linear input and output,
//!
//! ```text
//! x'(t) = A x(t)^{k-1} + B u(t)
//! y(t)  = C x(t)
//! ```
//!
//! is carried by an order-`k` almost symmetric dynamic tensor `A`. This crate
//! provides the dense tensor algebra behind that representation, higher-order
//! singular value decompositions (full, compact, and shared-factor compact),
//! Z-eigenpair computation, HOSVD-based model order reduction, and rank tests
//! for stability, strong controllability, and local weak observability of the
//! original and reduced models.

pub mod analysis;
pub mod decompose;
pub mod error;
pub mod generators;
pub mod reduction;
pub mod system;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{DenseMatrix, DenseTensor, DenseVector};
