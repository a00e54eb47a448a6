//! Reference implementation of Nekbone's AX kernel.
//!
//! All arithmetic is `f64`. Per element the kernel computes
//! `w = local_grad3_t(local_accumulate(local_grad3(u)))`; elements are
//! independent.

pub mod fixtures;
pub mod flops;
pub mod gll;
pub mod io;
mod kernel;
mod matrix;
mod types;
pub mod verify;

pub use flops::{count_ax_element, flops_per_element, flops_per_point};
pub use kernel::{ax, ax_element, ax_par, local_accumulate, local_grad3, local_grad3_t};
pub use matrix::{mxm, Matrix, Scalar};
pub use types::{DerivMatrix, ElementField, GeomFactors, GradTriple, ProblemConfig};
