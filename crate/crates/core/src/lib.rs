//! Nekbone's AX kernel and an analytic model of its FPGA dataflow port.
//!
//! The crate has two halves. [`ax`] is a reference implementation of the
//! matrix-free spectral-element Poisson operator (`ax`, `ax_e`,
//! `local_grad3`, `local_grad3_t`) together with FLOP accounting and a dense
//! brute-force oracle. [`dataflow`], [`memory`] and [`report`] model the HLS
//! kernel built from it: pipeline initiation intervals and drains, ping-pong
//! buffering between dataflow phases, HBM port and bank placement, clock
//! scaling, multi-kernel scaling and power efficiency.
//!
//! "Polynomial order 16" is taken to mean `n = 16` points per dimension,
//! i.e. 4096 grid points per element. Spectral-element codes often use the
//! other convention (order `p` means `p + 1` points); this crate does not.

pub mod ax;
pub mod cli;
pub mod config;
pub mod dataflow;
pub mod error;
pub mod memory;
pub mod report;

pub use error::{Error, Result};
