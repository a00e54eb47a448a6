//! Floating-point operation accounting for the AX kernel.
//!
//! Per grid point: six contractions of length `n` at `2n - 1` operations
//! each, 15 for the metric-tensor accumulation (9 multiplies, 6 adds), and
//! the two additions that merge the adjoint's three contractions.

use std::cell::Cell;
use std::ops::{Add, Mul};

use super::kernel::ax_element_slices;
use super::matrix::Scalar;
use super::types::{DerivMatrix, ElementField, GeomFactors};
use crate::error::{Error, Result};

pub const CONTRACTIONS: u64 = 6;
pub const ACCUMULATE_FLOPS: u64 = 15;
pub const MERGE_FLOPS: u64 = 2;

pub fn flops_per_point(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::contract(format!("n must be at least 2, got {n}")));
    }
    Ok(CONTRACTIONS * (2 * n as u64 - 1) + ACCUMULATE_FLOPS + MERGE_FLOPS)
}

pub fn flops_per_element(n: usize) -> Result<u64> {
    Ok((n as u64).pow(3) * flops_per_point(n)?)
}

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

/// An `f64` that bumps a thread-local counter on every add and multiply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingF64(pub f64);

impl CountingF64 {
    pub fn reset() {
        OPS.with(|c| c.set(0));
    }

    pub fn count() -> u64 {
        OPS.with(Cell::get)
    }
}

impl Add for CountingF64 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        OPS.with(|c| c.set(c.get() + 1));
        CountingF64(self.0 + rhs.0)
    }
}

// counting, not multiplying, is the point of the `+ 1` here
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for CountingF64 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        OPS.with(|c| c.set(c.get() + 1));
        CountingF64(self.0 * rhs.0)
    }
}

impl Scalar for CountingF64 {}

/// Result of one instrumented run of the element operator.
#[derive(Debug, Clone)]
pub struct CountedRun {
    pub operations: u64,
    pub output: ElementField,
}

/// Runs the element operator through the counting scalar. The arithmetic
/// path is the same generic code the `f64` kernel uses, so `output` is
/// bitwise identical to [`super::ax_element`].
pub fn count_ax_element(u: &ElementField, g: &GeomFactors, d: &DerivMatrix) -> Result<CountedRun> {
    let n = u.n();
    if g.n() != n || d.n() != n {
        return Err(Error::contract("inputs disagree on n"));
    }
    let wrap = |s: &[f64]| s.iter().copied().map(CountingF64).collect::<Vec<_>>();
    let (cu, cg, cd, cdt) = (wrap(u.values()), wrap(g.values()), wrap(d.d()), wrap(d.dt()));
    CountingF64::reset();
    let w = ax_element_slices(&cu, &cg, &cd, &cdt, n, CountingF64(0.0));
    let operations = CountingF64::count();
    Ok(CountedRun {
        operations,
        output: ElementField::from_raw(n, w.into_iter().map(|c| c.0).collect()),
    })
}
