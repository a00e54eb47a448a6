use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Arithmetic the kernel needs. Implemented for `f64` and for the
/// operation-counting scalar in [`super::flops`].
pub trait Scalar: Copy + Add<Output = Self> + Mul<Output = Self> + Send + Sync {}

impl Scalar for f64 {}

/// Dense column-major matrix: `get(i, j) = data[i + rows * j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("matrix has non-finite entries"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from row-major nested rows, which reads naturally in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::contract("ragged rows"));
        }
        let mut data = vec![0.0; r * c];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                data[i + r * j] = *v;
            }
        }
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + n * i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + self.rows * j]
    }
}

/// Dense product `a * b`.
pub fn mxm(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::contract(format!(
            "inner dimensions differ: {}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = vec![0.0; a.rows * b.cols];
    mxm_into(&a.data, a.rows, &b.data, a.cols, &mut out, b.cols);
    Ok(Matrix {
        rows: a.rows,
        cols: b.cols,
        data: out,
    })
}

/// Column-major `out (r x q) = a (r x c) * b (c x q)`, Nekbone's `mxm`.
///
/// Each output entry costs exactly `2c - 1` operations: the accumulator
/// starts from the first product rather than from zero.
pub(crate) fn mxm_into<T: Scalar>(a: &[T], r: usize, b: &[T], c: usize, out: &mut [T], q: usize) {
    debug_assert!(c >= 1);
    debug_assert_eq!(a.len(), r * c);
    debug_assert_eq!(b.len(), c * q);
    debug_assert_eq!(out.len(), r * q);
    for j in 0..q {
        let bcol = &b[c * j..c * (j + 1)];
        for i in 0..r {
            let mut acc = a[i] * bcol[0];
            for l in 1..c {
                acc = acc + a[i + r * l] * bcol[l];
            }
            out[i + r * j] = acc;
        }
    }
}
