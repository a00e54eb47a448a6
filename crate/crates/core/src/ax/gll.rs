//! Gauss-Lobatto-Legendre nodes and the collocation derivative matrix.

use super::types::DerivMatrix;
use crate::error::{Error, Result};

/// The `n` GLL nodes on `[-1, 1]`, ascending.
pub fn gll_nodes(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::contract("GLL needs at least two nodes"));
    }
    let order = n - 1;
    // Newton iteration from Chebyshev-Gauss-Lobatto points on the
    // Legendre recurrence; converges to the roots of (1 - x^2) P'_N.
    let mut x: Vec<f64> = (0..n)
        .map(|i| (std::f64::consts::PI * i as f64 / order as f64).cos())
        .collect();
    for _ in 0..100 {
        let mut delta = 0.0_f64;
        for xi in x.iter_mut() {
            let (p, p_prev) = legendre_pair(order, *xi);
            let step = (*xi * p - p_prev) / (n as f64 * p);
            *xi -= step;
            delta = delta.max(step.abs());
        }
        if delta < 1e-15 {
            break;
        }
    }
    x.reverse();
    x[0] = -1.0;
    x[order] = 1.0;
    Ok(x)
}

/// `(P_N(x), P_{N-1}(x))` via the three-term recurrence.
fn legendre_pair(order: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    for k in 2..=order {
        let next = ((2 * k - 1) as f64 * x * p - (k - 1) as f64 * p_prev) / k as f64;
        p_prev = p;
        p = next;
    }
    if order == 0 {
        (1.0, 0.0)
    } else {
        (p, p_prev)
    }
}

/// Collocation first-derivative matrix on the GLL nodes: `(D u)_i = u'(x_i)`
/// for polynomials of degree below `n`. The diagonal is set to the negative
/// off-diagonal row sum so constants differentiate to (numerically) zero.
pub fn gll_derivative(n: usize) -> Result<DerivMatrix> {
    let x = gll_nodes(n)?;
    let order = n - 1;
    let p: Vec<f64> = x.iter().map(|&xi| legendre_pair(order, xi).0).collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = p[i] / (p[j] * (x[i] - x[j]));
                d[i + n * j] = v;
                row_sum += v;
            }
        }
        d[i + n * i] = -row_sum;
    }
    DerivMatrix::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_nodes() {
        let x = gll_nodes(3).unwrap();
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn four_point_nodes_are_pm_inv_sqrt5() {
        let x = gll_nodes(4).unwrap();
        let r = 1.0 / 5.0_f64.sqrt();
        assert!((x[1] + r).abs() < 1e-14 && (x[2] - r).abs() < 1e-14);
    }

    #[test]
    fn endpoint_diagonal_matches_closed_form() {
        for n in 2..=10 {
            let d = gll_derivative(n).unwrap();
            let order = (n - 1) as f64;
            let expect = order * (order + 1.0) / 4.0;
            assert!((d.get(0, 0) + expect).abs() < 1e-9 * expect.max(1.0), "n={n}");
            assert!((d.get(n - 1, n - 1) - expect).abs() < 1e-9 * expect.max(1.0), "n={n}");
        }
    }

    #[test]
    fn differentiates_polynomials_exactly() {
        for n in 2..=16 {
            let x = gll_nodes(n).unwrap();
            let d = gll_derivative(n).unwrap();
            let deg = n - 1;
            for i in 0..n {
                let du: f64 = (0..n).map(|l| d.get(i, l) * x[l].powi(deg as i32)).sum();
                let exact = deg as f64 * x[i].powi(deg as i32 - 1);
                assert!((du - exact).abs() < 1e-9 * (deg * deg) as f64, "n={n} i={i}");
            }
        }
    }
}
