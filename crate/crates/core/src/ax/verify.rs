//! Brute-force oracle and the kernel property suite.
//!
//! The oracle assembles the element operator as an explicit `n^3 x n^3`
//! matrix `A = G^T M G` from Kronecker-delta formulas on `d` alone (it never
//! touches `dt` or the contraction code), then multiplies.

use std::fmt;

use super::fixtures::FixtureRng;
use super::flops::{count_ax_element, flops_per_element};
use super::kernel::{ax_element, local_grad3, local_grad3_t};
use super::types::{DerivMatrix, ElementField, GeomFactors, GradTriple, ProblemConfig};
use crate::error::Result;

/// Row-major dense matrix of the element operator.
pub fn dense_operator(g: &GeomFactors, d: &DerivMatrix) -> Vec<f64> {
    let n = d.n();
    let np = n * n * n;
    let idx = |i: usize, j: usize, k: usize| i + n * (j + n * k);
    // Nonzeros of row p of G_a: (column, coefficient).
    let row = |a: usize, i: usize, j: usize, k: usize| -> Vec<(usize, f64)> {
        (0..n)
            .map(|l| match a {
                0 => (idx(l, j, k), d.get(i, l)),
                1 => (idx(i, l, k), d.get(j, l)),
                _ => (idx(i, j, l), d.get(k, l)),
            })
            .collect()
    };
    let mut op = vec![0.0; np * np];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let p = idx(i, j, k);
                let gp = g.point(p);
                let m = [[gp[0], gp[1], gp[2]], [gp[1], gp[3], gp[4]], [gp[2], gp[4], gp[5]]];
                let rows = [row(0, i, j, k), row(1, i, j, k), row(2, i, j, k)];
                for a in 0..3 {
                    for b in 0..3 {
                        let coef = m[a][b];
                        for &(r, ga) in &rows[a] {
                            for &(c, gb) in &rows[b] {
                                op[r * np + c] += ga * coef * gb;
                            }
                        }
                    }
                }
            }
        }
    }
    op
}

pub fn apply_dense(op: &[f64], u: &ElementField) -> ElementField {
    let np = u.values().len();
    let w = (0..np)
        .map(|r| {
            op[r * np..(r + 1) * np]
                .iter()
                .zip(u.values())
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    ElementField::from_raw(u.n(), w)
}

/// `max |a - b| / max |b|`, guarded against an all-zero reference.
pub fn relative_inf_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = b.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    DenseOracle,
    Adjointness,
    Symmetry,
    Linearity,
    FlopCount,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::DenseOracle,
        Property::Adjointness,
        Property::Symmetry,
        Property::Linearity,
        Property::FlopCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::DenseOracle => "dense-oracle",
            Property::Adjointness => "adjointness",
            Property::Symmetry => "symmetry",
            Property::Linearity => "linearity",
            Property::FlopCount => "flop-count",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub property: Property,
    pub n: usize,
    pub trials: usize,
    /// Worst relative error seen (operation-count difference for FlopCount).
    pub worst: f64,
    pub passed: bool,
}

/// Configuration of a property run. Scalar identities are normalised by the
/// product of the vector norms involved (the Cauchy-Schwarz bound), so a
/// near-zero inner product does not inflate the relative error.
#[derive(Debug, Clone)]
pub struct PropertySuite {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// The dense oracle is O(n^6) in memory; skip it above this size.
    pub oracle_max_n: usize,
    /// Replace `dt` with `d` (untransposed) to check the suite notices.
    pub corrupt_transpose: bool,
}

impl Default for PropertySuite {
    fn default() -> Self {
        Self {
            sizes: vec![2, 3, 4],
            trials: 100,
            seed: super::fixtures::DEFAULT_SEED,
            tolerance: 1e-12,
            oracle_max_n: 6,
            corrupt_transpose: false,
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn triple_values(t: &GradTriple) -> Vec<f64> {
    [t.ur.values(), t.us.values(), t.ut.values()].concat()
}

impl PropertySuite {
    fn deriv(&self, rng: &mut FixtureRng, n: usize) -> DerivMatrix {
        let d = rng.deriv(n);
        if self.corrupt_transpose {
            DerivMatrix::from_parts_unchecked(n, d.d().to_vec(), d.d().to_vec()).expect("n x n")
        } else {
            d
        }
    }

    pub fn run(&self) -> Result<Vec<PropertyOutcome>> {
        let mut out = Vec::new();
        for &n in &self.sizes {
            for property in Property::ALL {
                if property == Property::DenseOracle && n > self.oracle_max_n {
                    continue;
                }
                out.push(self.run_one(property, n)?);
            }
        }
        Ok(out)
    }

    pub fn run_one(&self, property: Property, n: usize) -> Result<PropertyOutcome> {
        let cfg = ProblemConfig::new(n, 1)?;
        // One stream per (property, n) so each check is reproducible alone.
        let stream = self.seed ^ ((n as u64) << 32) ^ (property as u64 + 1);
        let mut rng = FixtureRng::new(stream);
        let trials = if property == Property::FlopCount {
            1
        } else {
            self.trials
        };
        let mut worst = 0.0_f64;
        for _ in 0..trials {
            let err = match property {
                Property::DenseOracle => {
                    let (u, g, d) = (rng.field(n), rng.geom(n), self.deriv(&mut rng, n));
                    let w = ax_element(&u, &g, &d, &cfg)?;
                    // oracle must be built from the uncorrupted d only
                    let expect = apply_dense(&dense_operator(&g, &d), &u);
                    relative_inf_error(w.values(), expect.values())
                }
                Property::Adjointness => {
                    let d = self.deriv(&mut rng, n);
                    let u = rng.field(n);
                    let v = GradTriple::new(rng.field(n), rng.field(n), rng.field(n))?;
                    let gu = local_grad3(&u, &d, &cfg)?;
                    let gtv = local_grad3_t(&v, &d, &cfg)?;
                    let lhs = gu.dot(&v);
                    let rhs = u.dot(&gtv);
                    let scale = norm(&triple_values(&gu)) * norm(&triple_values(&v));
                    (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE)
                }
                Property::Symmetry => {
                    let d = self.deriv(&mut rng, n);
                    let g = rng.geom_spd(n);
                    let (u, v) = (rng.field(n), rng.field(n));
                    let au = ax_element(&u, &g, &d, &cfg)?;
                    let av = ax_element(&v, &g, &d, &cfg)?;
                    let scale = (norm(au.values()) * norm(v.values())).max(norm(u.values()) * norm(av.values()));
                    (au.dot(&v) - u.dot(&av)).abs() / scale.max(f64::MIN_POSITIVE)
                }
                Property::Linearity => {
                    let d = self.deriv(&mut rng, n);
                    let g = rng.geom(n);
                    let (u, v) = (rng.field(n), rng.field(n));
                    let (alpha, beta) = (2.5 * rng.uniform(), -1.5 * rng.uniform());
                    let lhs = ax_element(&u.combine(alpha, &v, beta), &g, &d, &cfg)?;
                    let au = ax_element(&u, &g, &d, &cfg)?;
                    let av = ax_element(&v, &g, &d, &cfg)?;
                    let rhs = au.combine(alpha, &av, beta);
                    let scale = (alpha.abs() * au.max_abs() + beta.abs() * av.max_abs()).max(rhs.max_abs());
                    let diff = relative_inf_error(lhs.values(), rhs.values()) * rhs.max_abs();
                    diff / scale.max(f64::MIN_POSITIVE)
                }
                Property::FlopCount => {
                    let (u, g, d) = (rng.field(n), rng.geom(n), self.deriv(&mut rng, n));
                    let run = count_ax_element(&u, &g, &d)?;
                    let plain = ax_element(&u, &g, &d, &cfg)?;
                    let expected = flops_per_element(n)?;
                    let mismatch = run.operations.abs_diff(expected) as f64;
                    if run.output != plain {
                        f64::INFINITY
                    } else {
                        mismatch
                    }
                }
            };
            worst = worst.max(err);
        }
        let passed = match property {
            Property::FlopCount => worst == 0.0,
            _ => worst <= self.tolerance,
        };
        Ok(PropertyOutcome {
            property,
            n,
            trials,
            worst,
            passed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_operator_matches_kernel_small() {
        let mut rng = FixtureRng::new(3);
        let (u, g, d) = (rng.field(2), rng.geom_spd(2), rng.deriv(2));
        let cfg = ProblemConfig::new(2, 1).unwrap();
        let w = ax_element(&u, &g, &d, &cfg).unwrap();
        let expect = apply_dense(&dense_operator(&g, &d), &u);
        assert!(relative_inf_error(w.values(), expect.values()) < 1e-13);
    }

    #[test]
    fn dense_operator_is_symmetric_for_symmetric_geometry() {
        let mut rng = FixtureRng::new(4);
        let (g, d) = (rng.geom_spd(3), rng.deriv(3));
        let op = dense_operator(&g, &d);
        let np = 27;
        for r in 0..np {
            for c in 0..np {
                assert!((op[r * np + c] - op[c * np + r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn suite_passes_with_consistent_derivative() {
        let suite = PropertySuite {
            trials: 10,
            ..Default::default()
        };
        for o in suite.run().unwrap() {
            assert!(o.passed, "{} n={} worst={}", o.property, o.n, o.worst);
        }
    }

    #[test]
    fn corrupted_transpose_breaks_adjointness() {
        let suite = PropertySuite {
            trials: 5,
            corrupt_transpose: true,
            ..Default::default()
        };
        let o = suite.run_one(Property::Adjointness, 3).unwrap();
        assert!(!o.passed);
    }
}
