use crate::error::{Error, Result};

/// Problem size: `n` points per dimension per element, `nelt` elements.
///
/// "Polynomial order 16" is `n = 16` here (4096 points per element), not
/// the `p + 1` convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemConfig {
    n: usize,
    nelt: usize,
}

impl ProblemConfig {
    pub const STANDARD_N: usize = 16;
    pub const STANDARD_NELT: usize = 800;

    pub fn new(n: usize, nelt: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::contract(format!("n must be at least 2, got {n}")));
        }
        if nelt < 1 {
            return Err(Error::contract("nelt must be at least 1"));
        }
        Ok(Self { n, nelt })
    }

    /// Nekbone's standard test case: 800 elements, 16 points per dimension.
    pub fn standard() -> Self {
        Self {
            n: Self::STANDARD_N,
            nelt: Self::STANDARD_NELT,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nelt(&self) -> usize {
        self.nelt
    }

    pub fn points_per_element(&self) -> usize {
        self.n * self.n * self.n
    }
}

/// One element's worth of grid values in `(i, j, k)` order, `i` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementField {
    n: usize,
    values: Vec<f64>,
}

impl ElementField {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let expected = n * n * n;
        if values.len() != expected {
            return Err(Error::contract(format!(
                "element field for n={n} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!("non-finite value at index {pos}")));
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    values.push(f(i, j, k));
                }
            }
        }
        Self { n, values }
    }

    pub(crate) fn from_raw(n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n * n * n);
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[i + self.n * (j + self.n * k)]
    }

    /// Standard Euclidean inner product over all grid points.
    pub fn dot(&self, other: &ElementField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, alpha: f64) -> ElementField {
        ElementField::from_raw(self.n, self.values.iter().map(|v| alpha * v).collect())
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &ElementField, beta: f64) -> ElementField {
        ElementField::from_raw(
            self.n,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Geometric factors g1..g6 per grid point, stored component-fastest:
/// point `p` occupies `values[6p..6p + 6]`.
///
/// The six entries are the upper triangle of the symmetric metric tensor
/// `[[g1, g2, g3], [g2, g4, g5], [g3, g5, g6]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeomFactors {
    n: usize,
    values: Vec<f64>,
}

impl GeomFactors {
    pub const COMPONENTS: usize = 6;

    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let expected = Self::COMPONENTS * n * n * n;
        if values.len() != expected {
            return Err(Error::contract(format!(
                "geometric factors for n={n} need {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!("non-finite factor at index {pos}")));
        }
        Ok(Self { n, values })
    }

    /// g1 = g4 = g6 = 1, everything else zero.
    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; Self::COMPONENTS * n * n * n];
        for p in values.chunks_exact_mut(Self::COMPONENTS) {
            p[0] = 1.0;
            p[3] = 1.0;
            p[5] = 1.0;
        }
        Self { n, values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; Self::COMPONENTS * n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point(&self, p: usize) -> [f64; 6] {
        let s = &self.values[Self::COMPONENTS * p..Self::COMPONENTS * (p + 1)];
        [s[0], s[1], s[2], s[3], s[4], s[5]]
    }
}

/// Spectral derivative operator `d` (n x n) and its transpose `dt`.
///
/// Both are column-major: `d(i, j) = d[i + n * j]`. The kernel reads `d` and
/// `dt` separately, exactly as Nekbone passes `dxm1` and `dxtm1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivMatrix {
    n: usize,
    d: Vec<f64>,
    dt: Vec<f64>,
}

impl DerivMatrix {
    /// Builds the pair from column-major `d`, deriving `dt`.
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::contract(format!(
                "derivative matrix for n={n} needs {} entries, got {}",
                n * n,
                d.len()
            )));
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("derivative matrix has non-finite entries"));
        }
        let mut dt = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                dt[j + n * i] = d[i + n * j];
            }
        }
        Ok(Self { n, d, dt })
    }

    /// Accepts an arbitrary `(d, dt)` pair without checking `dt = d^T`.
    ///
    /// Only useful for exercising verification against an inconsistent pair;
    /// [`DerivMatrix::is_consistent`] reports whether the invariant holds.
    pub fn from_parts_unchecked(n: usize, d: Vec<f64>, dt: Vec<f64>) -> Result<Self> {
        if d.len() != n * n || dt.len() != n * n {
            return Err(Error::contract("derivative matrices must be n x n"));
        }
        Ok(Self { n, d, dt })
    }

    pub fn identity(n: usize) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i + n * i] = 1.0;
        }
        Self { n, dt: d.clone(), d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn dt(&self) -> &[f64] {
        &self.dt
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i + self.n * j]
    }

    pub fn is_consistent(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.dt[i + self.n * j] == self.d[j + self.n * i]))
    }
}

/// The three reference-direction derivatives `(ur, us, ut)` of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct GradTriple {
    pub ur: ElementField,
    pub us: ElementField,
    pub ut: ElementField,
}

impl GradTriple {
    pub fn new(ur: ElementField, us: ElementField, ut: ElementField) -> Result<Self> {
        if ur.n() != us.n() || ur.n() != ut.n() {
            return Err(Error::contract("gradient components differ in size"));
        }
        Ok(Self { ur, us, ut })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            ur: ElementField::zeros(n),
            us: ElementField::zeros(n),
            ut: ElementField::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.ur.n()
    }

    pub fn dot(&self, other: &GradTriple) -> f64 {
        self.ur.dot(&other.ur) + self.us.dot(&other.us) + self.ut.dot(&other.ut)
    }
}
