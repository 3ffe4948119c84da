use std::fmt;

use thiserror::Error;

const SYMMETRY_TOL: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelationError {
    #[error("correlation matrix must be 2d×2d with d ≥ 1, got {rows}×{cols}")]
    DimensionMismatch { rows: usize, cols: usize },
    #[error("correlation matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("diagonal entry {index} is {value}, expected 1")]
    BadDiagonal { index: usize, value: f64 },
    #[error("correlation entry ({i}, {j}) = {value} lies outside [-1, 1]")]
    OutOfRange { i: usize, j: usize, value: f64 },
    #[error("correlation matrix is not positive definite (pivot {pivot:e} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },
}

/// Small dense row-major square matrix.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics unless `data.len() == n²`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "expected {} entries", n * n);
        Self { n, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "ragged matrix");
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &SquareMatrix) -> Self {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(self.n)) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Upper-left `k×k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        let mut out = Self::zeros(k);
        for i in 0..k {
            for j in 0..k {
                out[(i, j)] = self[(i, j)];
            }
        }
        out
    }

    /// Index-reversal similarity `PAP` with `P` the anti-identity.
    fn reversed(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(n - 1 - i, n - 1 - j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks_exact(self.n.max(1))).finish()
    }
}

/// Lower Cholesky factor; fails on a pivot ≤ `PIVOT_TOL`.
fn cholesky_lower(a: &SquareMatrix) -> Result<SquareMatrix, CorrelationError> {
    let n = a.dim();
    let mut l = SquareMatrix::zeros(n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > PIVOT_TOL) {
            return Err(CorrelationError::NotPositiveDefinite { column: j, pivot });
        }
        let diag = pivot.sqrt();
        l[(j, j)] = diag;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / diag;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
fn invert_lower(l: &SquareMatrix) -> SquareMatrix {
    let n = l.dim();
    let mut inv = SquareMatrix::zeros(n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv
}

/// Correlation of the `2d` Brownian drivers and every factor derived from it.
///
/// Rows/columns `0..d` are the price drivers `Bˢ`, rows `d..2d` the
/// volatility drivers `Bʸ`.
#[derive(Debug, Clone)]
pub struct CorrelationStructure {
    assets: usize,
    sigma: SquareMatrix,
    lower: SquareMatrix,
    upper: SquareMatrix,
    upper_inv: SquareMatrix,
    mixing: SquareMatrix,
    lower_block_inv: SquareMatrix,
    beta: Vec<f64>,
}

impl CorrelationStructure {
    /// Validate `Σ` and compute `L`, `𝒰`, `ρ = L⁻¹𝒰`, `L₁₁⁻¹` and `β`.
    pub fn new(sigma: SquareMatrix) -> Result<Self, CorrelationError> {
        let n = sigma.dim();
        if n == 0 || n % 2 != 0 {
            return Err(CorrelationError::DimensionMismatch { rows: n, cols: n });
        }
        for i in 0..n {
            let v = sigma[(i, i)];
            if !((v - 1.0).abs() <= SYMMETRY_TOL) {
                return Err(CorrelationError::BadDiagonal { index: i, value: v });
            }
            for j in 0..n {
                let (a, b) = (sigma[(i, j)], sigma[(j, i)]);
                if !((a - b).abs() <= SYMMETRY_TOL) {
                    return Err(CorrelationError::NotSymmetric { i, j, a, b });
                }
                if !(a.abs() <= 1.0 + SYMMETRY_TOL) {
                    return Err(CorrelationError::OutOfRange { i, j, value: a });
                }
            }
        }

        let lower = cholesky_lower(&sigma)?;
        // Upper factor: lower Cholesky of the index-reversed matrix, reversed back.
        let upper = cholesky_lower(&sigma.reversed())?.reversed();
        let lower_inv = invert_lower(&lower);
        let upper_inv = invert_lower(&upper.reversed()).reversed();
        let mixing = lower_inv.matmul(&upper);

        let d = n / 2;
        // The inverse of a lower-triangular matrix restricted to its leading
        // block is the inverse of the leading block.
        let lower_block_inv = lower_inv.leading_block(d);
        let beta = (0..d).map(|k| -(0..d).map(|j| mixing[(j, 0)] * lower_block_inv[(j, k)]).sum::<f64>()).collect();

        Ok(Self { assets: d, sigma, lower, upper, upper_inv, mixing, lower_block_inv, beta })
    }

    /// Uncorrelated drivers for `d` assets.
    pub fn independent(assets: usize) -> Self {
        Self::new(SquareMatrix::identity(2 * assets)).expect("identity is a valid correlation")
    }

    /// Number of assets `d`.
    pub fn assets(&self) -> usize {
        self.assets
    }

    /// Number of Brownian drivers `2d`.
    pub fn dim(&self) -> usize {
        2 * self.assets
    }

    pub fn sigma(&self) -> &SquareMatrix {
        &self.sigma
    }

    /// `L` with `LLᵀ = Σ`.
    pub fn lower(&self) -> &SquareMatrix {
        &self.lower
    }

    /// `𝒰` with `𝒰𝒰ᵀ = Σ`.
    pub fn upper(&self) -> &SquareMatrix {
        &self.upper
    }

    pub fn upper_inverse(&self) -> &SquareMatrix {
        &self.upper_inv
    }

    /// Orthogonal `ρ = L⁻¹𝒰` with `W = ρW̃`.
    pub fn mixing(&self) -> &SquareMatrix {
        &self.mixing
    }

    /// Inverse of the leading `d×d` block of `L`.
    pub fn lower_block_inverse(&self) -> &SquareMatrix {
        &self.lower_block_inv
    }

    /// `β_k = −Σ_j ρ_{j,1} ℓ⁽⁻¹⁾_{j,k}`.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn u11(&self) -> f64 {
        self.upper[(0, 0)]
    }

    pub fn u12(&self) -> f64 {
        self.upper[(0, 1)]
    }

    /// True when the volatility drivers are mutually independent and
    /// independent of the price drivers (`Σ = diag(Σ_SS, I)`).
    pub fn volatility_block_is_isolated(&self) -> bool {
        let d = self.assets;
        let n = 2 * d;
        (d..n).all(|i| {
            (0..n).all(|j| {
                let target = if i == j { 1.0 } else { 0.0 };
                (self.sigma[(i, j)] - target).abs() <= SYMMETRY_TOL
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(r: f64) -> CorrelationStructure {
        CorrelationStructure::new(SquareMatrix::from_rows(&[&[1.0, r], &[r, 1.0]])).unwrap()
    }

    #[test]
    fn identity_gives_trivial_factors() {
        let c = CorrelationStructure::independent(1);
        let id = SquareMatrix::identity(2);
        assert_eq!(c.lower(), &id);
        assert_eq!(c.upper(), &id);
        assert_eq!(c.mixing(), &id);
        assert_eq!(c.u11(), 1.0);
        assert_eq!(c.beta(), &[-1.0]);

        let c3 = CorrelationStructure::independent(3);
        assert_eq!(c3.beta(), &[-1.0, 0.0, 0.0]);
    }

    #[test]
    fn closed_form_two_by_two() {
        let c = two_by_two(0.5);
        let l = c.lower();
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(l[(0, 1)], 0.0);
        assert!((l[(1, 0)] - 0.5).abs() < 1e-15);
        assert!((l[(1, 1)] - 0.75f64.sqrt()).abs() < 1e-15);

        for r in [-0.9, -0.3, 0.2, 0.7] {
            let c = two_by_two(r);
            let u = c.upper();
            assert!((u[(0, 0)] - (1.0 - r * r).sqrt()).abs() < 1e-14);
            assert!((u[(0, 1)] - r).abs() < 1e-14);
            assert_eq!(u[(1, 0)], 0.0);
            assert!((u[(1, 1)] - 1.0).abs() < 1e-14);
            assert!((c.u11() - (1.0 - r * r).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn factor_identities_on_a_4x4() {
        let sigma =
            SquareMatrix::from_rows(&[&[1.0, 0.3, -0.4, 0.1], &[0.3, 1.0, 0.2, -0.25], &[-0.4, 0.2, 1.0, 0.5], &[0.1, -0.25, 0.5, 1.0]]);
        let c = CorrelationStructure::new(sigma.clone()).unwrap();
        let l = c.lower();
        let u = c.upper();
        assert!(l.matmul(&l.transpose()).max_abs_diff(&sigma) < 1e-12);
        assert!(u.matmul(&u.transpose()).max_abs_diff(&sigma) < 1e-12);
        for i in 0..4 {
            assert!(l[(i, i)] > 0.0 && u[(i, i)] > 0.0);
            for j in 0..4 {
                if j > i {
                    assert_eq!(l[(i, j)], 0.0);
                }
                if j < i {
                    assert_eq!(u[(i, j)], 0.0);
                }
            }
        }
        let rho = c.mixing();
        assert!(rho.matmul(&rho.transpose()).max_abs_diff(&SquareMatrix::identity(4)) < 1e-12);
        assert!(u.matmul(c.upper_inverse()).max_abs_diff(&SquareMatrix::identity(4)) < 1e-12);
        let block = l.leading_block(2);
        assert!(block.matmul(c.lower_block_inverse()).max_abs_diff(&SquareMatrix::identity(2)) < 1e-12);
        assert!(!c.volatility_block_is_isolated());
    }

    #[test]
    fn validation_errors() {
        let bad_diag = SquareMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.9]]);
        assert!(matches!(CorrelationStructure::new(bad_diag), Err(CorrelationError::BadDiagonal { index: 1, .. })));

        let asym = SquareMatrix::from_rows(&[&[1.0, 0.2], &[0.1, 1.0]]);
        assert!(matches!(CorrelationStructure::new(asym), Err(CorrelationError::NotSymmetric { .. })));

        let singular = SquareMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(CorrelationStructure::new(singular), Err(CorrelationError::NotPositiveDefinite { column: 1, .. })));

        let odd = SquareMatrix::identity(3);
        assert!(matches!(CorrelationStructure::new(odd), Err(CorrelationError::DimensionMismatch { .. })));

        let indefinite =
            SquareMatrix::from_rows(&[&[1.0, 0.9, 0.9, 0.0], &[0.9, 1.0, -0.9, 0.0], &[0.9, -0.9, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        assert!(matches!(CorrelationStructure::new(indefinite), Err(CorrelationError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn price_only_correlation_keeps_volatility_isolated() {
        let sigma = SquareMatrix::from_rows(&[&[1.0, 0.6, 0.0, 0.0], &[0.6, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        let c = CorrelationStructure::new(sigma).unwrap();
        assert!(c.volatility_block_is_isolated());
        assert!(CorrelationStructure::independent(2).volatility_block_is_isolated());
        assert!(!two_by_two(0.1).volatility_block_is_isolated());
    }
}
