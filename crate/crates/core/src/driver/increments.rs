use super::correlation::{CorrelationError, SquareMatrix};
use super::{CorrelationStructure, PathRng, TimeGrid};

/// Dense row-major matrix; rows are driver components, columns time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        let n = rows.len();
        Self { rows: n, cols, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `out[i, :] = Σ_k a[row_offset + i, k] · self[k, :]`.
    fn left_multiply(&self, a: &SquareMatrix, row_offset: usize, out_rows: usize) -> RowMatrix {
        let mut out = RowMatrix::zeros(out_rows, self.cols);
        for i in 0..out_rows {
            let coeffs = a.row(row_offset + i);
            let dst = out.row_mut(i);
            for (k, &c) in coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (d, s) in dst.iter_mut().zip(self.row(k)) {
                    *d += c * s;
                }
            }
        }
        out
    }
}

/// Increments `ΔW̃_j(t_n)` of the canonical independent Brownian motion.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverIncrements {
    inner: RowMatrix,
}

impl DriverIncrements {
    pub fn from_matrix(inner: RowMatrix) -> Self {
        Self { inner }
    }

    pub fn matrix(&self) -> &RowMatrix {
        &self.inner
    }

    /// Row `j` (0-based) of `ΔW̃`.
    pub fn row(&self, j: usize) -> &[f64] {
        self.inner.row(j)
    }

    pub fn components(&self) -> usize {
        self.inner.rows()
    }

    pub fn steps(&self) -> usize {
        self.inner.cols()
    }

    pub fn into_matrix(self) -> RowMatrix {
        self.inner
    }
}

/// Correlated views derived from one [`DriverIncrements`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixedIncrements {
    /// `ΔBˢ`, `d × N`.
    pub price: RowMatrix,
    /// `ΔBʸ`, `d × N`.
    pub volatility: RowMatrix,
    /// `ΔW = ρ ΔW̃`, `2d × N`.
    pub lower: RowMatrix,
}

/// Draw `2d × N` independent `N(0, Δ_N)` increments, row by row.
pub fn sample_driver(grid: &TimeGrid, components: usize, rng: &mut PathRng) -> DriverIncrements {
    let n = grid.steps();
    let mut m = RowMatrix::zeros(components, n);
    let scale = grid.dt().sqrt();
    for j in 0..components {
        rng.fill_normal(m.row_mut(j), scale);
    }
    DriverIncrements { inner: m }
}

/// `ΔB = 𝒰 ΔW̃` split into price and volatility rows, and `ΔW = ρ ΔW̃`.
pub fn mix_increments(corr: &CorrelationStructure, dw: &DriverIncrements) -> Result<MixedIncrements, CorrelationError> {
    let n = corr.dim();
    if dw.components() != n {
        return Err(CorrelationError::DimensionMismatch { rows: dw.components(), cols: n });
    }
    let d = corr.assets();
    let m = dw.matrix();
    Ok(MixedIncrements {
        price: m.left_multiply(corr.upper(), 0, d),
        volatility: m.left_multiply(corr.upper(), d, d),
        lower: m.left_multiply(corr.mixing(), 0, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::StreamFactory;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn sampling_is_reproducible() {
        let f = StreamFactory::new(7);
        let a = sample_driver(&grid(4), 2, &mut f.path(0));
        let b = sample_driver(&grid(4), 2, &mut f.path(0));
        assert_eq!(a, b);
        assert_eq!(a.components(), 2);
        assert_eq!(a.steps(), 4);
    }

    #[test]
    fn empty_grid_gives_empty_matrix() {
        let dw = sample_driver(&grid(0), 2, &mut StreamFactory::new(1).path(0));
        assert_eq!(dw.steps(), 0);
        assert_eq!(dw.row(1), &[] as &[f64]);
    }

    #[test]
    fn sample_mean_within_clt_bound() {
        // 10⁶ draws of N(0, 0.01): sd of the mean is 0.1/10³.
        let g = TimeGrid::new(10_000.0, 1_000_000).unwrap();
        let dw = sample_driver(&g, 1, &mut StreamFactory::new(2024).path(0));
        let mean = dw.row(0).iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 4.0 * 0.1 / 1e3, "mean {mean}");
        let var = dw.row(0).iter().map(|x| x * x).sum::<f64>() / 1e6;
        assert!((var - 0.01).abs() < 0.01 * 4.0 * (2.0f64 / 1e6).sqrt(), "var {var}");
    }

    #[test]
    fn identity_mixing_is_exact() {
        let c = CorrelationStructure::independent(1);
        let dw = sample_driver(&grid(16), 2, &mut StreamFactory::new(3).path(9));
        let m = mix_increments(&c, &dw).unwrap();
        assert_eq!(m.price.row(0), dw.row(0));
        assert_eq!(m.volatility.row(0), dw.row(1));
        assert_eq!(&m.lower, dw.matrix());
    }

    #[test]
    fn empirical_correlation_matches_sigma() {
        let sigma = 0.6;
        let c = CorrelationStructure::new(SquareMatrix::from_rows(&[&[1.0, sigma], &[sigma, 1.0]])).unwrap();
        let dw = sample_driver(&grid(100_000), 2, &mut StreamFactory::new(11).path(0));
        let m = mix_increments(&c, &dw).unwrap();
        let (a, b) = (m.price.row(0), m.volatility.row(0));
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let corr = dot(a, b) / (dot(a, a) * dot(b, b)).sqrt();
        assert!((corr - sigma).abs() < 0.02, "corr {corr}");
    }

    #[test]
    fn zero_column_maps_to_zero() {
        let c = CorrelationStructure::new(SquareMatrix::from_rows(&[&[1.0, -0.4], &[-0.4, 1.0]])).unwrap();
        let dw = DriverIncrements::from_matrix(RowMatrix::zeros(2, 1));
        let m = mix_increments(&c, &dw).unwrap();
        assert!(m.price.row(0).iter().chain(m.volatility.row(0)).chain(m.lower.row(1)).all(|&x| x == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let c = CorrelationStructure::independent(2);
        let dw = DriverIncrements::from_matrix(RowMatrix::zeros(2, 3));
        assert!(matches!(mix_increments(&c, &dw), Err(CorrelationError::DimensionMismatch { .. })));
    }

    #[test]
    fn volatility_rows_ignore_first_component_and_round_trip() {
        let sigma =
            SquareMatrix::from_rows(&[&[1.0, 0.3, -0.4, 0.1], &[0.3, 1.0, 0.2, -0.25], &[-0.4, 0.2, 1.0, 0.5], &[0.1, -0.25, 0.5, 1.0]]);
        let c = CorrelationStructure::new(sigma).unwrap();
        let dw = sample_driver(&grid(32), 4, &mut StreamFactory::new(5).path(1));
        let base = mix_increments(&c, &dw).unwrap();

        let mut bumped = dw.matrix().clone();
        for x in bumped.row_mut(0) {
            *x += 1.0;
        }
        let bumped = mix_increments(&c, &DriverIncrements::from_matrix(bumped)).unwrap();
        assert_eq!(base.volatility, bumped.volatility);

        // 𝒰 (𝒰⁻¹ ΔB) = ΔB column by column
        let mut b = vec![0.0; 4];
        let mut back = vec![0.0; 4];
        let mut again = vec![0.0; 4];
        for n in 0..32 {
            for i in 0..2 {
                b[i] = base.price.get(i, n);
                b[2 + i] = base.volatility.get(i, n);
            }
            c.upper_inverse().apply(&b, &mut back);
            c.upper().apply(&back, &mut again);
            for i in 0..4 {
                assert!((again[i] - b[i]).abs() < 1e-10);
                assert!((back[i] - dw.matrix().get(i, n)).abs() < 1e-10);
            }
        }
    }
}
