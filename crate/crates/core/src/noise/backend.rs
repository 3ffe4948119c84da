use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt::factor::{cholesky_in_place, cholesky_in_place_scratch};
use faer::linalg::matmul::triangular::{matmul, BlockStructure};
use faer::{Accum, Mat, MatRef, Par};

use super::{fbm_increment_covariance, KernelSpec, NoiseError};
use crate::driver::TimeGrid;

const JITTER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendMode {
    /// Cholesky factor of the exact fBm increment covariance.
    Exact,
    /// Midpoint kernel quadrature against `ΔBʸ`.
    Quadrature,
}

/// Precomputed linear map from driving randomness to `Z` on the grid.
///
/// Both variants store an `N×N` lower-triangular matrix:
/// * `Exact`: the factor `L` of the increment covariance, so that
///   `ΔZ = L·ξ` for standard normals `ξ`;
/// * `Quadrature`: entry `(n−1, k) = 𝒦(t_n, (t_k+t_{k+1})/2)`, so that
///   `Z(t_n)` is row `n−1` applied to `ΔBʸ`.
#[derive(Debug, Clone)]
pub struct NoiseBackend {
    grid: TimeGrid,
    mode: BackendMode,
    loading: Mat<f64>,
}

impl NoiseBackend {
    pub fn build(spec: &KernelSpec, grid: &TimeGrid, mode: BackendMode) -> Result<Self, NoiseError> {
        let loading = match (mode, spec) {
            (BackendMode::Exact, KernelSpec::FbmMolchanGolosov { hurst }) => exact_factor(grid, *hurst)?,
            (BackendMode::Exact, KernelSpec::Generic { .. }) => return Err(NoiseError::UnsupportedCombination),
            (BackendMode::Quadrature, spec) => quadrature_table(spec, grid)?,
        };
        Ok(Self { grid: *grid, mode, loading })
    }

    pub fn mode(&self) -> BackendMode {
        self.mode
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// The stored lower-triangular map (see type docs).
    pub fn loading(&self) -> MatRef<'_, f64> {
        self.loading.as_ref()
    }

    /// Quadrature weight `𝒦(t_n, s_k*)` for node `n ∈ 0..=N`; zero for `k ≥ n`.
    pub fn table_entry(&self, n: usize, k: usize) -> Option<f64> {
        match self.mode {
            BackendMode::Quadrature if k < n => Some(self.loading[(n - 1, k)]),
            BackendMode::Quadrature => Some(0.0),
            BackendMode::Exact => None,
        }
    }

    /// `Z` on the `N+1` grid nodes for one path.
    ///
    /// `input` holds `N` fresh standard normals (exact mode) or the
    /// volatility driver increments `ΔBʸ_i` (quadrature mode).
    pub fn generate(&self, input: &[f64]) -> Result<Vec<f64>, NoiseError> {
        let n = self.grid.steps();
        if input.len() != n {
            return Err(NoiseError::DimensionMismatch { expected: n, got: input.len() });
        }
        let mut y = vec![0.0; n];
        // column-oriented lower-triangular matvec
        for (k, &x) in input.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let col = self.loading.col(k);
            for (row, out) in y.iter_mut().enumerate().skip(k) {
                *out += col[row] * x;
            }
        }
        Ok(self.to_nodes(y.into_iter()))
    }

    /// Batched [`generate`](Self::generate): column `b` of `inputs` (`N×B`)
    /// maps to column `b` of the `(N+1)×B` result.
    pub fn generate_batch(&self, inputs: MatRef<'_, f64>) -> Result<Mat<f64>, NoiseError> {
        let n = self.grid.steps();
        if inputs.nrows() != n {
            return Err(NoiseError::DimensionMismatch { expected: n, got: inputs.nrows() });
        }
        let b = inputs.ncols();
        let mut y = Mat::<f64>::zeros(n, b);
        if n > 0 && b > 0 {
            matmul(
                y.as_mut(),
                BlockStructure::Rectangular,
                Accum::Replace,
                self.loading.as_ref(),
                BlockStructure::TriangularLower,
                inputs,
                BlockStructure::Rectangular,
                1.0,
                Par::Seq,
            );
            clear_upper_vector_state();
        }
        let mut out = Mat::<f64>::zeros(n + 1, b);
        for j in 0..b {
            let col = y.col(j);
            let nodes = self.to_nodes((0..n).map(|i| col[i]));
            for (i, v) in nodes.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    fn to_nodes(&self, y: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.grid.steps() + 1);
        z.push(0.0);
        match self.mode {
            BackendMode::Exact => {
                let mut acc = 0.0;
                for dz in y {
                    acc += dz;
                    z.push(acc);
                }
            }
            BackendMode::Quadrature => z.extend(y),
        }
        z
    }
}

/// The matmul kernels leave the upper halves of the AVX registers dirty,
/// which makes every later SSE instruction on this thread (including libm
/// `exp`) pay a transition penalty. `vzeroupper` resets that state.
#[inline]
fn clear_upper_vector_state() {
    #[cfg(target_arch = "x86_64")]
    {
        #[target_feature(enable = "avx")]
        unsafe fn zero_upper() {
            std::arch::x86_64::_mm256_zeroupper();
        }
        if std::arch::is_x86_feature_detected!("avx") {
            // SAFETY: guarded by the runtime feature check above.
            unsafe { zero_upper() }
        }
    }
}

fn exact_factor(grid: &TimeGrid, hurst: f64) -> Result<Mat<f64>, NoiseError> {
    let n = grid.steps();
    let mut mem = MemBuffer::new(cholesky_in_place_scratch::<f64>(n, Par::Seq, Default::default()));
    let mut last_index = 0;
    for jitter in [0.0, JITTER] {
        let mut a = fbm_increment_covariance(grid, hurst);
        for i in 0..n {
            a[(i, i)] += jitter;
        }
        let outcome = cholesky_in_place(a.as_mut(), Default::default(), Par::Seq, MemStack::new(&mut mem), Default::default());
        clear_upper_vector_state();
        match outcome {
            Ok(_) => {
                for j in 1..n {
                    for i in 0..j {
                        a[(i, j)] = 0.0;
                    }
                }
                return Ok(a);
            }
            Err(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => last_index = index,
        }
    }
    Err(NoiseError::FactorizationFailure { index: last_index })
}

fn quadrature_table(spec: &KernelSpec, grid: &TimeGrid) -> Result<Mat<f64>, NoiseError> {
    let n = grid.steps();
    let mut table = Mat::<f64>::zeros(n, n);
    let mids: Vec<f64> = (0..n).map(|k| 0.5 * (grid.node(k) + grid.node(k + 1))).collect();
    for row in 0..n {
        let t = grid.node(row + 1);
        for (k, &s) in mids.iter().enumerate().take(row + 1) {
            table[(row, k)] = spec.eval(t, s)?;
        }
    }
    Ok(table)
}
