use super::EstimatorError;

const BLOCK: usize = 64;

/// Pairwise (cascade) summation with a fixed split pattern, so the result
/// depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    /// Unbiased sample standard deviation.
    pub sd: f64,
    pub stderr: f64,
    pub count: usize,
}

pub fn summarize(samples: &[f64]) -> Result<SampleStats, EstimatorError> {
    let m = samples.len();
    if m < 2 {
        return Err(EstimatorError::InsufficientSamples { got: m });
    }
    // shifting by the first sample keeps constant inputs exact
    let shift = samples[0];
    let shifted: Vec<f64> = samples.iter().map(|x| x - shift).collect();
    let mean = shift + pairwise_sum(&shifted) / m as f64;
    let centered: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    let sd = (pairwise_sum(&centered) / (m - 1) as f64).sqrt();
    Ok(SampleStats { mean, sd, stderr: sd / (m as f64).sqrt(), count: m })
}
