use serde::{Deserialize, Serialize};

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl MeanEstimate {
    pub const ZERO: MeanEstimate = MeanEstimate {
        mean: 0.0,
        std_error: 0.0,
    };

    pub fn exact(value: f64) -> Self {
        MeanEstimate {
            mean: value,
            std_error: 0.0,
        }
    }

    /// Sample mean and `s / sqrt(n)` with the unbiased sample deviation.
    /// Accumulates in slice order so the result is reproducible bit for bit.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return MeanEstimate::ZERO;
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return MeanEstimate::exact(mean);
        }
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        let var = ss / (n - 1) as f64;
        MeanEstimate {
            mean,
            std_error: (var / n as f64).sqrt(),
        }
    }

    /// Bernoulli proportion with the plug-in standard error.
    pub fn proportion(successes: usize, trials: usize) -> Self {
        if trials == 0 {
            return MeanEstimate::ZERO;
        }
        let p = successes as f64 / trials as f64;
        MeanEstimate {
            mean: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}
