use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::Point;

/// Metric on parameter points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// Euclidean norm of the entry-wise difference (Frobenius for matrices).
    EuclideanVector,
    /// Operator norm induced by the Euclidean norm.
    SpectralNormMatrix,
    /// `|a - b|` on scalars.
    AbsoluteScalar,
}

impl Distance {
    pub fn eval(self, a: &Point, b: &Point) -> f64 {
        let diff = a - b;
        match self {
            Distance::EuclideanVector => diff.norm(),
            Distance::SpectralNormMatrix => spectral_norm(&diff),
            Distance::AbsoluteScalar => diff[(0, 0)].abs(),
        }
    }

    /// `eval(a, b) >= eps`, skipping the exact norm when Frobenius bounds decide it.
    pub fn at_least(self, a: &Point, b: &Point, eps: f64) -> bool {
        match self {
            Distance::SpectralNormMatrix => {
                let diff = a - b;
                let fro = diff.norm();
                if fro < eps {
                    return false;
                }
                let rank_bound = diff.nrows().min(diff.ncols()).max(1) as f64;
                if fro / rank_bound.sqrt() >= eps {
                    return true;
                }
                spectral_norm(&diff) >= eps
            }
            _ => self.eval(a, b) >= eps,
        }
    }

    /// Norm of a single point (distance to the origin).
    pub fn norm(self, a: &Point) -> f64 {
        match self {
            Distance::EuclideanVector => a.norm(),
            Distance::SpectralNormMatrix => spectral_norm(a),
            Distance::AbsoluteScalar => a[(0, 0)].abs(),
        }
    }
}

/// A finite candidate set inside a metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpaceSpec {
    distance: Distance,
    candidates: Vec<Point>,
    ambient_dim: usize,
}

impl MetricSpaceSpec {
    pub fn from_points(distance: Distance, candidates: Vec<Point>) -> Result<Self> {
        let first = candidates
            .first()
            .ok_or_else(|| Error::InvalidArgument("candidate set is empty".into()))?;
        let shape = first.shape();
        if candidates.iter().any(|c| c.shape() != shape) {
            return Err(Error::DimensionMismatch("candidates have different shapes".into()));
        }
        if distance == Distance::AbsoluteScalar && shape != (1, 1) {
            return Err(Error::DimensionMismatch("absolute distance needs scalar points".into()));
        }
        Ok(MetricSpaceSpec {
            distance,
            ambient_dim: shape.0 * shape.1,
            candidates,
        })
    }

    /// Scalars `values` under `|a - b|`.
    pub fn scalars(values: &[f64]) -> Result<Self> {
        Self::from_points(
            Distance::AbsoluteScalar,
            values.iter().map(|v| DMatrix::from_element(1, 1, *v)).collect(),
        )
    }

    /// Grid of spacing `resolution` over the ball `{x : ||x|| <= radius}` of
    /// `rows x cols` points, in lexicographic order of grid coordinates.
    pub fn ball_grid(distance: Distance, rows: usize, cols: usize, radius: f64, resolution: f64) -> Result<Self> {
        if !(radius > 0.0 && resolution > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radius and resolution must be positive, got {radius} and {resolution}"
            )));
        }
        let dim = rows * cols;
        if dim == 0 {
            return Err(Error::InvalidArgument("empty point shape".into()));
        }
        let k = (radius / resolution + 1e-9).floor() as i64;
        let side = (2 * k + 1) as usize;
        let total = (side as f64).powi(dim as i32);
        if total > 5e6 {
            return Err(Error::BudgetExceeded {
                required: total,
                budget: 5e6,
            });
        }
        let mut candidates = Vec::new();
        let mut idx = vec![0usize; dim];
        loop {
            // Entry j of the point is idx[j]; row-major order matches lexicographic coordinates.
            let coords: Vec<f64> = idx.iter().map(|&i| (i as i64 - k) as f64 * resolution).collect();
            let p = DMatrix::from_row_slice(rows, cols, &coords);
            if distance.norm(&p) <= radius * (1.0 + 1e-12) {
                candidates.push(p);
            }
            let mut j = dim;
            loop {
                if j == 0 {
                    return Self::from_points(distance, candidates);
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < side {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    /// The spectral-norm unit ball of `n x n` matrices on a grid.
    pub fn spectral_ball(n: usize, resolution: f64) -> Result<Self> {
        Self::ball_grid(Distance::SpectralNormMatrix, n, n, 1.0, resolution)
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    pub fn candidates(&self) -> &[Point] {
        &self.candidates
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.candidates.iter().enumerate() {
            for b in &self.candidates[i + 1..] {
                d = d.max(self.distance.eval(a, b));
            }
        }
        d
    }
}
