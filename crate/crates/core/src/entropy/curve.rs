use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::packing::{greedy_packing, packing_number};
use super::space::{Distance, MetricSpaceSpec};
use crate::error::{Error, Result};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropySample {
    pub epsilon: f64,
    /// Entropy in nats after monotone adjustment.
    pub entropy_nats: f64,
    pub packing_size: Option<u64>,
    /// Entropy before adjustment.
    pub raw_entropy_nats: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSource {
    EmpiricalGreedy,
    /// `H(eps) = offset + coefficient * ln(1/eps)`.
    AnalyticFormula { offset: f64, coefficient: f64 },
    ExactFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyCurve {
    pub samples: Vec<EntropySample>,
    pub source: CurveSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: f64,
    pub rms_residual: f64,
    pub points_used: usize,
}

#[derive(Serialize)]
struct CsvRow {
    epsilon: f64,
    entropy_nats: f64,
    packing_size: Option<u64>,
}

fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("no separations given".into()));
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("separations must be positive".into()));
    }
    if epsilons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("separations must be strictly ascending".into()));
    }
    Ok(())
}

impl EntropyCurve {
    fn from_sizes(epsilons: &[f64], sizes: &[usize], source: CurveSource) -> Self {
        let mut samples: Vec<EntropySample> = epsilons
            .iter()
            .zip(sizes)
            .map(|(&epsilon, &n)| {
                let h = (n as f64).ln();
                EntropySample {
                    epsilon,
                    entropy_nats: h,
                    packing_size: Some(n as u64),
                    raw_entropy_nats: h,
                }
            })
            .collect();
        // A smaller separation always admits at least the packings of a larger one.
        for i in (0..samples.len().saturating_sub(1)).rev() {
            let next = samples[i + 1];
            if next.entropy_nats > samples[i].entropy_nats {
                samples[i].entropy_nats = next.entropy_nats;
                samples[i].packing_size = next.packing_size;
            }
        }
        EntropyCurve { samples, source }
    }

    pub fn analytic(offset: f64, coefficient: f64, epsilons: &[f64]) -> Result<Self> {
        check_epsilons(epsilons)?;
        if coefficient < 0.0 {
            return Err(Error::InvalidArgument("entropy coefficient must be nonnegative".into()));
        }
        let samples = epsilons
            .iter()
            .map(|&epsilon| {
                let h = offset + coefficient * (1.0 / epsilon).ln();
                EntropySample {
                    epsilon,
                    entropy_nats: h,
                    packing_size: None,
                    raw_entropy_nats: h,
                }
            })
            .collect();
        Ok(EntropyCurve {
            samples,
            source: CurveSource::AnalyticFormula { offset, coefficient },
        })
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].entropy_nats <= w[0].entropy_nats)
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.epsilon).collect()
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.entropy_nats).collect()
    }

    /// Least-squares fit of `H = a + b ln(1/eps)` over samples with `eps`
    /// in `[lo, hi]`. A fixed slope fits only the intercept.
    pub fn fit_affine(&self, lo: f64, hi: f64, slope: Option<f64>) -> Result<AffineFit> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.epsilon >= lo && s.epsilon <= hi)
            .map(|s| ((1.0 / s.epsilon).ln(), s.entropy_nats))
            .collect();
        let needed = if slope.is_some() { 1 } else { 2 };
        if pts.len() < needed {
            return Err(Error::InvalidArgument(format!(
                "fit range [{lo}, {hi}] holds {} samples, need {needed}",
                pts.len()
            )));
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let b = match slope {
            Some(b) => b,
            None => {
                let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
                let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
                if sxx == 0.0 {
                    return Err(Error::InvalidArgument("fit range has a single distinct separation".into()));
                }
                sxy / sxx
            }
        };
        let a = my - b * mx;
        let sse: f64 = pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
        Ok(AffineFit {
            intercept: a,
            slope: b,
            rms_residual: (sse / m).sqrt(),
            points_used: pts.len(),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.samples {
            w.serialize(CsvRow {
                epsilon: s.epsilon,
                entropy_nats: s.entropy_nats,
                packing_size: s.packing_size,
            })
            .map_err(|e| Error::InvalidArgument(format!("csv export failed: {e}")))?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("csv export failed: {e}")))?;
        Ok(())
    }
}

/// Greedy entropy curve over ascending separations.
pub fn entropy_curve(space: &MetricSpaceSpec, epsilons: &[f64], seed: u64) -> Result<EntropyCurve> {
    check_epsilons(epsilons)?;
    let sizes = epsilons
        .par_iter()
        .map(|&e| greedy_packing(space, e, seed).map(|p| p.len()))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyCurve::from_sizes(epsilons, &sizes, CurveSource::EmpiricalGreedy))
}

/// Exact entropy of a finite set at each distinct pairwise distance.
pub fn exact_entropy_curve(points: &[Point], distance: Distance) -> Result<EntropyCurve> {
    let mut eps: Vec<f64> = Vec::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = distance.eval(a, b);
            if d > 0.0 {
                eps.push(d);
            }
        }
    }
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.is_empty() {
        return Err(Error::InvalidArgument("need two distinct points".into()));
    }
    let sizes = eps
        .par_iter()
        .map(|&e| packing_number(points, distance, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyCurve::from_sizes(&eps, &sizes, CurveSource::ExactFinite))
}
