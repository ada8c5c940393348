use serde::Serialize;

use super::curve::{CurveSource, EntropyCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalSeparation {
    pub sigma: f64,
    /// `ceil(2 (budget + ln 2))` nats.
    pub target_entropy: f64,
    pub entropy_at_sigma: f64,
    /// Sampled separations around the crossing when it falls between samples.
    pub bracket: Option<(f64, f64)>,
}

pub fn target_entropy(divergence_budget: f64) -> f64 {
    (2.0 * (divergence_budget + std::f64::consts::LN_2)).ceil()
}

/// Largest separation whose entropy reaches `ceil(2 (budget + ln 2))`.
/// Analytic curves are inverted exactly; sampled curves are searched.
pub fn critical_separation(curve: &EntropyCurve, divergence_budget: f64) -> Result<CriticalSeparation> {
    if !(divergence_budget >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "divergence budget must be nonnegative, got {divergence_budget}"
        )));
    }
    let target = target_entropy(divergence_budget);
    if let CurveSource::AnalyticFormula { offset, coefficient } = curve.source {
        if coefficient <= 0.0 {
            if offset >= target {
                return Err(Error::InvalidArgument("flat curve exceeds target at every separation".into()));
            }
            return Err(Error::NoSeparation { target, max: offset });
        }
        return Ok(CriticalSeparation {
            sigma: (-(target - offset) / coefficient).exp(),
            target_entropy: target,
            entropy_at_sigma: target,
            bracket: None,
        });
    }
    let s = &curve.samples;
    if s.is_empty() {
        return Err(Error::InvalidArgument("entropy curve is empty".into()));
    }
    if !curve.is_nonincreasing() {
        return Err(Error::InvalidArgument("entropy curve is not nonincreasing".into()));
    }
    let above = s.partition_point(|x| x.entropy_nats >= target);
    if above == 0 {
        return Err(Error::NoSeparation {
            target,
            max: s[0].entropy_nats,
        });
    }
    let i = above - 1;
    Ok(CriticalSeparation {
        sigma: s[i].epsilon,
        target_entropy: target,
        entropy_at_sigma: s[i].entropy_nats,
        bracket: s.get(i + 1).map(|n| (s[i].epsilon, n.epsilon)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyCap {
    /// Integer-valued entropy cap in nats.
    pub cap: f64,
    /// Separation `5 beta_T^{1/k}` at which the cap applies.
    pub scale: f64,
}

/// `H(5 beta_T^{1/k}) <= ceil(2 (K sum_{t=1}^T beta_{t-1} + ln 2))`.
/// `betas` holds `beta_0..beta_T`.
pub fn entropy_cap_from_rates(k_const: f64, k_exp: f64, betas: &[f64], horizon: usize) -> Result<EntropyCap> {
    if betas.is_empty() {
        return Err(Error::InvalidArgument("rate sequence is empty".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if betas.len() < horizon + 1 {
        return Err(Error::InvalidArgument(format!(
            "need rates beta_0..beta_{horizon}, got {} values",
            betas.len()
        )));
    }
    if !(k_const >= 0.0) || !(k_exp >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need K >= 0 and k >= 1, got K = {k_const}, k = {k_exp}"
        )));
    }
    if betas.iter().any(|b| !(*b > 0.0)) || betas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("rates must be positive and nonincreasing".into()));
    }
    let sum: f64 = betas[..horizon].iter().sum();
    Ok(EntropyCap {
        cap: target_entropy(k_const * sum),
        scale: 5.0 * betas[horizon].powf(1.0 / k_exp),
    })
}
