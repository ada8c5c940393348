use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::controller::ControllerPolicy;
use crate::kernel::model::SystemModel;
use crate::kernel::trajectory::{sample_trajectory, HistoryView, Obs};
use crate::rng::derive_seed;
use crate::stats::MeanEstimate;

/// Log density (Gaussian kinds) or log mass (tabular) of `y_next` given the
/// history. Returns `-inf` for a zero-probability tabular cell.
pub fn conditional_log_density(model: &SystemModel, y_next: &Obs, history: HistoryView<'_>) -> Result<f64> {
    let (y, u) = history.last_pair()?;
    match model {
        SystemModel::Tabular(m) => {
            let (Some(ys), Some(us), Some(next)) = (y.as_symbol(), u.as_symbol(), y_next.as_symbol()) else {
                return Err(Error::KindMismatch("tabular_finite", "real-valued observation"));
            };
            for (symbol, size) in [(ys, m.alphabet), (next, m.alphabet), (us, m.inputs)] {
                if symbol >= size {
                    return Err(Error::SymbolOutOfRange { symbol, size });
                }
            }
            let p = m.row(ys, us)[next];
            Ok(if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        }
        _ => {
            let (Some(yr), Some(ur), Some(next)) = (y.as_real(), u.as_real(), y_next.as_real()) else {
                return Err(Error::KindMismatch(model.kind().name(), "symbolic observation"));
            };
            let n = model.output_dim();
            if yr.len() != n || ur.len() != n || next.len() != n {
                return Err(Error::DimensionMismatch(format!("observations must have dimension {n}")));
            }
            let var = model.noise_variance().unwrap();
            let mean = model.mean(yr, ur);
            Ok(gaussian_log_density(next, &mean, var))
        }
    }
}

/// `log N(x; mean, var * I)`.
pub fn gaussian_log_density(x: &DVector<f64>, mean: &DVector<f64>, var: f64) -> f64 {
    let n = x.len() as f64;
    -0.5 * n * (2.0 * PI * var).ln() - (x - mean).norm_squared() / (2.0 * var)
}

/// `D(N(m_p, var_p I) || N(m_q, var_q I))`.
pub fn gaussian_kl(mean_p: &DVector<f64>, var_p: f64, mean_q: &DVector<f64>, var_q: f64) -> f64 {
    let n = mean_p.len() as f64;
    let ratio = var_p / var_q;
    0.5 * (n * ratio + (mean_p - mean_q).norm_squared() / var_q - n - n * ratio.ln())
}

/// `sum_y p(y) log(p(y) / q(y))`, erroring when `q` misses mass of `p`.
pub fn discrete_kl(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut d = 0.0;
    for (symbol, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::AbsoluteContinuity { symbol });
            }
            d += pi * (pi / qi).ln();
        }
    }
    Ok(d.max(0.0))
}

/// Exact KL divergence between the next-output laws of two models given the
/// same history.
pub fn kernel_divergence(p: &SystemModel, q: &SystemModel, history: HistoryView<'_>) -> Result<f64> {
    if p.kind() != q.kind() {
        return Err(Error::KindMismatch(p.kind().name(), q.kind().name()));
    }
    let (y, u) = history.last_pair()?;
    match (p, q) {
        (SystemModel::Tabular(mp), SystemModel::Tabular(mq)) => {
            if mp.alphabet != mq.alphabet || mp.inputs != mq.inputs {
                return Err(Error::DimensionMismatch("tabular alphabets differ".into()));
            }
            let (Some(ys), Some(us)) = (y.as_symbol(), u.as_symbol()) else {
                return Err(Error::KindMismatch("tabular_finite", "real-valued observation"));
            };
            if ys >= mp.alphabet || us >= mp.inputs {
                return Err(Error::SymbolOutOfRange {
                    symbol: ys.max(us),
                    size: mp.alphabet.min(mp.inputs),
                });
            }
            discrete_kl(mp.row(ys, us), mq.row(ys, us))
        }
        _ => {
            let (vp, vq) = (p.noise_variance().unwrap(), q.noise_variance().unwrap());
            if vp != vq {
                return Err(Error::VarianceMismatch(vp, vq));
            }
            if p.output_dim() != q.output_dim() {
                return Err(Error::DimensionMismatch("output dimensions differ".into()));
            }
            let (Some(yr), Some(ur)) = (y.as_real(), u.as_real()) else {
                return Err(Error::KindMismatch(p.kind().name(), "symbolic observation"));
            };
            Ok((p.mean(yr, ur) - q.mean(yr, ur)).norm_squared() / (2.0 * vp))
        }
    }
}

/// Monte-Carlo estimate of `E_{p, controller} D(P_{p,t} || P_{q,t})`, the
/// divergence of the kernels producing `Y_t`, over histories `Y^{t-1}, U^{t-1}`
/// drawn from the interconnection of `p` with `controller`.
pub fn expected_divergence(
    p: &SystemModel,
    q: &SystemModel,
    controller: &ControllerPolicy,
    step: usize,
    trials: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    if step < 2 {
        return Err(Error::InvalidArgument(
            "step must be at least 2: Y_1 follows the common initial law".into(),
        ));
    }
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let tr = sample_trajectory(p, controller, step - 1, derive_seed(seed, i as u64))?;
            kernel_divergence(p, q, tr.prefix(step - 1))
        })
        .collect::<Result<_>>()?;
    Ok(MeanEstimate::from_samples(&samples))
}
