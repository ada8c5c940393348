use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::identification::Identifier;
use crate::kernel::{
    conditional_log_density, discrete_kl, gaussian_kl, kernel_divergence, Hypotheses, HistoryView, Obs, SystemModel,
};

/// Auxiliary kernels `Q(Y_{t+1} | Z^t)` against which each step is compared.
#[derive(Debug, Clone)]
pub enum AuxiliaryKernel {
    /// A fixed model.
    Nominal(SystemModel),
    /// The model at the identifier's estimate from the history so far.
    PlugIn(Identifier),
    /// `N(0, variance I)` regardless of the history.
    FixedGaussianZeroMean { variance: f64 },
    /// The posterior mixture of the hypotheses under a uniform prior.
    ExactConditionalMixture,
}

impl AuxiliaryKernel {
    pub fn name(&self) -> &'static str {
        match self {
            AuxiliaryKernel::Nominal(_) => "nominal_model",
            AuxiliaryKernel::PlugIn(_) => "plug_in_schedule",
            AuxiliaryKernel::FixedGaussianZeroMean { .. } => "fixed_gaussian_zero_mean",
            AuxiliaryKernel::ExactConditionalMixture => "exact_conditional_mixture",
        }
    }

    pub(crate) fn check(&self, hyp: &Hypotheses) -> Result<()> {
        match self {
            AuxiliaryKernel::FixedGaussianZeroMean { variance } => {
                if hyp.is_tabular() {
                    return Err(Error::KindMismatch("gaussian hypotheses", "tabular_finite"));
                }
                if !(*variance > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "auxiliary variance must be positive, got {variance}"
                    )));
                }
            }
            AuxiliaryKernel::Nominal(q) => {
                if let Some(p) = hyp.models().first() {
                    if p.kind() != q.kind() {
                        return Err(Error::KindMismatch(p.kind().name(), q.kind().name()));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Posterior weights from unnormalized log likelihoods.
pub(crate) fn posterior(loglik: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(loglik.iter().copied());
    loglik.iter().map(|l| (l - z).exp()).collect()
}

/// One step's contribution on a sampled path drawn under hypothesis `w`:
/// the closed-form conditional divergence where one exists, otherwise the
/// log ratio at the realized output. `loglik` holds each hypothesis' log
/// likelihood of the history.
pub(crate) fn step_value(
    aux: &AuxiliaryKernel,
    hyp: &Hypotheses,
    w: usize,
    history: HistoryView<'_>,
    y_next: &Obs,
    loglik: &[f64],
) -> Result<f64> {
    let p = hyp.model(w);
    match aux {
        AuxiliaryKernel::Nominal(q) => kernel_divergence(p, q, history),
        AuxiliaryKernel::PlugIn(id) => {
            let q = hyp.family().instantiate(&id.estimate(history)?.point)?;
            kernel_divergence(p, &q, history)
        }
        AuxiliaryKernel::FixedGaussianZeroMean { variance } => {
            let (y, u) = history.last_pair()?;
            let (Some(y), Some(u)) = (y.as_real(), u.as_real()) else {
                return Err(Error::KindMismatch("gaussian hypotheses", "tabular_finite"));
            };
            let mean = p.mean(y, u);
            let zero = DVector::zeros(mean.len());
            Ok(gaussian_kl(&mean, p.noise_variance().unwrap(), &zero, *variance))
        }
        AuxiliaryKernel::ExactConditionalMixture => match p {
            SystemModel::Tabular(_) => mixture_divergence(hyp, w, history, &posterior(loglik)),
            _ => {
                let lp: Vec<f64> = hyp
                    .models()
                    .iter()
                    .map(|m| conditional_log_density(m, y_next, history))
                    .collect::<Result<_>>()?;
                let z = log_sum_exp(loglik.iter().copied());
                let lq = log_sum_exp(loglik.iter().zip(&lp).map(|(l, d)| l - z + d));
                Ok(lp[w] - lq)
            }
        },
    }
}

/// `D(P_w(.|h) || sum_j pi_j P_j(.|h))` for tabular hypotheses.
pub(crate) fn mixture_divergence(hyp: &Hypotheses, w: usize, history: HistoryView<'_>, pi: &[f64]) -> Result<f64> {
    let (y, u) = history.last_pair()?;
    let (Some(y), Some(u)) = (y.as_symbol(), u.as_symbol()) else {
        return Err(Error::KindMismatch("tabular_finite", "real-valued observation"));
    };
    let tabs: Vec<_> = hyp.models().iter().map(|m| m.as_tabular().unwrap()).collect();
    let alphabet = tabs[0].alphabet();
    let mut q = vec![0.0; alphabet];
    for (t, &pj) in tabs.iter().zip(pi) {
        for (qk, rk) in q.iter_mut().zip(t.row(y, u)) {
            *qk += pj * rk;
        }
    }
    discrete_kl(tabs[w].row(y, u), &q)
}

/// Adds each hypothesis' log likelihood of `y_next` to `loglik`.
pub(crate) fn update_loglik(hyp: &Hypotheses, history: HistoryView<'_>, y_next: &Obs, loglik: &mut [f64]) -> Result<()> {
    for (l, m) in loglik.iter_mut().zip(hyp.models()) {
        *l += conditional_log_density(m, y_next, history)?;
    }
    Ok(())
}
