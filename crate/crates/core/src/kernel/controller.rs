use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::model::{check_probability_row, SystemModel};
use crate::kernel::trajectory::Obs;
use crate::linalg::{add_outer, guarded_inverse, spectral_norm};
use crate::rng::{keyed_uniform, TrialRng};

/// Relative eigenvalue threshold below which a Gram matrix counts as singular.
pub const GRAM_SINGULARITY_TOLERANCE: f64 = 1e-10;

/// Squared output norm below which the dither of a certainty-equivalence
/// controller is suppressed (it cannot be folded into a gain at `Y_t = 0`).
pub const DITHER_FOLD_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum GainSchedule {
    Constant(DMatrix<f64>),
    /// `F_1, F_2, ...`; the last gain repeats past the end.
    Sequence(Vec<DMatrix<f64>>),
}

impl GainSchedule {
    fn at(&self, t: usize) -> &DMatrix<f64> {
        match self {
            GainSchedule::Constant(f) => f,
            GainSchedule::Sequence(fs) => &fs[(t - 1).min(fs.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertaintyEquivalence {
    pub update_period: usize,
    pub dither_amplitude: f64,
    pub dither_seed: u64,
}

/// Stationary randomized policy `Q(u_t | y_t)` on finite alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    pub(crate) inputs: usize,
    /// Row per output symbol: a distribution over input symbols.
    pub(crate) rows: Vec<Vec<f64>>,
}

impl TabularPolicy {
    pub fn new(inputs: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        for row in &rows {
            if row.len() != inputs {
                return Err(Error::DimensionMismatch(format!(
                    "policy row of length {} for {inputs} inputs",
                    row.len()
                )));
            }
            check_probability_row(row)?;
        }
        Ok(TabularPolicy { inputs, rows })
    }

    /// Always apply input symbol 0.
    pub fn constant(alphabet: usize) -> Self {
        TabularPolicy {
            inputs: 1,
            rows: vec![vec![1.0]; alphabet],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.rows[y]
    }
}

/// A causal input-generation rule `Q_gamma(du_t | y^t, u^{t-1})`.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerPolicy {
    /// `U_t = 0`, exposed as the zero gain.
    Zero,
    OpenLoop(Vec<Obs>),
    /// `U_t = -F_t Y_t`.
    LinearFeedback(GainSchedule),
    CertaintyEquivalence(CertaintyEquivalence),
    Tabular(TabularPolicy),
}

/// Certainty-equivalence controller: least-squares estimate `Â`, scaled
/// back into the spectral unit ball and refreshed every `update_period`
/// steps, with `U_t = -Â Y_t + d_t` for a deterministic dither `d_t` of the
/// given amplitude.
pub fn certainty_equivalence_controller(
    update_period: usize,
    dither_amplitude: f64,
    dither_seed: u64,
) -> Result<ControllerPolicy> {
    if update_period == 0 {
        return Err(Error::InvalidArgument("update_period must be at least 1".into()));
    }
    if !(dither_amplitude >= 0.0 && dither_amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dither amplitude must be nonnegative, got {dither_amplitude}"
        )));
    }
    Ok(ControllerPolicy::CertaintyEquivalence(CertaintyEquivalence {
        update_period,
        dither_amplitude,
        dither_seed,
    }))
}

/// Dither coordinate `j` at time `t`: uniform on `[-amplitude, amplitude]`.
pub fn dither_value(seed: u64, amplitude: f64, t: usize, j: usize) -> f64 {
    amplitude * (2.0 * keyed_uniform(seed, t as u64, j as u64) - 1.0)
}

/// Ordinary least-squares fit of `Y_{s+1} - U_s ≈ A Y_s` over the given
/// transitions, or `None` when the Gram matrix is numerically singular.
pub fn regression_estimate(outputs: &[DVector<f64>], inputs: &[DVector<f64>]) -> Option<DMatrix<f64>> {
    let n = outputs.first()?.len();
    let mut gram = DMatrix::zeros(n, n);
    let mut cross = DMatrix::zeros(n, n);
    for (s, u) in inputs.iter().enumerate() {
        let (Some(y), Some(next)) = (outputs.get(s), outputs.get(s + 1)) else {
            break;
        };
        add_outer(&mut gram, y, y);
        add_outer(&mut cross, &(next - u), y);
    }
    guarded_inverse(&gram, GRAM_SINGULARITY_TOLERANCE).map(|inv| cross * inv)
}

impl ControllerPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerPolicy::Zero => "zero",
            ControllerPolicy::OpenLoop(_) => "open_loop_sequence",
            ControllerPolicy::LinearFeedback(_) => "linear_feedback",
            ControllerPolicy::CertaintyEquivalence(_) => "certainty_equivalence",
            ControllerPolicy::Tabular(_) => "tabular_policy",
        }
    }

    /// Constant feedback `U_t = -F Y_t`.
    pub fn feedback(gain: DMatrix<f64>) -> Self {
        ControllerPolicy::LinearFeedback(GainSchedule::Constant(gain))
    }

    /// Whether every input is `-F_t Y_t` with a recorded gain.
    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            ControllerPolicy::Zero | ControllerPolicy::LinearFeedback(_) | ControllerPolicy::CertaintyEquivalence(_)
        )
    }

    /// Checks dimensional compatibility with a model over `horizon` steps.
    pub fn check_compatible(&self, model: &SystemModel, horizon: usize) -> Result<()> {
        let incompatible = || Error::IncompatibleController {
            controller: self.name(),
            model: model.kind().name(),
        };
        match (self, model) {
            (ControllerPolicy::Tabular(p), SystemModel::Tabular(m)) => {
                if p.inputs != m.inputs || p.rows.len() != m.alphabet {
                    return Err(Error::DimensionMismatch(format!(
                        "policy over {} outputs / {} inputs, model over {} / {}",
                        p.rows.len(),
                        p.inputs,
                        m.alphabet,
                        m.inputs
                    )));
                }
                Ok(())
            }
            (ControllerPolicy::OpenLoop(seq), SystemModel::Tabular(m)) => {
                if seq.len() < horizon {
                    return Err(Error::InvalidArgument(format!(
                        "open-loop sequence of length {} for horizon {horizon}",
                        seq.len()
                    )));
                }
                for o in &seq[..horizon] {
                    match o {
                        Obs::Symbol(u) if *u < m.inputs => {}
                        Obs::Symbol(u) => {
                            return Err(Error::SymbolOutOfRange {
                                symbol: *u,
                                size: m.inputs,
                            })
                        }
                        Obs::Real(_) => return Err(incompatible()),
                    }
                }
                Ok(())
            }
            (_, SystemModel::Tabular(_)) => Err(incompatible()),
            (ControllerPolicy::Tabular(_), _) => Err(incompatible()),
            (ControllerPolicy::OpenLoop(seq), m) => {
                if seq.len() < horizon {
                    return Err(Error::InvalidArgument(format!(
                        "open-loop sequence of length {} for horizon {horizon}",
                        seq.len()
                    )));
                }
                let n = m.output_dim();
                for o in &seq[..horizon] {
                    match o {
                        Obs::Real(u) if u.len() == n => {}
                        Obs::Real(u) => {
                            return Err(Error::DimensionMismatch(format!(
                                "input of dimension {} for outputs of dimension {n}",
                                u.len()
                            )))
                        }
                        Obs::Symbol(_) => return Err(incompatible()),
                    }
                }
                Ok(())
            }
            (ControllerPolicy::LinearFeedback(schedule), m) => {
                let n = m.output_dim();
                let gains: Vec<&DMatrix<f64>> = match schedule {
                    GainSchedule::Constant(f) => vec![f],
                    GainSchedule::Sequence(fs) if fs.is_empty() => {
                        return Err(Error::InvalidArgument("empty gain schedule".into()))
                    }
                    GainSchedule::Sequence(fs) => fs.iter().collect(),
                };
                if gains.iter().any(|f| f.nrows() != n || f.ncols() != n) {
                    return Err(Error::DimensionMismatch(format!("feedback gains must be {n}x{n}")));
                }
                Ok(())
            }
            (ControllerPolicy::Zero, _) | (ControllerPolicy::CertaintyEquivalence(_), _) => Ok(()),
        }
    }

    pub(crate) fn start(&self, n: usize) -> PolicyRun<'_> {
        let ce = match self {
            ControllerPolicy::CertaintyEquivalence(_) => Some(CeState {
                gram: DMatrix::zeros(n, n),
                cross: DMatrix::zeros(n, n),
                estimate: DMatrix::zeros(n, n),
                absorbed: 0,
            }),
            _ => None,
        };
        PolicyRun { policy: self, n, ce }
    }
}

#[derive(Debug, Clone)]
struct CeState {
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
    estimate: DMatrix<f64>,
    /// Number of transitions folded into the accumulators.
    absorbed: usize,
}

/// One decision: the input and, for linear policies, the gain with `U_t = -F_t Y_t`.
pub(crate) struct Decision {
    pub input: Obs,
    pub gain: Option<DMatrix<f64>>,
}

/// Per-trajectory controller state.
pub(crate) struct PolicyRun<'a> {
    policy: &'a ControllerPolicy,
    n: usize,
    ce: Option<CeState>,
}

impl PolicyRun<'_> {
    /// Input at time `t` (1-based) given `outputs = Y_1..Y_t` and `inputs = U_1..U_{t-1}`.
    pub fn act(&mut self, t: usize, outputs: &[Obs], inputs: &[Obs], rng: &mut TrialRng) -> Decision {
        let current = &outputs[t - 1];
        match self.policy {
            ControllerPolicy::Zero => {
                let gain = DMatrix::zeros(self.n, self.n);
                Decision {
                    input: Obs::Real(DVector::zeros(self.n)),
                    gain: Some(gain),
                }
            }
            ControllerPolicy::OpenLoop(seq) => Decision {
                input: seq[t - 1].clone(),
                gain: None,
            },
            ControllerPolicy::LinearFeedback(schedule) => {
                let f = schedule.at(t).clone();
                let u = -(&f * current.real());
                Decision {
                    input: Obs::Real(u),
                    gain: Some(f),
                }
            }
            ControllerPolicy::Tabular(policy) => {
                let row = policy.row(current.symbol());
                Decision {
                    input: Obs::Symbol(draw_categorical(row, rng)),
                    gain: None,
                }
            }
            ControllerPolicy::CertaintyEquivalence(cfg) => {
                let state = self.ce.as_mut().expect("certainty-equivalence state");
                while state.absorbed + 1 < t {
                    let s = state.absorbed;
                    let y = outputs[s].real();
                    let next = outputs[s + 1].real();
                    add_outer(&mut state.gram, y, y);
                    add_outer(&mut state.cross, &(next - inputs[s].real()), y);
                    state.absorbed += 1;
                }
                if t > 1 && (t - 1) % cfg.update_period == 0 {
                    if let Some(inv) = guarded_inverse(&state.gram, GRAM_SINGULARITY_TOLERANCE) {
                        // Systems lie in the unit ball, so estimates are projected onto it.
                        let est = &state.cross * inv;
                        let norm = spectral_norm(&est);
                        state.estimate = if norm > 1.0 { est / norm } else { est };
                    }
                }
                let y = current.real();
                let mut gain = state.estimate.clone();
                let norm2 = y.norm_squared();
                if cfg.dither_amplitude > 0.0 && norm2 >= DITHER_FOLD_THRESHOLD {
                    let d = DVector::from_fn(self.n, |j, _| dither_value(cfg.dither_seed, cfg.dither_amplitude, t, j));
                    // F_t = Â - d y^T / |y|^2, so that -F_t y = -Â y + d.
                    gain.ger(-1.0 / norm2, &d, y, 1.0);
                }
                let u = -(&gain * y);
                Decision {
                    input: Obs::Real(u),
                    gain: Some(gain),
                }
            }
        }
    }
}

/// Inverse-CDF draw from a probability vector.
pub(crate) fn draw_categorical(p: &[f64], rng: &mut TrialRng) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi > 0.0 {
            last_positive = i;
            acc += pi;
            if x < acc {
                return i;
            }
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_update_period_rejected() {
        assert!(certainty_equivalence_controller(0, 0.0, 1).is_err());
        assert!(certainty_equivalence_controller(1, -0.1, 1).is_err());
    }

    #[test]
    fn dither_is_deterministic_and_bounded() {
        for t in 1..200 {
            let d = dither_value(5, 0.3, t, 1);
            assert!(d.abs() <= 0.3);
            assert_eq!(d, dither_value(5, 0.3, t, 1));
        }
    }

    #[test]
    fn regression_recovers_noiseless_dynamics() {
        // Y_{s+1} = A Y_s + U_s exactly, with exciting inputs.
        let a = DMatrix::from_row_slice(2, 2, &[0.4, -0.3, 0.2, 0.9]);
        let mut ys = vec![DVector::from_vec(vec![1.0, 0.0])];
        let mut us = Vec::new();
        for s in 0..6 {
            let u = DVector::from_vec(vec![(s as f64).sin(), (1.7 * s as f64).cos()]);
            let next = &a * &ys[s] + &u;
            us.push(u);
            ys.push(next);
        }
        let est = regression_estimate(&ys, &us).unwrap();
        assert!((est - a).abs().max() < 1e-12);
    }

    #[test]
    fn regression_singular_gram_is_none() {
        let ys = vec![DVector::zeros(2), DVector::zeros(2)];
        let us = vec![DVector::zeros(2)];
        assert!(regression_estimate(&ys, &us).is_none());
    }

    #[test]
    fn categorical_draw_respects_zero_mass() {
        let mut rng = crate::rng::rng_from_seed(1);
        for _ in 0..1000 {
            assert_ne!(draw_categorical(&[0.5, 0.0, 0.5], &mut rng), 1);
        }
    }
}
