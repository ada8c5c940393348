use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::controller::{draw_categorical, ControllerPolicy};
use crate::kernel::model::{InitialLaw, SystemModel};
use crate::rng::{rng_from_seed, TrialRng};

/// One output or input value: a real vector or a finite symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum Obs {
    Real(DVector<f64>),
    Symbol(usize),
}

impl Obs {
    pub fn scalar(x: f64) -> Self {
        Obs::Real(DVector::from_element(1, x))
    }

    pub fn as_real(&self) -> Option<&DVector<f64>> {
        match self {
            Obs::Real(v) => Some(v),
            Obs::Symbol(_) => None,
        }
    }

    pub fn as_symbol(&self) -> Option<usize> {
        match self {
            Obs::Symbol(s) => Some(*s),
            Obs::Real(_) => None,
        }
    }

    pub(crate) fn real(&self) -> &DVector<f64> {
        self.as_real().expect("real-valued observation")
    }

    pub(crate) fn symbol(&self) -> usize {
        self.as_symbol().expect("symbolic observation")
    }
}

/// One realization of the interconnection over `T` steps:
/// outputs `Y_1..Y_{T+1}`, inputs `U_1..U_T`, noises `V_2..V_{T+1}`
/// (Gaussian kinds) and gains `F_1..F_T` (linear policies).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub outputs: Vec<Obs>,
    pub inputs: Vec<Obs>,
    pub noises: Vec<DVector<f64>>,
    pub gains: Vec<DMatrix<f64>>,
    pub seed: u64,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    pub fn history(&self) -> HistoryView<'_> {
        HistoryView {
            outputs: &self.outputs,
            inputs: &self.inputs,
            gains: &self.gains,
        }
    }

    /// The history available before output `Y_{s+1}` is drawn: `Y_1..Y_s`, `U_1..U_s`.
    pub fn prefix(&self, s: usize) -> HistoryView<'_> {
        HistoryView {
            outputs: &self.outputs[..s],
            inputs: &self.inputs[..s],
            gains: &self.gains[..s.min(self.gains.len())],
        }
    }

    pub fn real_outputs(&self) -> Result<Vec<DVector<f64>>> {
        self.outputs
            .iter()
            .map(|o| o.as_real().cloned().ok_or(Error::MissingRecord("real output")))
            .collect()
    }
}

/// Borrowed view of an input-output history.
#[derive(Debug, Clone, Copy)]
pub struct HistoryView<'a> {
    pub outputs: &'a [Obs],
    pub inputs: &'a [Obs],
    pub gains: &'a [DMatrix<f64>],
}

impl<'a> HistoryView<'a> {
    pub fn new(outputs: &'a [Obs], inputs: &'a [Obs]) -> Self {
        HistoryView {
            outputs,
            inputs,
            gains: &[],
        }
    }

    /// The most recent `(Y_t, U_t)` pair, which is all a first-order kernel reads.
    pub fn last_pair(&self) -> Result<(&'a Obs, &'a Obs)> {
        match (self.outputs.last(), self.inputs.last()) {
            (Some(y), Some(u)) if self.outputs.len() == self.inputs.len() => Ok((y, u)),
            (Some(_), Some(_)) => Err(Error::DimensionMismatch(format!(
                "history with {} outputs and {} inputs; expected equal lengths",
                self.outputs.len(),
                self.inputs.len()
            ))),
            _ => Err(Error::EmptyHistory),
        }
    }
}

pub(crate) fn draw_initial(model: &SystemModel, rng: &mut TrialRng) -> Obs {
    match model {
        SystemModel::Tabular(m) => match &m.initial {
            InitialLaw::Categorical(p) => Obs::Symbol(draw_categorical(p, rng)),
            InitialLaw::Symbol(s) => Obs::Symbol(*s),
            _ => Obs::Symbol(0),
        },
        _ => {
            let n = model.output_dim();
            match model.initial() {
                InitialLaw::Gaussian { variance } => {
                    let sd = variance.sqrt();
                    Obs::Real(DVector::from_fn(n, |_, _| sd * rng.sample::<f64, _>(StandardNormal)))
                }
                _ => Obs::Real(DVector::zeros(n)),
            }
        }
    }
}

/// Samples `T` steps of the interconnection of `model` and `controller`.
///
/// The trajectory is a pure function of the arguments: the initial output is
/// drawn first, then for each step the controller acts and the next output is
/// drawn. A trajectory of horizon `T` is therefore the exact prefix of the one
/// drawn with the same seed and any longer horizon.
pub fn sample_trajectory(
    model: &SystemModel,
    controller: &ControllerPolicy,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    controller.check_compatible(model, horizon)?;
    let mut rng = rng_from_seed(seed);
    let gaussian = model.kind().is_gaussian();
    let mut outputs = Vec::with_capacity(horizon + 1);
    let mut inputs = Vec::with_capacity(horizon);
    let mut noises = Vec::with_capacity(if gaussian { horizon } else { 0 });
    let mut gains = Vec::new();
    outputs.push(draw_initial(model, &mut rng));
    let mut run = controller.start(model.output_dim());
    for t in 1..=horizon {
        let decision = run.act(t, &outputs, &inputs, &mut rng);
        if let Some(f) = decision.gain {
            gains.push(f);
        }
        inputs.push(decision.input);
        let y = &outputs[t - 1];
        let u = &inputs[t - 1];
        let next = match model {
            SystemModel::Tabular(m) => Obs::Symbol(draw_categorical(m.row(y.symbol(), u.symbol()), &mut rng)),
            _ => {
                let sd = model.noise_variance().unwrap().sqrt();
                let mean = model.mean(y.real(), u.real());
                let v = DVector::from_fn(mean.len(), |_, _| sd * rng.sample::<f64, _>(StandardNormal));
                let next = mean + &v;
                noises.push(v);
                Obs::Real(next)
            }
        };
        outputs.push(next);
    }
    Ok(Trajectory {
        outputs,
        inputs,
        noises,
        gains,
        seed,
    })
}
