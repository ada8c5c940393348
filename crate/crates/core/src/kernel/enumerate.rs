//! Exhaustive enumeration of tabular interconnection paths.

use crate::error::{Error, Result};
use crate::kernel::controller::ControllerPolicy;
use crate::kernel::model::{SystemModel, Tabular};
use crate::kernel::trajectory::{HistoryView, Obs};

/// Default limit on enumerated outcomes (paths times hypotheses).
pub const ENUMERATION_BUDGET: f64 = 1e6;

/// A path prefix and its probability under each hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct PathNode {
    pub outputs: Vec<Obs>,
    pub inputs: Vec<Obs>,
    /// Joint probability of the prefix, controller factors included, per hypothesis.
    pub weights: Vec<f64>,
}

impl PathNode {
    pub fn history(&self) -> HistoryView<'_> {
        HistoryView::new(&self.outputs, &self.inputs)
    }
}

/// All positive-probability paths of `T` steps.
#[derive(Debug, Clone)]
pub struct PathTree {
    /// `levels[s - 1]` holds prefixes `Y_1..Y_s, U_1..U_s` for `s = 1..=T`.
    pub levels: Vec<Vec<PathNode>>,
    /// Complete paths `Y_1..Y_{T+1}, U_1..U_T`.
    pub leaves: Vec<PathNode>,
}

fn tabular_models(models: &[SystemModel]) -> Result<Vec<&Tabular>> {
    let tabs: Vec<&Tabular> = models
        .iter()
        .map(|m| m.as_tabular().ok_or(Error::KindMismatch("tabular_finite", m.kind().name())))
        .collect::<Result<_>>()?;
    let first = tabs.first().ok_or(Error::InvalidArgument("no hypotheses".into()))?;
    if tabs
        .iter()
        .any(|t| t.alphabet != first.alphabet || t.inputs != first.inputs || t.initial != first.initial)
    {
        return Err(Error::DimensionMismatch(
            "tabular hypotheses must share alphabets and initial law".into(),
        ));
    }
    Ok(tabs)
}

fn input_distribution(controller: &ControllerPolicy, t: usize, y: usize, inputs: usize) -> Vec<f64> {
    match controller {
        ControllerPolicy::Tabular(p) => p.row(y).to_vec(),
        ControllerPolicy::OpenLoop(seq) => {
            let mut d = vec![0.0; inputs];
            d[seq[t - 1].symbol()] = 1.0;
            d
        }
        _ => unreachable!("checked by check_compatible"),
    }
}

/// Enumerates every path whose probability is positive under at least one
/// hypothesis. Errors when `|support(Y_1)| * (|Y| |U|)^T * N` exceeds `budget`.
pub fn enumerate_paths(
    models: &[SystemModel],
    controller: &ControllerPolicy,
    horizon: usize,
    budget: f64,
) -> Result<PathTree> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let tabs = tabular_models(models)?;
    for m in models {
        controller.check_compatible(m, horizon)?;
    }
    let alphabet = tabs[0].alphabet;
    let inputs = tabs[0].inputs;
    let branching_inputs = match controller {
        ControllerPolicy::Tabular(p) => p.inputs(),
        _ => 1,
    };
    let init = tabs[0].initial.symbol_distribution(alphabet);
    let support = init.iter().filter(|p| **p > 0.0).count();
    let required =
        support as f64 * ((alphabet * branching_inputs) as f64).powi(horizon as i32) * models.len() as f64;
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let n = models.len();

    // Level 1: Y_1 and U_1.
    let mut current = Vec::new();
    for (y1, &p0) in init.iter().enumerate() {
        if p0 <= 0.0 {
            continue;
        }
        for (u1, &q) in input_distribution(controller, 1, y1, inputs).iter().enumerate() {
            if q <= 0.0 {
                continue;
            }
            current.push(PathNode {
                outputs: vec![Obs::Symbol(y1)],
                inputs: vec![Obs::Symbol(u1)],
                weights: vec![p0 * q; n],
            });
        }
    }
    let mut levels = Vec::with_capacity(horizon);
    let mut leaves = Vec::new();
    for s in 1..=horizon {
        let mut next_level = Vec::new();
        for node in &current {
            let y = node.outputs[s - 1].symbol();
            let u = node.inputs[s - 1].symbol();
            for next in 0..alphabet {
                let weights: Vec<f64> = node
                    .weights
                    .iter()
                    .zip(&tabs)
                    .map(|(w, m)| w * m.row(y, u)[next])
                    .collect();
                if weights.iter().all(|w| *w <= 0.0) {
                    continue;
                }
                let mut outputs = node.outputs.clone();
                outputs.push(Obs::Symbol(next));
                if s == horizon {
                    leaves.push(PathNode {
                        outputs,
                        inputs: node.inputs.clone(),
                        weights,
                    });
                    continue;
                }
                for (u_next, &q) in input_distribution(controller, s + 1, next, inputs).iter().enumerate() {
                    if q <= 0.0 {
                        continue;
                    }
                    let mut ins = node.inputs.clone();
                    ins.push(Obs::Symbol(u_next));
                    next_level.push(PathNode {
                        outputs: outputs.clone(),
                        inputs: ins,
                        weights: weights.iter().map(|w| w * q).collect(),
                    });
                }
            }
        }
        levels.push(std::mem::replace(&mut current, next_level));
    }
    Ok(PathTree { levels, leaves })
}
