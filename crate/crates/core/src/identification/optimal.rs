use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{enumerate_paths, ControllerPolicy, Hypotheses, PathTree, ENUMERATION_BUDGET};

/// Exact optimal identification errors over decision rules valued in the hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalErrorReport {
    /// Uniform-prior error probability of the MAP rule; a lower bound on the
    /// minimax error probability of every rule.
    pub bayes_error: f64,
    /// Per-hypothesis error probabilities of the MAP rule.
    pub map_error_probs: Vec<f64>,
    pub map_max_error_prob: f64,
    /// Minimum over rules of the uniform-average metric error.
    pub min_avg_metric_error: f64,
}

fn tree(hyp: &Hypotheses, controller: &ControllerPolicy, horizon: usize) -> Result<PathTree> {
    if !hyp.is_tabular() {
        return Err(Error::KindMismatch("tabular_finite", "gaussian hypotheses"));
    }
    enumerate_paths(hyp.models(), controller, horizon, ENUMERATION_BUDGET)
}

fn distances(hyp: &Hypotheses) -> Vec<Vec<f64>> {
    let pts = hyp.points();
    let d = hyp.packing().distance();
    pts.iter().map(|a| pts.iter().map(|b| d.eval(a, b)).collect()).collect()
}

/// MAP rule errors and the exact Bayes optima under a uniform prior.
pub fn exhaustive_optimal_error(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    horizon: usize,
) -> Result<OptimalErrorReport> {
    let tree = tree(hyp, controller, horizon)?;
    let n = hyp.len();
    let dist = distances(hyp);
    let mut map_err = vec![0.0; n];
    let mut metric = 0.0;
    for leaf in &tree.leaves {
        let w = &leaf.weights;
        let mut best = 0;
        for i in 1..n {
            if w[i] > w[best] {
                best = i;
            }
        }
        for i in 0..n {
            if i != best {
                map_err[i] += w[i];
            }
        }
        metric += (0..n)
            .map(|j| (0..n).map(|i| w[i] * dist[j][i]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
    }
    let bayes_error = map_err.iter().sum::<f64>() / n as f64;
    Ok(OptimalErrorReport {
        bayes_error,
        map_max_error_prob: map_err.iter().copied().fold(0.0, f64::max),
        map_error_probs: map_err,
        min_avg_metric_error: metric / n as f64,
    })
}

/// Exact `min_g max_i E_i rho(g, theta_i)` over deterministic rules `g`
/// from complete paths to the hypotheses, by branch and bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxMetricError {
    pub value: f64,
    /// Chosen hypothesis per enumerated path.
    pub rule: Vec<usize>,
    pub nodes_visited: u64,
}

pub const MINIMAX_NODE_BUDGET: u64 = 50_000_000;

pub fn exact_minimax_metric_error(
    hyp: &Hypotheses,
    controller: &ControllerPolicy,
    horizon: usize,
) -> Result<MinimaxMetricError> {
    let tree = tree(hyp, controller, horizon)?;
    let n = hyp.len();
    let dist = distances(hyp);
    // cost[l][j][i]: contribution of path l to hypothesis i's risk when g(l) = j.
    let mut leaves: Vec<usize> = (0..tree.leaves.len()).collect();
    leaves.sort_by(|&a, &b| {
        let wa: f64 = tree.leaves[a].weights.iter().sum();
        let wb: f64 = tree.leaves[b].weights.iter().sum();
        wb.total_cmp(&wa).then(a.cmp(&b))
    });
    let cost: Vec<Vec<Vec<f64>>> = leaves
        .iter()
        .map(|&l| {
            let w = &tree.leaves[l].weights;
            (0..n).map(|j| (0..n).map(|i| w[i] * dist[j][i]).collect()).collect()
        })
        .collect();
    // Uniform-average relaxation of the remaining paths.
    let mut tail = vec![0.0; leaves.len() + 1];
    for k in (0..leaves.len()).rev() {
        let best = cost[k]
            .iter()
            .map(|c| c.iter().sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        tail[k] = tail[k + 1] + best / n as f64;
    }
    // Incumbent: the rule minimizing the Bayes metric risk path by path.
    let mut rule: Vec<usize> = cost
        .iter()
        .map(|c| {
            let mut b = 0;
            for j in 1..n {
                if c[j].iter().sum::<f64>() < c[b].iter().sum::<f64>() {
                    b = j;
                }
            }
            b
        })
        .collect();
    let mut risk = vec![0.0; n];
    for (k, &j) in rule.iter().enumerate() {
        for i in 0..n {
            risk[i] += cost[k][j][i];
        }
    }
    let mut state = Search {
        cost: &cost,
        tail: &tail,
        best: risk.iter().copied().fold(0.0, f64::max),
        best_rule: rule.clone(),
        current: vec![0; leaves.len()],
        visited: 0,
    };
    let mut partial = vec![0.0; n];
    state.descend(0, &mut partial)?;
    rule = vec![0; leaves.len()];
    for (k, &l) in leaves.iter().enumerate() {
        rule[l] = state.best_rule[k];
    }
    Ok(MinimaxMetricError {
        value: state.best,
        rule,
        nodes_visited: state.visited,
    })
}

struct Search<'a> {
    cost: &'a [Vec<Vec<f64>>],
    tail: &'a [f64],
    best: f64,
    best_rule: Vec<usize>,
    current: Vec<usize>,
    visited: u64,
}

impl Search<'_> {
    fn descend(&mut self, k: usize, partial: &mut [f64]) -> Result<()> {
        self.visited += 1;
        if self.visited > MINIMAX_NODE_BUDGET {
            return Err(Error::BudgetExceeded {
                required: self.visited as f64,
                budget: MINIMAX_NODE_BUDGET as f64,
            });
        }
        let n = partial.len();
        let max_partial = partial.iter().copied().fold(0.0, f64::max);
        let avg_bound = partial.iter().sum::<f64>() / n as f64 + self.tail[k];
        if max_partial.max(avg_bound) >= self.best {
            return Ok(());
        }
        if k == self.cost.len() {
            self.best = max_partial;
            self.best_rule.clone_from(&self.current);
            return Ok(());
        }
        // Try choices in order of the resulting worst risk.
        let mut order: Vec<(f64, usize)> = (0..n)
            .map(|j| {
                let m = (0..n).map(|i| partial[i] + self.cost[k][j][i]).fold(0.0, f64::max);
                (m, j)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (m, j) in order {
            if m >= self.best {
                break;
            }
            for i in 0..n {
                partial[i] += self.cost[k][j][i];
            }
            self.current[k] = j;
            self.descend(k + 1, partial)?;
            for i in 0..n {
                partial[i] -= self.cost[k][j][i];
            }
        }
        Ok(())
    }
}
