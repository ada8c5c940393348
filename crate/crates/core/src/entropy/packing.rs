use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::space::{Distance, MetricSpaceSpec};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::Point;

/// A finite set of points that are pairwise at least `separation` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingSet {
    points: Vec<Point>,
    separation: f64,
    maximal: bool,
    distance: Distance,
}

impl PackingSet {
    /// Checks every pair against `separation`.
    pub fn new(points: Vec<Point>, separation: f64, distance: Distance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("packing needs at least one point".into()));
        }
        if !(separation > 0.0) {
            return Err(Error::InvalidArgument(format!("separation must be positive, got {separation}")));
        }
        let shape = points[0].shape();
        if points.iter().any(|p| p.shape() != shape) {
            return Err(Error::DimensionMismatch("packing points have different shapes".into()));
        }
        for (i, a) in points.iter().enumerate() {
            for (j, b) in points.iter().enumerate().skip(i + 1) {
                let d = distance.eval(a, b);
                if d < separation {
                    return Err(Error::InvalidArgument(format!(
                        "points {i} and {j} are {d} apart, below separation {separation}"
                    )));
                }
            }
        }
        Ok(PackingSet {
            points,
            separation,
            maximal: false,
            distance,
        })
    }

    /// Uses the minimum pairwise distance as the separation (infinite for one point).
    pub fn from_points(points: Vec<Point>, distance: Distance) -> Result<Self> {
        let mut sep = f64::INFINITY;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                if a.shape() != b.shape() {
                    return Err(Error::DimensionMismatch("packing points have different shapes".into()));
                }
                sep = sep.min(distance.eval(a, b));
            }
        }
        if sep == 0.0 {
            return Err(Error::InvalidArgument("packing contains duplicate points".into()));
        }
        Self::new(points, sep, distance)
    }

    /// A hypothesis list that may repeat points, with separation equal to
    /// the minimum pairwise distance (zero when points repeat).
    pub fn multiset(points: Vec<Point>, distance: Distance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("packing needs at least one point".into()));
        }
        let mut sep = f64::INFINITY;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                if a.shape() != b.shape() {
                    return Err(Error::DimensionMismatch("packing points have different shapes".into()));
                }
                sep = sep.min(distance.eval(a, b));
            }
        }
        Ok(PackingSet {
            points,
            separation: sep,
            maximal: false,
            distance,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn is_maximal(&self) -> bool {
        self.maximal
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    /// Index of the closest point, lowest index on ties.
    pub fn nearest(&self, x: &Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = self.distance.eval(x, p);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Index of a member equal to `x`.
    pub fn position(&self, x: &Point) -> Option<usize> {
        self.points.iter().position(|p| p == x)
    }
}

/// Greedy maximal `eps`-separated subset. Seed 0 scans candidates in
/// their given (lexicographic) order; other seeds shuffle it first.
pub fn greedy_packing(space: &MetricSpaceSpec, eps: f64, seed: u64) -> Result<PackingSet> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("separation must be positive, got {eps}")));
    }
    let cands = space.candidates();
    let dist = space.distance();
    let mut order: Vec<usize> = (0..cands.len()).collect();
    if seed != 0 {
        order.shuffle(&mut rng_from_seed(seed));
    }
    let mut chosen: Vec<usize> = Vec::new();
    for &i in &order {
        if chosen.iter().all(|&j| dist.at_least(&cands[i], &cands[j], eps)) {
            chosen.push(i);
        }
    }
    let points: Vec<Point> = chosen.iter().map(|&i| cands[i].clone()).collect();
    // Verification pass: separation on all pairs, coverage of every candidate.
    let separated = chosen.par_iter().enumerate().all(|(a, &i)| {
        chosen[a + 1..]
            .iter()
            .all(|&j| dist.eval(&cands[i], &cands[j]) >= eps)
    });
    let covered = cands
        .par_iter()
        .all(|c| points.iter().any(|p| dist.eval(c, p) < eps) || points.contains(c));
    debug_assert!(separated);
    Ok(PackingSet {
        points,
        separation: eps,
        maximal: separated && covered,
        distance: dist,
    })
}

/// Largest greedy packing over seeds `0..seeds`.
pub fn best_greedy_packing(space: &MetricSpaceSpec, eps: f64, seeds: u64) -> Result<PackingSet> {
    let mut best = greedy_packing(space, eps, 0)?;
    for s in 1..seeds {
        let p = greedy_packing(space, eps, s)?;
        if p.len() > best.len() {
            best = p;
        }
    }
    Ok(best)
}

const EXACT_PACKING_LIMIT: usize = 64;

/// Indices of a maximum `eps`-separated subset of `points` (exact
/// branch and bound on the conflict graph; at most 64 points).
pub fn max_packing(points: &[Point], distance: Distance, eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("separation must be positive, got {eps}")));
    }
    let m = points.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    if m > EXACT_PACKING_LIMIT {
        return Err(Error::BudgetExceeded {
            required: m as f64,
            budget: EXACT_PACKING_LIMIT as f64,
        });
    }
    let mut conflicts = vec![0u64; m];
    for i in 0..m {
        for j in i + 1..m {
            if distance.eval(&points[i], &points[j]) < eps {
                conflicts[i] |= 1 << j;
                conflicts[j] |= 1 << i;
            }
        }
    }
    let all = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut best = 0u64;
    independent_set(all, 0, &conflicts, &mut best);
    Ok((0..m).filter(|i| best >> i & 1 == 1).collect())
}

fn independent_set(cands: u64, current: u64, conflicts: &[u64], best: &mut u64) {
    if cands == 0 {
        if current.count_ones() > best.count_ones() {
            *best = current;
        }
        return;
    }
    if current.count_ones() + cands.count_ones() <= best.count_ones() {
        return;
    }
    let v = cands.trailing_zeros() as usize;
    let bit = 1u64 << v;
    independent_set(cands & !bit & !conflicts[v], current | bit, conflicts, best);
    if conflicts[v] & cands != 0 {
        independent_set(cands & !bit, current, conflicts, best);
    }
}

/// Exact packing number of a finite point set.
pub fn packing_number(points: &[Point], distance: Distance, eps: f64) -> Result<usize> {
    Ok(max_packing(points, distance, eps)?.len())
}
