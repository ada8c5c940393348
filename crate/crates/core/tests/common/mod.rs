//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerical code.
#![allow(dead_code)]

use std::f64::consts::PI;

fn simpson_rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below about 1e-15 the difference is rounding noise.
    if depth == 0 || delta.abs() <= 15.0 * tol.max(1e-15) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Split first so a narrow peak cannot hide between the initial nodes.
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_rec(f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 30)
        })
        .sum()
}

/// Iterated adaptive Simpson over a rectangle.
pub fn simpson_2d(f: &dyn Fn(f64, f64) -> f64, x: (f64, f64), y: (f64, f64), tol: f64) -> f64 {
    let width = y.1 - y.0;
    let inner = |xv: f64| simpson(&|yv| f(xv, yv), y.0, y.1, tol / (4.0 * width));
    simpson(&inner, x.0, x.1, tol)
}

pub fn normal_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -(x - mean) * (x - mean) / (2.0 * var) - 0.5 * (2.0 * PI * var).ln()
}

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    normal_log_pdf(x, mean, var).exp()
}

/// `int p log(p / q)` for two scalar normal laws, by quadrature.
pub fn kl_quadrature_1d(mp: f64, vp: f64, mq: f64, vq: f64) -> f64 {
    let s = vp.sqrt();
    // Log densities, so a far-away q cannot underflow to zero.
    let f = |x: f64| normal_pdf(x, mp, vp) * (normal_log_pdf(x, mp, vp) - normal_log_pdf(x, mq, vq));
    simpson(&f, mp - 14.0 * s, mp + 14.0 * s, 1e-10)
}

/// `int p log(p / q)` for two isotropic normal laws on the plane.
pub fn kl_quadrature_2d(mp: [f64; 2], mq: [f64; 2], var: f64) -> f64 {
    let s = var.sqrt();
    let log_density = |x: f64, y: f64, m: [f64; 2]| normal_log_pdf(x, m[0], var) + normal_log_pdf(y, m[1], var);
    let f = |x: f64, y: f64| {
        let lp = log_density(x, y, mp);
        lp.exp() * (lp - log_density(x, y, mq))
    };
    let r = 10.0 * s;
    simpson_2d(&f, (mp[0] - r, mp[0] + r), (mp[1] - r, mp[1] + r), 1e-8)
}

/// Largest subset with all pairwise distances at least `eps`, by trying
/// every subset.
pub fn brute_force_packing(n: usize, dist: &dyn Fn(usize, usize) -> f64, eps: f64) -> usize {
    assert!(n <= 20);
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let ok = members
            .iter()
            .enumerate()
            .all(|(k, &i)| members[k + 1..].iter().all(|&j| dist(i, j) >= eps));
        if ok {
            best = size;
        }
    }
    best
}

/// Controlled Markov chain written out by hand: `rows[y * inputs + u][y']`.
#[derive(Debug, Clone)]
pub struct HandChain {
    pub alphabet: usize,
    pub inputs: usize,
    pub rows: Vec<Vec<f64>>,
}

/// One complete path with its probability under each hypothesis.
#[derive(Debug, Clone)]
pub struct HandPath {
    pub outputs: Vec<usize>,
    pub inputs: Vec<usize>,
    pub probs: Vec<f64>,
}

/// Every path of `horizon` steps from `y1`, with inputs drawn from
/// `policy[y][u]`.
pub fn hand_paths(chains: &[HandChain], policy: &[Vec<f64>], y1: usize, horizon: usize) -> Vec<HandPath> {
    let mut out = Vec::new();
    let mut stack = vec![HandPath {
        outputs: vec![y1],
        inputs: vec![],
        probs: vec![1.0; chains.len()],
    }];
    while let Some(p) = stack.pop() {
        if p.inputs.len() == horizon {
            out.push(p);
            continue;
        }
        let y = *p.outputs.last().unwrap();
        let m = chains[0].inputs;
        for u in 0..m {
            for y_next in 0..chains[0].alphabet {
                let probs: Vec<f64> = chains
                    .iter()
                    .zip(&p.probs)
                    .map(|(c, w)| w * policy[y][u] * c.rows[y * m + u][y_next])
                    .collect();
                if probs.iter().all(|w| *w == 0.0) {
                    continue;
                }
                let mut q = p.clone();
                q.outputs.push(y_next);
                q.inputs.push(u);
                q.probs = probs;
                stack.push(q);
            }
        }
    }
    out
}

/// `I(W; Z)` with `W` uniform.
pub fn hand_mutual_information(paths: &[HandPath]) -> f64 {
    let n = paths[0].probs.len() as f64;
    paths
        .iter()
        .map(|p| {
            let mix = p.probs.iter().sum::<f64>() / n;
            p.probs
                .iter()
                .filter(|w| **w > 0.0)
                .map(|w| w / n * (w / mix).ln())
                .sum::<f64>()
        })
        .sum()
}

/// Error probability of the MAP rule under a uniform prior.
pub fn hand_bayes_error(paths: &[HandPath]) -> f64 {
    let n = paths[0].probs.len() as f64;
    1.0 - paths
        .iter()
        .map(|p| p.probs.iter().cloned().fold(0.0, f64::max))
        .sum::<f64>()
        / n
}

/// `min_g max_i sum_paths P_i(path) rho(g(path), i)` over every rule.
pub fn hand_minimax(paths: &[HandPath], rho: &[Vec<f64>]) -> f64 {
    let n = rho.len();
    let l = paths.len();
    assert!((n as f64).powi(l as i32) <= 2e6, "too many rules");
    let mut rule = vec![0usize; l];
    let mut best = f64::INFINITY;
    loop {
        let worst = (0..n)
            .map(|i| (0..l).map(|k| paths[k].probs[i] * rho[rule[k]][i]).sum::<f64>())
            .fold(0.0, f64::max);
        best = best.min(worst);
        let mut k = 0;
        while k < l {
            rule[k] += 1;
            if rule[k] < n {
                break;
            }
            rule[k] = 0;
            k += 1;
        }
        if k == l {
            return best;
        }
    }
}
