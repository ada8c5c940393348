//! Acceptance suite: one test per criterion, each printing a single
//! `[acceptance] C<n> ...: PASS|FAIL` line. Run with `--nocapture` to see them.

mod common;

use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use fundlim_core::control::{
    check_ident_lemma, min_time_lower_bound, min_time_sweep, pathwise_regret, pe_curve, persistent_excitation_prob,
    regret_curve, ControlScenario, ScenarioController,
};
use fundlim_core::entropy::{entropy_curve, Distance, MetricSpaceSpec, PackingSet};
use fundlim_core::experiment::{run_experiment, validate_config, ExperimentConfig};
use fundlim_core::identification::{exact_tabular_report, exhaustive_optimal_error, Identifier};
use fundlim_core::kernel::{
    certainty_equivalence_controller, gaussian_kl, kernel_divergence, sample_trajectory, ControllerPolicy, Feature,
    HistoryView, Hypotheses, InitialLaw, ModelFamily, Obs, SystemModel, TabularPolicy,
};
use fundlim_core::meta::{
    divergence_sum_exact, fano_lower_bound, mutual_information_exact, theorem2_exact, verify_meta_theorem,
    AuxiliaryKernel, Method, Verdict,
};
use fundlim_core::rng::derive_seed;
use fundlim_core::{Error, Point};

const TOL: f64 = 1e-12;

static SERIAL: Mutex<()> = Mutex::new(());

/// Criteria run one at a time so each runtime is measured alone.
fn exclusive() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: &str, title: &str, pass: bool, detail: String, start: Instant, limit: Option<Duration>) {
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let ok = pass && in_time;
    let budget = limit.map(|l| format!(" of {l:?}")).unwrap_or_default();
    println!(
        "[acceptance] {id} {title}: {} ({detail}; {elapsed:.2?}{budget})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{id} failed: {detail}");
    assert!(in_time, "{id} exceeded its runtime limit: {elapsed:?}");
}

fn scalar_obs(x: f64) -> Obs {
    Obs::Real(DVector::from_element(1, x))
}

#[test]
fn c01_gaussian_kl_matches_quadrature() {
    let _guard = exclusive();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for k in 0..50 {
        let var = rng.random_range(0.2..3.0);
        let y = rng.random_range(-2.0..2.0);
        let u = rng.random_range(-1.0..1.0);
        let (p, q) = if k % 2 == 0 {
            (
                SystemModel::scalar(rng.random_range(-1.0..1.0), var).unwrap(),
                SystemModel::scalar(rng.random_range(-1.0..1.0), var).unwrap(),
            )
        } else {
            let feats = vec![Feature::Identity, Feature::Tanh, Feature::Sin];
            let mut theta = || (0..3).map(|_| rng.random_range(-0.5..0.5)).collect::<Vec<f64>>();
            let (a, b) = (theta(), theta());
            (
                SystemModel::nonlinear(a, feats.clone(), var).unwrap(),
                SystemModel::nonlinear(b, feats, var).unwrap(),
            )
        };
        let (ys, us) = ([scalar_obs(y)], [scalar_obs(u)]);
        let closed = kernel_divergence(&p, &q, HistoryView::new(&ys, &us)).unwrap();
        let yv = DVector::from_element(1, y);
        let uv = DVector::from_element(1, u);
        let oracle = kl_quadrature_1d(p.mean(&yv, &uv)[0], var, q.mean(&yv, &uv)[0], var);
        worst = worst.max((closed - oracle).abs());
        cases += 1;
    }
    // Unequal variances through the closed form used by the auxiliary kernels.
    for _ in 0..10 {
        let (mp, mq) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (vp, vq) = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
        let closed = gaussian_kl(&DVector::from_element(1, mp), vp, &DVector::from_element(1, mq), vq);
        worst = worst.max((closed - kl_quadrature_1d(mp, vp, mq, vq)).abs());
        cases += 1;
    }
    for _ in 0..50 {
        let var = rng.random_range(0.3..2.0);
        let mut mat = || DMatrix::from_fn(2, 2, |_, _| rng.random_range(-0.7..0.7));
        let (a, b) = (mat(), mat());
        let y = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
        let u = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
        let p = SystemModel::linear(a, var).unwrap();
        let q = SystemModel::linear(b, var).unwrap();
        let (ys, us) = ([Obs::Real(y.clone())], [Obs::Real(u.clone())]);
        let closed = kernel_divergence(&p, &q, HistoryView::new(&ys, &us)).unwrap();
        let (mp, mq) = (p.mean(&y, &u), q.mean(&y, &u));
        let oracle = kl_quadrature_2d([mp[0], mp[1]], [mq[0], mq[1]], var);
        worst = worst.max((closed - oracle).abs());
        cases += 1;
    }
    report(
        "C1",
        "Gaussian KL closed form vs quadrature",
        worst <= 1e-6,
        format!("{cases} cases, max |diff| = {worst:.3e}"),
        start,
        Some(Duration::from_secs(10)),
    );
}

/// A random controlled chain on a binary alphabet together with its
/// hand-written twin.
struct TabularCase {
    hyp: Arc<Hypotheses>,
    controller: ControllerPolicy,
    paths: Vec<HandPath>,
    horizon: usize,
    nominal: SystemModel,
}

fn random_row(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    let p = rng.random_range(lo..hi);
    vec![p, 1.0 - p]
}

fn tabular_case(rng: &mut ChaCha8Rng, n: usize, inputs: usize, horizon: usize, lo: f64, hi: f64) -> TabularCase {
    let chains: Vec<HandChain> = (0..n)
        .map(|_| HandChain {
            alphabet: 2,
            inputs,
            rows: (0..2 * inputs).map(|_| random_row(rng, lo, hi)).collect(),
        })
        .collect();
    let policy: Vec<Vec<f64>> = if inputs == 1 {
        vec![vec![1.0]; 2]
    } else {
        (0..2).map(|_| random_row(rng, 0.1, 0.9)).collect()
    };
    let controller = ControllerPolicy::Tabular(TabularPolicy::new(inputs, policy.clone()).unwrap());
    let points: Vec<Point> = chains.iter().map(|c| ModelFamily::tabular_point(&c.rows)).collect();
    let family = ModelFamily::tabular(2, inputs).with_initial(InitialLaw::Symbol(0));
    let packing = PackingSet::from_points(points, Distance::EuclideanVector).unwrap();
    let hyp = Arc::new(Hypotheses::new(family, packing).unwrap());
    let nominal_rows = (0..2 * inputs).map(|_| random_row(rng, 0.05, 0.95)).collect();
    let nominal = SystemModel::tabular(2, inputs, nominal_rows)
        .unwrap()
        .with_initial(InitialLaw::Symbol(0))
        .unwrap();
    TabularCase {
        paths: hand_paths(&chains, &policy, 0, horizon),
        hyp,
        controller,
        horizon,
        nominal,
    }
}

fn small_tabular_cases() -> Vec<TabularCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    (0..50)
        .map(|_| {
            let n = rng.random_range(2..=4);
            let inputs = rng.random_range(1..=2);
            let horizon = rng.random_range(1..=3);
            tabular_case(&mut rng, n, inputs, horizon, 0.05, 0.95)
        })
        .collect()
}

fn plug_in_schedules(hyp: &Arc<Hypotheses>, guess: usize) -> Vec<Identifier> {
    let g = Identifier::ConstantGuess(hyp.points()[guess].clone());
    let freq = Identifier::EmpiricalFrequency {
        alphabet: 2,
        inputs: hyp.model(0).as_tabular().unwrap().input_alphabet(),
    };
    vec![
        g.clone(),
        Identifier::PlugInSequence(vec![g.clone(), freq]),
        Identifier::PlugInSequence(vec![g, Identifier::ExhaustiveOptimal(hyp.clone())]),
    ]
}

fn aux_kernels(case: &TabularCase) -> Vec<AuxiliaryKernel> {
    let mut out = vec![
        AuxiliaryKernel::ExactConditionalMixture,
        AuxiliaryKernel::Nominal(case.hyp.model(0).clone()),
        AuxiliaryKernel::Nominal(case.nominal.clone()),
    ];
    out.extend(plug_in_schedules(&case.hyp, case.hyp.len() - 1).into_iter().map(AuxiliaryKernel::PlugIn));
    out
}

fn packing_identifiers(hyp: &Arc<Hypotheses>) -> Vec<Identifier> {
    let inputs = hyp.model(0).as_tabular().unwrap().input_alphabet();
    let freq = Identifier::EmpiricalFrequency { alphabet: 2, inputs };
    vec![
        Identifier::ExhaustiveOptimal(hyp.clone()),
        Identifier::nearest(freq, hyp.packing().clone()),
        Identifier::ConstantGuess(hyp.points()[0].clone()),
    ]
}

#[test]
fn c02_exact_meta_theorem_on_tabular_scenarios() {
    let _guard = exclusive();
    let start = Instant::now();
    let cases = small_tabular_cases();
    let mut min_slack = f64::INFINITY;
    let mut min_gap = f64::INFINITY;
    let mut mixture_err: f64 = 0.0;
    let mut oracle_err: f64 = 0.0;
    let mut all_exact = true;
    let mut checks = 0;
    for case in &cases {
        let info = mutual_information_exact(&case.hyp, &case.controller, case.horizon).unwrap();
        oracle_err = oracle_err.max((info - hand_mutual_information(&case.paths)).abs());
        for aux in aux_kernels(case) {
            let div = divergence_sum_exact(&case.hyp, &case.controller, &aux, case.horizon).unwrap();
            min_gap = min_gap.min(div.total - info);
            if matches!(aux, AuxiliaryKernel::ExactConditionalMixture) {
                mixture_err = mixture_err.max((div.total - info).abs());
            }
            for id in packing_identifiers(&case.hyp) {
                let r = verify_meta_theorem(&case.hyp, &case.controller, &id, &aux, case.horizon, 10, 7).unwrap();
                all_exact &= r.method == Method::Exact;
                min_slack = min_slack.min(r.slack);
                checks += 1;
            }
        }
    }
    let pass = all_exact && min_slack >= -TOL && min_gap >= -TOL && mixture_err <= TOL && oracle_err <= TOL;
    report(
        "C2",
        "exact Meta-Theorem on tabular scenarios",
        pass,
        format!(
            "{} scenarios, {checks} bound checks, min slack {min_slack:.3e}, min(divergence - I) {min_gap:.3e}, \
             |mixture - I| {mixture_err:.1e}, |I - hand I| {oracle_err:.1e}",
            cases.len()
        ),
        start,
        Some(Duration::from_secs(60)),
    );
}

fn random_unit_ball_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let s = m.clone().singular_values().max();
    if s > 1.0 {
        m / s
    } else {
        m
    }
}

#[test]
fn c03_monte_carlo_meta_theorem_on_linear_scenarios() {
    let _guard = exclusive();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut verdicts = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for k in 0..20 {
        let n = 1 + k % 2;
        let count = rng.random_range(2..=8);
        let horizon = rng.random_range(1..=20);
        let var = rng.random_range(0.5..2.0);
        let points: Vec<Point> = (0..count).map(|_| random_unit_ball_matrix(&mut rng, n)).collect();
        let initial = if k % 3 == 0 {
            InitialLaw::Gaussian { variance: 0.5 }
        } else {
            InitialLaw::Zero
        };
        let family = ModelFamily::linear(n, var).with_initial(initial);
        let packing = PackingSet::from_points(points, Distance::SpectralNormMatrix).unwrap();
        let hyp = Arc::new(Hypotheses::new(family, packing).unwrap());
        let controller = match k % 3 {
            0 => ControllerPolicy::Zero,
            1 => ControllerPolicy::feedback(random_unit_ball_matrix(&mut rng, n)),
            _ => certainty_equivalence_controller(1, 0.1, k as u64).unwrap(),
        };
        let identifier = if k % 2 == 0 {
            Identifier::ExhaustiveOptimal(hyp.clone())
        } else {
            Identifier::nearest(Identifier::LeastSquares, hyp.packing().clone())
        };
        let guess = Identifier::ConstantGuess(hyp.points()[0].clone());
        let aux = match k % 4 {
            0 => AuxiliaryKernel::ExactConditionalMixture,
            1 => AuxiliaryKernel::Nominal(hyp.model(count - 1).clone()),
            2 => AuxiliaryKernel::FixedGaussianZeroMean { variance: var },
            _ => AuxiliaryKernel::PlugIn(Identifier::PlugInSequence(vec![guess, Identifier::RegressionLeastSquares])),
        };
        let r = verify_meta_theorem(&hyp, &controller, &identifier, &aux, horizon, 10_000, 3000 + k as u64).unwrap();
        if r.combined_std_error > 0.0 {
            min_ratio = min_ratio.min(r.slack / r.combined_std_error);
        }
        verdicts.push(r.verdict);
    }
    let violated = verdicts.iter().filter(|v| **v == Verdict::Violated).count();
    let marginal = verdicts.iter().filter(|v| **v == Verdict::HoldsWithinMcError).count();
    report(
        "C3",
        "Monte-Carlo Meta-Theorem on linear-Gaussian scenarios",
        violated == 0,
        format!("20 scenarios, {violated} violated, {marginal} within MC error, min slack/se {min_ratio:.2}"),
        start,
        Some(Duration::from_secs(120)),
    );
}

#[test]
fn c04_bayes_error_respects_fano() {
    let _guard = exclusive();
    let start = Instant::now();
    let mut min_margin = f64::INFINITY;
    let mut oracle_err: f64 = 0.0;
    let cases = small_tabular_cases();
    for case in &cases {
        let info = mutual_information_exact(&case.hyp, &case.controller, case.horizon).unwrap();
        let opt = exhaustive_optimal_error(&case.hyp, &case.controller, case.horizon).unwrap();
        oracle_err = oracle_err.max((opt.bayes_error - hand_bayes_error(&case.paths)).abs());
        min_margin = min_margin.min(opt.bayes_error - fano_lower_bound(case.hyp.len(), info).unwrap());
    }
    report(
        "C4",
        "Bayes error vs Fano bound",
        min_margin >= -TOL && oracle_err <= TOL,
        format!(
            "{} scenarios, min margin {min_margin:.3e}, |Bayes - hand Bayes| {oracle_err:.1e}",
            cases.len()
        ),
        start,
        None,
    );
}

#[test]
fn c05_separation_bound_chain() {
    let _guard = exclusive();
    let start = Instant::now();
    let mut min_margin = f64::INFINITY;
    let mut checks = 0;
    let mut with_minimax = 0;
    for case in small_tabular_cases() {
        let hyp = &case.hyp;
        let n = hyp.len();
        let opt = exhaustive_optimal_error(hyp, &case.controller, case.horizon).unwrap();
        // inf over rules of the largest error probability, by brute force when small enough.
        let mut lower = opt.bayes_error;
        if (n as f64).powi(case.paths.len() as i32) <= 2e6 {
            let zero_one: Vec<Vec<f64>> =
                (0..n).map(|j| (0..n).map(|i| if i == j { 0.0 } else { 1.0 }).collect()).collect();
            let minimax = hand_minimax(&case.paths, &zero_one);
            assert!(minimax >= opt.bayes_error - TOL);
            lower = lower.max(minimax);
            with_minimax += 1;
        }
        let half_sep = hyp.packing().separation() / 2.0;
        let inputs = hyp.model(0).as_tabular().unwrap().input_alphabet();
        let mut ids = packing_identifiers(hyp);
        ids.push(Identifier::EmpiricalFrequency { alphabet: 2, inputs });
        ids.extend((1..n).map(|i| Identifier::ConstantGuess(hyp.points()[i].clone())));
        for id in ids {
            let r = exact_tabular_report(hyp, &case.controller, &id, case.horizon).unwrap();
            min_margin = min_margin.min(r.worst_case - half_sep * lower);
            checks += 1;
        }
    }
    report(
        "C5",
        "worst-case metric error vs separation bound",
        min_margin >= -TOL,
        format!("{checks} identifier checks ({with_minimax} scenarios with brute-force minimax), min margin {min_margin:.3e}"),
        start,
        None,
    );
}

#[test]
fn c06_critical_separation_floor() {
    let _guard = exclusive();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut separated, mut vacuous, mut violations) = (0, 0, 0);
    let mut oracle_err: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for k in 0..30 {
        let n = rng.random_range(8..=10);
        let horizon = 1 + k % 2;
        let case = tabular_case(&mut rng, n, 1, horizon, 0.35, 0.65);
        let rho: Vec<Vec<f64>> = case
            .hyp
            .points()
            .iter()
            .map(|a| case.hyp.points().iter().map(|b| (a - b).norm()).collect())
            .collect();
        let brute = hand_minimax(&case.paths, &rho);
        for plug in plug_in_schedules(&case.hyp, k % n) {
            match theorem2_exact(&case.hyp, &case.controller, &plug, horizon) {
                Ok(r) => {
                    separated += 1;
                    let m = r.minimax_error.unwrap();
                    oracle_err = oracle_err.max((m - brute).abs());
                    min_margin = min_margin.min(m - r.floor);
                    if m < r.floor - TOL {
                        violations += 1;
                    }
                }
                Err(Error::NoSeparation { .. }) => vacuous += 1,
                Err(e) => panic!("{e}"),
            }
        }
    }
    report(
        "C6",
        "minimax metric error vs critical-separation floor",
        violations == 0 && separated > 0 && oracle_err <= TOL,
        format!(
            "{separated} runs with a separation ({vacuous} without), {violations} violations, \
             min margin {min_margin:.3e}, |minimax - brute force| {oracle_err:.1e}"
        ),
        start,
        None,
    );
}

#[test]
fn c07_pathwise_least_squares_bound() {
    let _guard = exclusive();
    let start = Instant::now();
    let a = DMatrix::from_row_slice(2, 2, &[0.6, 0.3, -0.2, 0.5]);
    let model = SystemModel::linear(a.clone(), 1.0).unwrap();
    let ce = certainty_equivalence_controller(1, 0.1, 77).unwrap();
    let checks: Vec<(bool, bool)> = (0..10_000u64)
        .into_par_iter()
        .map(|k| {
            let tr = sample_trajectory(&model, &ce, 50, derive_seed(707, k)).unwrap();
            let c = check_ident_lemma(&tr, &a, 0.1).unwrap();
            (c.pe_event_held, c.lemma_held)
        })
        .collect();
    let excited = checks.iter().filter(|c| c.0).count();
    let violations = checks.iter().filter(|c| c.0 && !c.1).count();
    report(
        "C7",
        "pathwise least-squares bound under excitation",
        violations == 0 && excited > 0,
        format!("{excited} of 10000 paths excited, {violations} violations"),
        start,
        None,
    );
}

#[test]
fn c08_regret_oracles() {
    let _guard = exclusive();
    let start = Instant::now();
    let model = SystemModel::scalar(1.0, 1.0).unwrap();
    let zero = regret_curve(&model, &ControllerPolicy::Zero, &[3], 100_000, 808, 0).unwrap();
    let r3 = zero.per_t[0].mean;
    let rel = (r3 - 3.0).abs() / 3.0;
    let oracle = ScenarioController::Oracle.for_system(&DMatrix::from_element(1, 1, 1.0));
    let mut max_oracle: f64 = 0.0;
    for k in 0..1000 {
        let tr = sample_trajectory(&model, &oracle, 25, derive_seed(809, k)).unwrap();
        max_oracle = max_oracle.max(pathwise_regret(&tr).unwrap().abs());
    }
    let curve = regret_curve(&model, &oracle, &[1, 5, 25], 1000, 810, 0).unwrap();
    let curve_zero = curve.per_t.iter().all(|p| p.mean == 0.0 && p.std_error == 0.0);
    report(
        "C8",
        "regret oracles",
        rel <= 0.02 && max_oracle == 0.0 && curve_zero,
        format!("zero input R_3 = {r3:.4} (rel. err {rel:.2e}), oracle max pathwise regret {max_oracle}"),
        start,
        None,
    );
}

#[test]
fn c09_excitation_of_white_noise() {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let _guard = exclusive();
    let start = Instant::now();
    let sc = ControlScenario::new(
        1,
        1.0,
        vec![DMatrix::zeros(1, 1)],
        ScenarioController::Policy(ControllerPolicy::Zero),
        0.5,
        0.05,
    )
    .unwrap();
    let p = persistent_excitation_prob(&sc, &sc.model(0).unwrap(), 200, 10_000, 909).unwrap();
    // With Y_1 = 0 the Gram sum is chi-square with T - 1 degrees of freedom.
    let predicted = 1.0 - ChiSquared::new(199.0).unwrap().cdf(0.5 * 200.0);
    report(
        "C9",
        "excitation probability of white noise",
        p.mean >= 0.95 && predicted > 0.999,
        format!("empirical {:.4}, chi-square prediction {predicted:.6}", p.mean),
        start,
        None,
    );
}

#[test]
fn c10_minimum_time_consistency() {
    let _guard = exclusive();
    let start = Instant::now();
    let (c, delta, var) = (0.5, 0.2, 1.0);
    let systems: Vec<DMatrix<f64>> = [-0.8, 0.0, 0.5, 0.9].iter().map(|a| DMatrix::from_element(1, 1, *a)).collect();
    let ce = certainty_equivalence_controller(1, 0.1, 5).unwrap();
    let sc = ControlScenario::new(1, var, systems, ScenarioController::Policy(ce), c, delta).unwrap();
    let horizons = [5, 10, 20, 50, 100, 200, 400];
    let trials = 2000;
    let pe_ok = (0..sc.systems.len()).all(|i| {
        let curve = pe_curve(&sc, i, &horizons, trials, derive_seed(1010, i as u64)).unwrap();
        curve.t0.is_some()
    });
    let epsilons = [1e-4, 1e-3, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 1.2, 1.5, 2.0];
    let times = min_time_sweep(&sc, &epsilons, &horizons, trials, 1011).unwrap();
    let space = MetricSpaceSpec::spectral_ball(1, 0.001).unwrap();
    let eps_grid: Vec<f64> = (1..=20).map(|k| 0.01 * k as f64).collect();
    let b_n = entropy_curve(&space, &eps_grid, 0)
        .unwrap()
        .fit_affine(0.01, 0.2, Some(1.0))
        .unwrap()
        .intercept;
    let mut consistent = true;
    let mut summary = Vec::new();
    for m in &times {
        let bound = min_time_lower_bound(1, var, m.epsilon, c, sc.initial_second_moment(), b_n).unwrap();
        // An unreached level counts as an infinite empirical time.
        consistent &= m.time.is_none_or(|t| bound <= t as f64);
        summary.push(format!("{}:{:?}>={bound:.0}", m.epsilon, m.time));
    }
    let monotone = times.windows(2).all(|w| match (w[0].time, w[1].time) {
        (_, None) => w[0].time.is_none(),
        (None, Some(_)) => true,
        (Some(a), Some(b)) => a >= b,
    });
    let reached = times.iter().filter(|m| m.time.is_some()).count();
    report(
        "C10",
        "minimum-time lower bound vs certainty-equivalence sweep",
        pe_ok && consistent && monotone && reached > 0,
        format!(
            "excitation verified: {pe_ok}, b_n = {b_n:.3}, {reached} levels reached, T*(eps) >= bound: [{}]",
            summary.join(", ")
        ),
        start,
        None,
    );
}

fn determinism_configs() -> Vec<ExperimentConfig> {
    let docs = [
        r#"{"experiment": "meta_verify", "model_kind": "tabular_finite", "distance": "euclidean_vector",
            "horizon": 3, "aux": "plug_in", "plug_in": "empirical_frequency",
            "parameters": [[0.9, 0.1, 0.2, 0.8], [0.5, 0.5, 0.5, 0.5], [0.3, 0.7, 0.6, 0.4]]}"#,
        r#"{"experiment": "meta_verify", "dimension": 2, "separation": 0.9, "horizon": 8, "trials": 2000,
            "controller": "certainty_equivalence", "identifier": "least_squares_nearest"}"#,
        r#"{"experiment": "divergence", "dimension": 1, "separation": 0.4, "horizon": 6, "trials": 2000,
            "aux": "fixed_gaussian_zero_mean"}"#,
        r#"{"experiment": "identify", "dimension": 1, "separation": 0.5, "horizon": 10, "trials": 1000,
            "identifier": "regression_nearest", "controller": "certainty_equivalence"}"#,
        r#"{"experiment": "control_regret", "parameters": [[1.0]], "horizons": [1, 2, 3], "trials": 20000}"#,
        r#"{"experiment": "pe_check", "parameters": [[0.0]], "horizons": [50, 200], "trials": 4000}"#,
        r#"{"experiment": "min_time", "parameters": [[-0.8], [0.5]], "controller": "certainty_equivalence",
            "pe_confidence": 0.2, "horizons": [10, 50, 100], "regret_levels": [0.5, 1.0, 1.5], "trials": 500}"#,
        r#"{"experiment": "theorem2", "dimension": 1, "separation": 0.25, "horizon": 5, "trials": 500,
            "plug_in": "regression", "grid_resolution": 0.01}"#,
        r#"{"experiment": "packing", "dimension": 2, "grid_resolution": 0.2, "base_seed": 9}"#,
    ];
    docs.iter().map(|d| validate_config(d).unwrap()).collect()
}

#[test]
fn c11_payloads_independent_of_worker_count() {
    let _guard = exclusive();
    let start = Instant::now();
    let mut mismatched = Vec::new();
    let configs = determinism_configs();
    for cfg in &configs {
        let payloads: Vec<Vec<u8>> = [1, 4]
            .iter()
            .map(|&w| {
                let mut c = cfg.clone();
                c.worker_count = w;
                run_experiment(&c).unwrap().payload_bytes()
            })
            .collect();
        if payloads[0] != payloads[1] {
            mismatched.push(format!("{:?}", cfg.experiment));
        }
    }
    report(
        "C11",
        "payloads identical at 1 and 4 workers",
        mismatched.is_empty(),
        format!("{} configs, mismatched: {mismatched:?}", configs.len()),
        start,
        None,
    );
}
