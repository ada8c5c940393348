use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{
    AuxKind, ControllerKind, ExperimentConfig, ExperimentKind, IdentifierKind, PlugInKind,
};
use crate::control::{
    min_time_lower_bound, min_time_sweep, pe_curve, scenario_regret_curves, ControlScenario, ScenarioController,
};
use crate::entropy::{entropy_cap_from_rates, entropy_curve, greedy_packing, EntropyCurve, MetricSpaceSpec, PackingSet};
use crate::error::{Error, Result};
use crate::identification::{empirical_id_report, exact_tabular_report, exhaustive_optimal_error, Identifier};
use crate::kernel::{
    certainty_equivalence_controller, enumerate_paths, ControllerPolicy, Hypotheses, InitialLaw, ModelFamily,
    ModelKind, TabularPolicy, ENUMERATION_BUDGET,
};
use crate::meta::{
    divergence_sum, divergence_sum_exact, fano_lower_bound, mutual_information_exact, mutual_information_mc,
    theorem2_exact, theorem2_pipeline, verify_meta_theorem, AuxiliaryKernel, Method, Theorem2Setup, Verdict,
    EXACT_TOLERANCE,
};
use crate::rng::derive_seed;
use crate::Point;

/// A plot-ready CSV emitted next to the record.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    /// Suffix inserted before `.csv` in the output file name.
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    /// SHA-256 of `blob <len>\0<config json>`, as git hashes objects.
    pub config_hash: String,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
    pub payload: Value,
    pub verdict: Verdict,
    pub library_version: String,
    #[serde(skip)]
    pub csv: Vec<CsvFile>,
}

impl RunRecord {
    /// Serialized payload; identical for identical config and seed.
    pub fn payload_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.payload).expect("json values always serialize")
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records always serialize")
    }

    /// Writes the record to `path` and each CSV to `<stem>.<name>.csv` beside it.
    pub fn write(&self, path: &Path) -> Result<Vec<PathBuf>> {
        let io = |p: &Path, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        fs::write(path, self.to_json()).map_err(|e| io(path, e))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let mut written = vec![path.to_path_buf()];
        for f in &self.csv {
            let p = path.with_file_name(format!("{stem}.{}.csv", f.name));
            fs::write(&p, &f.contents).map_err(|e| io(&p, e))?;
            written.push(p);
        }
        Ok(written)
    }
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let body = serde_json::to_string(config).expect("configs always serialize");
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()));
    h.update(body.as_bytes());
    hex::encode(h.finalize())
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports always serialize")
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(vec![msg.into()])
}

struct Outcome {
    payload: Value,
    verdict: Verdict,
    csv: Vec<CsvFile>,
}

impl Outcome {
    fn holds(payload: Value) -> Self {
        Outcome {
            payload,
            verdict: Verdict::Holds,
            csv: Vec::new(),
        }
    }
}

/// Validates the config, runs it on `worker_count` threads, and writes the
/// record to `output_path` when one is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    let problems = config.problems();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let started_at = now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| dispatch(config))?;
    let record = RunRecord {
        config: config.clone(),
        config_hash: config_hash(config),
        started_at,
        finished_at: now(),
        payload: outcome.payload,
        verdict: outcome.verdict,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        csv: outcome.csv,
    };
    if let Some(path) = &config.output_path {
        record.write(Path::new(path))?;
    }
    Ok(record)
}

fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        ExperimentKind::Packing => run_packing(cfg),
        ExperimentKind::Divergence => run_divergence(cfg),
        ExperimentKind::Fano => {
            let bound = fano_lower_bound(cfg.num_hypotheses, cfg.mutual_info)?;
            Ok(Outcome::holds(json!({
                "num_hypotheses": cfg.num_hypotheses,
                "mutual_info": cfg.mutual_info,
                "bound": bound,
            })))
        }
        ExperimentKind::MetaVerify => run_meta(cfg),
        ExperimentKind::Theorem2 => run_theorem2(cfg),
        ExperimentKind::Theorem3 => {
            let betas = if cfg.betas.is_empty() {
                (0..=cfg.horizon).map(|t| 1.0 / (t as f64 + 1.0)).collect()
            } else {
                cfg.betas.clone()
            };
            let cap = entropy_cap_from_rates(cfg.rate_constant, cfg.rate_exponent, &betas, cfg.horizon)?;
            Ok(Outcome::holds(json!({ "betas": betas, "cap": to_value(&cap) })))
        }
        ExperimentKind::Identify => run_identify(cfg),
        ExperimentKind::ControlRegret => run_regret(cfg),
        ExperimentKind::PeCheck => run_pe(cfg),
        ExperimentKind::MinTime => run_min_time(cfg),
    }
}

fn initial_law(cfg: &ExperimentConfig) -> InitialLaw {
    match cfg.model_kind {
        ModelKind::TabularFinite => InitialLaw::Symbol(cfg.initial_symbol),
        _ if cfg.initial_variance > 0.0 => InitialLaw::Gaussian {
            variance: cfg.initial_variance,
        },
        _ => InitialLaw::Zero,
    }
}

fn family(cfg: &ExperimentConfig) -> ModelFamily {
    let base = match cfg.model_kind {
        ModelKind::LinearGaussian => ModelFamily::linear(cfg.dimension, cfg.noise_variance),
        ModelKind::ScalarNonlinearGaussian => ModelFamily::Nonlinear {
            features: cfg.features.clone(),
            noise_variance: cfg.noise_variance,
            initial: InitialLaw::Zero,
        },
        ModelKind::TabularFinite => ModelFamily::tabular(cfg.alphabet, cfg.input_alphabet),
    };
    base.with_initial(initial_law(cfg))
}

fn point_shape(cfg: &ExperimentConfig) -> (usize, usize) {
    match cfg.model_kind {
        ModelKind::LinearGaussian => (cfg.dimension, cfg.dimension),
        ModelKind::ScalarNonlinearGaussian => (cfg.features.len(), 1),
        ModelKind::TabularFinite => (cfg.alphabet * cfg.input_alphabet * cfg.alphabet, 1),
    }
}

fn explicit_points(cfg: &ExperimentConfig) -> Vec<Point> {
    let (r, c) = point_shape(cfg);
    cfg.parameters.iter().map(|p| DMatrix::from_row_slice(r, c, p)).collect()
}

/// Explicit parameters, or the grid over the parameter ball.
fn space(cfg: &ExperimentConfig) -> Result<MetricSpaceSpec> {
    if cfg.parameters.is_empty() {
        let (r, c) = point_shape(cfg);
        MetricSpaceSpec::ball_grid(cfg.distance, r, c, cfg.radius, cfg.grid_resolution)
    } else {
        MetricSpaceSpec::from_points(cfg.distance, explicit_points(cfg))
    }
}

fn hypotheses(cfg: &ExperimentConfig) -> Result<Arc<Hypotheses>> {
    let packing = if cfg.parameters.is_empty() {
        greedy_packing(&space(cfg)?, cfg.separation, 0)?
    } else {
        PackingSet::multiset(explicit_points(cfg), cfg.distance)?
    };
    Ok(Arc::new(Hypotheses::new(family(cfg), packing)?))
}

fn policy(cfg: &ExperimentConfig) -> Result<ControllerPolicy> {
    let n = cfg.dimension;
    Ok(match cfg.controller {
        ControllerKind::Zero if cfg.model_kind == ModelKind::TabularFinite => {
            ControllerPolicy::Tabular(TabularPolicy::constant(cfg.alphabet))
        }
        ControllerKind::Zero => ControllerPolicy::Zero,
        ControllerKind::LinearFeedback => ControllerPolicy::feedback(if cfg.gain.is_empty() {
            DMatrix::zeros(n, n)
        } else {
            DMatrix::from_row_slice(n, n, &cfg.gain)
        }),
        ControllerKind::CertaintyEquivalence => {
            certainty_equivalence_controller(cfg.update_period, cfg.dither_amplitude, cfg.dither_seed)?
        }
        ControllerKind::Oracle => {
            return Err(config_error(
                "controller: oracle is only available for control_regret, pe_check and min_time",
            ))
        }
        ControllerKind::TabularConstant => ControllerPolicy::Tabular(TabularPolicy::constant(cfg.alphabet)),
        ControllerKind::TabularUniform => {
            let m = cfg.input_alphabet;
            ControllerPolicy::Tabular(TabularPolicy::new(m, vec![vec![1.0 / m as f64; m]; cfg.alphabet])?)
        }
    })
}

fn point_at(hyp: &Hypotheses, index: usize, field: &str) -> Result<Point> {
    hyp.points()
        .get(index)
        .cloned()
        .ok_or_else(|| config_error(format!("{field}: {index} is not below the {} hypotheses", hyp.len())))
}

fn identifier(cfg: &ExperimentConfig, hyp: &Arc<Hypotheses>) -> Result<Identifier> {
    let freq = Identifier::EmpiricalFrequency {
        alphabet: cfg.alphabet,
        inputs: cfg.input_alphabet,
    };
    let packing = hyp.packing().clone();
    Ok(match cfg.identifier {
        IdentifierKind::MaximumLikelihood => Identifier::ExhaustiveOptimal(hyp.clone()),
        IdentifierKind::LeastSquaresNearest => Identifier::nearest(Identifier::LeastSquares, packing),
        IdentifierKind::RegressionNearest => Identifier::nearest(Identifier::RegressionLeastSquares, packing),
        IdentifierKind::ConstantGuess => Identifier::ConstantGuess(point_at(hyp, cfg.guess_index, "guess_index")?),
        IdentifierKind::EmpiricalFrequency => freq,
        IdentifierKind::EmpiricalFrequencyNearest => Identifier::nearest(freq, packing),
    })
}

fn plug_in(cfg: &ExperimentConfig, hyp: &Arc<Hypotheses>) -> Result<Identifier> {
    let guess = Identifier::ConstantGuess(point_at(hyp, cfg.initial_guess_index, "initial_guess_index")?);
    let later = match cfg.plug_in {
        PlugInKind::Constant => return Ok(guess),
        PlugInKind::EmpiricalFrequency => Identifier::EmpiricalFrequency {
            alphabet: cfg.alphabet,
            inputs: cfg.input_alphabet,
        },
        PlugInKind::Regression => Identifier::RegressionLeastSquares,
        PlugInKind::MaximumLikelihood => Identifier::ExhaustiveOptimal(hyp.clone()),
    };
    Ok(Identifier::PlugInSequence(vec![guess, later]))
}

fn aux(cfg: &ExperimentConfig, hyp: &Arc<Hypotheses>) -> Result<AuxiliaryKernel> {
    Ok(match cfg.aux {
        AuxKind::Nominal => AuxiliaryKernel::Nominal(
            hyp.models()
                .get(cfg.nominal_index)
                .cloned()
                .ok_or_else(|| config_error("nominal_index: out of range"))?,
        ),
        AuxKind::PlugIn => AuxiliaryKernel::PlugIn(plug_in(cfg, hyp)?),
        AuxKind::FixedGaussianZeroMean => AuxiliaryKernel::FixedGaussianZeroMean {
            variance: cfg.aux_variance,
        },
        AuxKind::ExactConditionalMixture => AuxiliaryKernel::ExactConditionalMixture,
    })
}

fn enumerable(hyp: &Hypotheses, controller: &ControllerPolicy, horizon: usize) -> bool {
    hyp.is_tabular() && enumerate_paths(hyp.models(), controller, horizon, ENUMERATION_BUDGET).is_ok()
}

fn curve_csv(curve: &EntropyCurve) -> Result<CsvFile> {
    Ok(CsvFile {
        name: "entropy".into(),
        contents: csv_string(|b| curve.write_csv(b))?,
    })
}

fn steps_csv(rows: impl Iterator<Item = (usize, f64, f64)>) -> Result<CsvFile> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["t", "estimate", "std_error"]).map_err(io)?;
    for (t, m, s) in rows {
        w.serialize((t, m, s)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes)
        .map(|contents| CsvFile {
            name: "steps".into(),
            contents,
        })
        .map_err(|e| Error::Io(e.to_string()))
}

fn point_rows(points: &[Point]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.transpose().iter().copied().collect()).collect()
}

fn run_packing(cfg: &ExperimentConfig) -> Result<Outcome> {
    let space = space(cfg)?;
    let packing = greedy_packing(&space, cfg.separation, cfg.base_seed)?;
    let curve = entropy_curve(&space, &cfg.epsilons, cfg.base_seed)?;
    let fit = curve.fit_affine(cfg.fit_range[0], cfg.fit_range[1], None).ok();
    let payload = json!({
        "candidates": space.candidates().len(),
        "packing": {
            "size": packing.len(),
            "separation": packing.separation(),
            "maximal": packing.is_maximal(),
            "points": point_rows(packing.points()),
        },
        "curve": to_value(&curve),
        "fit": to_value(&fit),
    });
    Ok(Outcome {
        csv: vec![curve_csv(&curve)?],
        ..Outcome::holds(payload)
    })
}

fn run_divergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let hyp = hypotheses(cfg)?;
    let controller = policy(cfg)?;
    let aux = aux(cfg, &hyp)?;
    let (div, info, method) = if enumerable(&hyp, &controller, cfg.horizon) {
        let info = mutual_information_exact(&hyp, &controller, cfg.horizon)?;
        (
            divergence_sum_exact(&hyp, &controller, &aux, cfg.horizon)?,
            json!({ "mean": info, "std_error": 0.0 }),
            Method::Exact,
        )
    } else {
        let d = divergence_sum(&hyp, &controller, &aux, cfg.horizon, cfg.trials, derive_seed(cfg.base_seed, 1))?;
        let i = mutual_information_mc(&hyp, &controller, cfg.horizon, cfg.trials, derive_seed(cfg.base_seed, 2))?;
        (d, to_value(&i), Method::MonteCarlo)
    };
    let csv = steps_csv(div.per_step.iter().map(|s| (s.t, s.estimate, s.std_error)))?;
    Ok(Outcome {
        csv: vec![csv],
        ..Outcome::holds(json!({
            "num_hypotheses": hyp.len(),
            "aux": aux.name(),
            "method": to_value(&method),
            "divergence": to_value(&div),
            "mutual_information": info,
        }))
    })
}

fn run_meta(cfg: &ExperimentConfig) -> Result<Outcome> {
    let hyp = hypotheses(cfg)?;
    let controller = policy(cfg)?;
    let id = identifier(cfg, &hyp)?;
    let aux = aux(cfg, &hyp)?;
    let report = verify_meta_theorem(&hyp, &controller, &id, &aux, cfg.horizon, cfg.trials, cfg.base_seed)?;
    let csv = steps_csv(report.per_step.iter().map(|s| (s.t, s.estimate, s.std_error)))?;
    Ok(Outcome {
        payload: to_value(&report),
        verdict: report.verdict,
        csv: vec![csv],
    })
}

fn run_theorem2(cfg: &ExperimentConfig) -> Result<Outcome> {
    let hyp = hypotheses(cfg)?;
    let controller = policy(cfg)?;
    let plug = plug_in(cfg, &hyp)?;
    let result = if hyp.is_tabular() {
        theorem2_exact(&hyp, &controller, &plug, cfg.horizon)
    } else {
        let space = space(cfg)?;
        let setup = Theorem2Setup {
            family: hyp.family(),
            space: &space,
            probes: hyp.points(),
            epsilons: &cfg.epsilons,
        };
        theorem2_pipeline(setup, &controller, &plug, cfg.horizon, cfg.trials, cfg.base_seed)
    };
    match result {
        Ok(report) => {
            let verdict = match report.minimax_error {
                Some(m) if m < report.floor - EXACT_TOLERANCE => Verdict::Violated,
                _ => Verdict::Holds,
            };
            let mut csv = vec![curve_csv(&report.curve)?];
            csv.push(steps_csv(report.deltas.iter().map(|s| (s.t, s.estimate, s.std_error)))?);
            Ok(Outcome {
                payload: json!({ "separation_exists": true, "report": to_value(&report) }),
                verdict,
                csv,
            })
        }
        // The floor is vacuous when no packing is rich enough.
        Err(Error::NoSeparation { target, max }) => Ok(Outcome::holds(json!({
            "separation_exists": false,
            "target_entropy": target,
            "max_entropy": max,
        }))),
        Err(e) => Err(e),
    }
}

fn run_identify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let hyp = hypotheses(cfg)?;
    let controller = policy(cfg)?;
    let id = identifier(cfg, &hyp)?;
    let payload = if enumerable(&hyp, &controller, cfg.horizon) {
        json!({
            "method": to_value(&Method::Exact),
            "report": to_value(&exact_tabular_report(&hyp, &controller, &id, cfg.horizon)?),
            "optimal": to_value(&exhaustive_optimal_error(&hyp, &controller, cfg.horizon)?),
        })
    } else {
        json!({
            "method": to_value(&Method::MonteCarlo),
            "report": to_value(&empirical_id_report(&hyp, &controller, &id, cfg.horizon, cfg.trials, cfg.base_seed)?),
        })
    };
    Ok(Outcome::holds(payload))
}

fn scenario(cfg: &ExperimentConfig) -> Result<ControlScenario> {
    if cfg.model_kind != ModelKind::LinearGaussian {
        return Err(config_error("model_kind: control experiments need linear_gaussian"));
    }
    let systems = if cfg.parameters.is_empty() {
        hypotheses(cfg)?.points().to_vec()
    } else {
        explicit_points(cfg)
    };
    let controller = match cfg.controller {
        ControllerKind::Oracle => ScenarioController::Oracle,
        _ => ScenarioController::Policy(policy(cfg)?),
    };
    ControlScenario::new(
        cfg.dimension,
        cfg.noise_variance,
        systems,
        controller,
        cfg.pe_constant,
        cfg.pe_confidence,
    )?
    .with_initial(initial_law(cfg))
}

fn run_regret(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sc = scenario(cfg)?;
    let curves = scenario_regret_curves(&sc, &cfg.horizons, cfg.trials, cfg.base_seed)?;
    let csv = curves
        .iter()
        .map(|c| {
            Ok(CsvFile {
                name: format!("regret_{}", c.model_id),
                contents: csv_string(|b| c.write_csv(b))?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Outcome {
        csv,
        ..Outcome::holds(json!({ "curves": to_value(&curves) }))
    })
}

fn run_pe(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sc = scenario(cfg)?;
    let curves = (0..sc.systems.len())
        .map(|i| pe_curve(&sc, i, &cfg.horizons, cfg.trials, derive_seed(cfg.base_seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let csv = curves
        .iter()
        .map(|c| {
            Ok(CsvFile {
                name: format!("pe_{}", c.model_id),
                contents: csv_string(|b| c.write_csv(b))?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Outcome {
        csv,
        ..Outcome::holds(json!({ "curves": to_value(&curves) }))
    })
}

/// Intercept of `H(eps) ~ b + n^2 ln(1/eps)` over the spectral unit ball.
fn fitted_intercept(cfg: &ExperimentConfig) -> Result<f64> {
    let n = cfg.dimension;
    let space = MetricSpaceSpec::spectral_ball(n, cfg.grid_resolution)?;
    let curve = entropy_curve(&space, &cfg.epsilons, 0)?;
    Ok(curve
        .fit_affine(cfg.fit_range[0], cfg.fit_range[1], Some((n * n) as f64))?
        .intercept)
}

fn run_min_time(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sc = scenario(cfg)?;
    let times = min_time_sweep(&sc, &cfg.regret_levels, &cfg.horizons, cfg.trials, cfg.base_seed)?;
    let pe = (0..sc.systems.len())
        .map(|i| pe_curve(&sc, i, &cfg.horizons, cfg.trials, derive_seed(cfg.base_seed ^ 0x9e37, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    // The bound presumes excitation with delta < 1/4 on every system.
    let premise = cfg.pe_confidence < 0.25 && pe.iter().all(|c| c.t0.is_some());
    let b_n = match cfg.b_n {
        Some(b) => b,
        None => fitted_intercept(cfg)?,
    };
    let c2 = sc.initial_second_moment();
    let mut verdict = Verdict::Holds;
    let mut rows = Vec::with_capacity(times.len());
    for m in &times {
        let bound = min_time_lower_bound(cfg.dimension, cfg.noise_variance, m.epsilon, cfg.pe_constant, c2, b_n)?;
        let consistent = m.time.is_none_or(|t| bound <= t as f64);
        if premise && !consistent {
            verdict = Verdict::Violated;
        }
        rows.push(json!({
            "epsilon": m.epsilon,
            "empirical": to_value(m),
            "lower_bound": bound,
            "consistent": consistent,
        }));
    }
    let monotone = times
        .windows(2)
        .all(|w| matches!((w[0].time, w[1].time), (_, None) | (None, Some(_))) || w[0].time >= w[1].time);
    Ok(Outcome {
        payload: json!({
            "b_n": b_n,
            "initial_second_moment": c2,
            "pe_premise_verified": premise,
            "pe_curves": to_value(&pe),
            "sweep": rows,
            "nonincreasing_in_epsilon": monotone,
        }),
        verdict,
        csv: Vec::new(),
    })
}
