use serde::{Deserialize, Serialize};

use crate::entropy::Distance;
use crate::error::{Error, Result};
use crate::kernel::{Feature, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Packing,
    Divergence,
    Fano,
    #[default]
    MetaVerify,
    Theorem2,
    Theorem3,
    Identify,
    ControlRegret,
    PeCheck,
    MinTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// `U_t = 0`; input symbol 0 for tabular models.
    #[default]
    Zero,
    /// `U_t = -F Y_t` with `F` from `gain`.
    LinearFeedback,
    CertaintyEquivalence,
    /// `F_t = A` for the system being controlled (control experiments only).
    Oracle,
    /// The single input symbol.
    TabularConstant,
    /// Inputs drawn uniformly from the input alphabet.
    TabularUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IdentifierKind {
    #[default]
    MaximumLikelihood,
    LeastSquaresNearest,
    RegressionNearest,
    ConstantGuess,
    EmpiricalFrequency,
    EmpiricalFrequencyNearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AuxKind {
    Nominal,
    PlugIn,
    FixedGaussianZeroMean,
    #[default]
    ExactConditionalMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlugInKind {
    /// Keep the initial guess forever.
    #[default]
    Constant,
    EmpiricalFrequency,
    Regression,
    MaximumLikelihood,
}

/// A single flat JSON document describing one experiment. Every field is
/// optional in the document; missing fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Default `meta_verify`.
    pub experiment: ExperimentKind,
    /// Default 1.
    pub base_seed: u64,
    /// Where the run record is written; default none (stdout only).
    pub output_path: Option<String>,
    /// Rayon threads; default 1.
    pub worker_count: usize,
    /// Monte-Carlo trials; default 1000.
    pub trials: usize,
    /// Number of transitions `T`; default 10.
    pub horizon: usize,

    /// Default `linear_gaussian`.
    pub model_kind: ModelKind,
    /// Output dimension `n`; default 1.
    pub dimension: usize,
    /// `sigma^2`; default 1.
    pub noise_variance: f64,
    /// Variance of each coordinate of `Y_1`; default 0 (`Y_1 = 0`).
    pub initial_variance: f64,
    /// Tabular `Y_1`; default symbol 0.
    pub initial_symbol: usize,
    /// Features of the nonlinear family; default `[identity]`.
    pub features: Vec<Feature>,
    /// Tabular output alphabet size; default 2.
    pub alphabet: usize,
    /// Tabular input alphabet size; default 1.
    pub input_alphabet: usize,
    /// Hypothesis points: row-major `A`, `theta`, or flattened tables.
    /// Default empty, meaning a greedy packing of the parameter ball.
    pub parameters: Vec<Vec<f64>>,

    /// Metric; default spectral norm.
    pub distance: Distance,
    /// Packing separation; default 0.5.
    pub separation: f64,
    /// Radius of the parameter ball; default 1.
    pub radius: f64,
    /// Grid spacing inside the ball; default 0.1.
    pub grid_resolution: f64,
    /// Ascending separations for entropy curves; default 0.05 to 1.
    pub epsilons: Vec<f64>,
    /// Separation range `[lo, hi]` of the affine entropy fit; default `[0.05, 0.5]`.
    pub fit_range: [f64; 2],

    /// Default `zero`.
    pub controller: ControllerKind,
    /// Row-major feedback gain; default empty (zero gain).
    pub gain: Vec<f64>,
    /// Default 1.
    pub update_period: usize,
    /// Default 0.1.
    pub dither_amplitude: f64,
    /// Default 0.
    pub dither_seed: u64,

    /// Default `maximum_likelihood`.
    pub identifier: IdentifierKind,
    /// Hypothesis used by `constant_guess`; default 0.
    pub guess_index: usize,
    /// Default `exact_conditional_mixture`.
    pub aux: AuxKind,
    /// Hypothesis used by the nominal auxiliary kernel; default 0.
    pub nominal_index: usize,
    /// Variance of the fixed zero-mean auxiliary kernel; default 1.
    pub aux_variance: f64,
    /// Default `constant`.
    pub plug_in: PlugInKind,
    /// Hypothesis used as the data-free guess `theta_hat_0`; default 0.
    pub initial_guess_index: usize,

    /// Fano inputs; defaults 2 and 0.
    pub num_hypotheses: usize,
    pub mutual_info: f64,

    /// Rate bound `K beta_{t-1}` inputs; defaults 1, 1 and `1/(t+1)` for `t = 0..=T`.
    pub rate_constant: f64,
    pub rate_exponent: f64,
    pub betas: Vec<f64>,

    /// Excitation constant `c`; default 0.5.
    pub pe_constant: f64,
    /// Excitation failure probability `delta`; default 0.1.
    pub pe_confidence: f64,
    /// Ascending horizon grid; default `[10, 20, 50, 100]`.
    pub horizons: Vec<usize>,
    /// Average-regret targets for minimum-time runs; default `[1.5, 2, 3]`.
    pub regret_levels: Vec<f64>,
    /// Entropy intercept for the minimum-time bound; default from the fit.
    pub b_n: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::default(),
            base_seed: 1,
            output_path: None,
            worker_count: 1,
            trials: 1000,
            horizon: 10,
            model_kind: ModelKind::LinearGaussian,
            dimension: 1,
            noise_variance: 1.0,
            initial_variance: 0.0,
            initial_symbol: 0,
            features: vec![Feature::Identity],
            alphabet: 2,
            input_alphabet: 1,
            parameters: Vec::new(),
            distance: Distance::SpectralNormMatrix,
            separation: 0.5,
            radius: 1.0,
            grid_resolution: 0.1,
            epsilons: vec![0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0],
            fit_range: [0.05, 0.5],
            controller: ControllerKind::default(),
            gain: Vec::new(),
            update_period: 1,
            dither_amplitude: 0.1,
            dither_seed: 0,
            identifier: IdentifierKind::default(),
            guess_index: 0,
            aux: AuxKind::default(),
            nominal_index: 0,
            aux_variance: 1.0,
            plug_in: PlugInKind::default(),
            initial_guess_index: 0,
            num_hypotheses: 2,
            mutual_info: 0.0,
            rate_constant: 1.0,
            rate_exponent: 1.0,
            betas: Vec::new(),
            pe_constant: 0.5,
            pe_confidence: 0.1,
            horizons: vec![10, 20, 50, 100],
            regret_levels: vec![1.5, 2.0, 3.0],
            b_n: None,
        }
    }
}

impl ExperimentConfig {
    /// Field-level problems, empty when the config is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let mut need = |ok: bool, field: &str, msg: String| {
            if !ok {
                p.push(format!("{field}: {msg}"));
            }
        };
        need(self.worker_count >= 1, "worker_count", "must be at least 1".into());
        need(self.trials >= 2, "trials", format!("must be at least 2, got {}", self.trials));
        need(self.horizon >= 1, "horizon", "must be at least 1".into());
        need(self.dimension >= 1, "dimension", "must be at least 1".into());
        need(
            self.noise_variance > 0.0 && self.noise_variance.is_finite(),
            "noise_variance",
            format!("must be positive, got {}", self.noise_variance),
        );
        need(
            self.initial_variance >= 0.0 && self.initial_variance.is_finite(),
            "initial_variance",
            format!("must be nonnegative, got {}", self.initial_variance),
        );
        need(!self.features.is_empty(), "features", "must not be empty".into());
        need(self.alphabet >= 1, "alphabet", "must be at least 1".into());
        need(self.input_alphabet >= 1, "input_alphabet", "must be at least 1".into());
        need(self.initial_symbol < self.alphabet, "initial_symbol", "must be below alphabet".into());
        need(self.separation > 0.0, "separation", format!("must be positive, got {}", self.separation));
        need(self.radius > 0.0, "radius", format!("must be positive, got {}", self.radius));
        need(
            self.grid_resolution > 0.0,
            "grid_resolution",
            format!("must be positive, got {}", self.grid_resolution),
        );
        need(
            !self.epsilons.is_empty() && self.epsilons.iter().all(|e| *e > 0.0),
            "epsilons",
            "must be a nonempty list of positive values".into(),
        );
        need(
            self.epsilons.windows(2).all(|w| w[0] < w[1]),
            "epsilons",
            "must be strictly ascending".into(),
        );
        need(
            self.fit_range[0] > 0.0 && self.fit_range[0] < self.fit_range[1],
            "fit_range",
            "must satisfy 0 < lo < hi".into(),
        );
        need(self.update_period >= 1, "update_period", "must be at least 1".into());
        need(
            self.dither_amplitude >= 0.0,
            "dither_amplitude",
            format!("must be nonnegative, got {}", self.dither_amplitude),
        );
        need(self.aux_variance > 0.0, "aux_variance", "must be positive".into());
        need(self.mutual_info >= 0.0, "mutual_info", "must be nonnegative".into());
        need(self.rate_constant >= 0.0, "rate_constant", "must be nonnegative".into());
        need(self.rate_exponent >= 1.0, "rate_exponent", "must be at least 1".into());
        need(self.betas.iter().all(|b| *b > 0.0), "betas", "must be positive".into());
        need(self.pe_constant > 0.0, "pe_constant", "must be positive".into());
        need(
            self.pe_confidence > 0.0 && self.pe_confidence < 1.0,
            "pe_confidence",
            "must lie in (0, 1)".into(),
        );
        need(
            !self.horizons.is_empty() && self.horizons[0] >= 1 && self.horizons.windows(2).all(|w| w[0] < w[1]),
            "horizons",
            "must be a nonempty strictly ascending list of positive values".into(),
        );
        need(
            !self.regret_levels.is_empty() && self.regret_levels.iter().all(|e| *e > 0.0),
            "regret_levels",
            "must be a nonempty list of positive values".into(),
        );
        let width = match self.model_kind {
            ModelKind::LinearGaussian => self.dimension * self.dimension,
            ModelKind::ScalarNonlinearGaussian => self.features.len(),
            ModelKind::TabularFinite => self.alphabet * self.input_alphabet * self.alphabet,
        };
        need(
            self.parameters.iter().all(|p| p.len() == width),
            "parameters",
            format!("each point needs {width} entries for {}", self.model_kind.name()),
        );
        need(
            self.model_kind != ModelKind::TabularFinite || !self.parameters.is_empty() || !self.uses_hypotheses(),
            "parameters",
            "tabular experiments need explicit tables".into(),
        );
        need(
            self.model_kind != ModelKind::ScalarNonlinearGaussian || self.dimension == 1,
            "dimension",
            "nonlinear models are scalar".into(),
        );
        need(
            self.gain.is_empty() || self.gain.len() == self.dimension * self.dimension,
            "gain",
            format!("needs {} entries", self.dimension * self.dimension),
        );
        p
    }

    pub(crate) fn uses_hypotheses(&self) -> bool {
        !matches!(
            self.experiment,
            ExperimentKind::Packing | ExperimentKind::Fano | ExperimentKind::Theorem3
        )
    }
}

/// Parses and checks a JSON config document. Unknown keys are rejected.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = if raw.trim().is_empty() {
        ExperimentConfig::default()
    } else {
        serde_json::from_str(raw).map_err(|e| Error::Config(vec![e.to_string()]))?
    };
    let problems = cfg.problems();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(problems))
    }
}
