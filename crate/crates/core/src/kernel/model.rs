use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::Point;

/// Tolerance on tabular row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LinearGaussian,
    ScalarNonlinearGaussian,
    TabularFinite,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::LinearGaussian => "linear_gaussian",
            ModelKind::ScalarNonlinearGaussian => "scalar_nonlinear_gaussian",
            ModelKind::TabularFinite => "tabular_finite",
        }
    }

    pub fn is_gaussian(self) -> bool {
        !matches!(self, ModelKind::TabularFinite)
    }
}

/// Law of the first output `Y_1`. It is shared by every model built from the
/// same [`ModelFamily`](crate::kernel::ModelFamily), so `Y_1` carries no
/// information about which model is active.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLaw {
    /// `Y_1 = 0`.
    #[default]
    Zero,
    /// `Y_1 ~ N(0, variance * I)`.
    Gaussian { variance: f64 },
    /// `Y_1` is a fixed symbol.
    Symbol(usize),
    /// `Y_1` drawn from a probability vector over the alphabet.
    Categorical(Vec<f64>),
}

impl InitialLaw {
    /// `E ||Y_1||^2` for an `n`-dimensional Gaussian-kind output.
    pub fn second_moment(&self, n: usize) -> f64 {
        match self {
            InitialLaw::Gaussian { variance } => n as f64 * variance,
            _ => 0.0,
        }
    }

    fn validate_real(&self) -> Result<()> {
        match self {
            InitialLaw::Zero => Ok(()),
            InitialLaw::Gaussian { variance } if *variance >= 0.0 && variance.is_finite() => Ok(()),
            InitialLaw::Gaussian { variance } => Err(Error::InvalidModel(format!(
                "initial variance must be finite and nonnegative, got {variance}"
            ))),
            _ => Err(Error::InvalidModel(
                "symbolic initial law given to a Gaussian model".into(),
            )),
        }
    }

    fn validate_symbolic(&self, alphabet: usize) -> Result<()> {
        match self {
            InitialLaw::Zero => Ok(()),
            InitialLaw::Symbol(s) if *s < alphabet => Ok(()),
            InitialLaw::Symbol(s) => Err(Error::SymbolOutOfRange {
                symbol: *s,
                size: alphabet,
            }),
            InitialLaw::Categorical(p) => {
                if p.len() != alphabet {
                    return Err(Error::InvalidModel(format!(
                        "initial distribution has {} entries for alphabet {alphabet}",
                        p.len()
                    )));
                }
                check_probability_row(p)
            }
            InitialLaw::Gaussian { .. } => Err(Error::InvalidModel(
                "Gaussian initial law given to a tabular model".into(),
            )),
        }
    }

    /// Probability vector of `Y_1` over a finite alphabet.
    pub fn symbol_distribution(&self, alphabet: usize) -> Vec<f64> {
        match self {
            InitialLaw::Categorical(p) => p.clone(),
            InitialLaw::Symbol(s) => {
                let mut p = vec![0.0; alphabet];
                p[*s] = 1.0;
                p
            }
            _ => {
                let mut p = vec![0.0; alphabet];
                p[0] = 1.0;
                p
            }
        }
    }
}

pub(crate) fn check_probability_row(row: &[f64]) -> Result<()> {
    if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidModel(format!(
            "probability row has a negative or non-finite entry: {row:?}"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::InvalidModel(format!(
            "probability row sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Bounded or unbounded scalar feature `g(y)` of the nonlinear family
/// `f_theta(y) = sum_j theta_j g_j(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Constant,
    Identity,
    Tanh,
    Sin,
    Cos,
}

impl Feature {
    #[inline]
    pub fn eval(self, y: f64) -> f64 {
        match self {
            Feature::Constant => 1.0,
            Feature::Identity => y,
            Feature::Tanh => y.tanh(),
            Feature::Sin => y.sin(),
            Feature::Cos => y.cos(),
        }
    }

    /// `sup_y |g(y)|`, or `None` for unbounded features.
    pub fn sup_abs(self) -> Option<f64> {
        match self {
            Feature::Identity => None,
            _ => Some(1.0),
        }
    }
}

/// `Y_{t+1} = A Y_t + U_t + V_{t+1}`, `V ~ N(0, sigma^2 I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussian {
    pub(crate) a: DMatrix<f64>,
    pub(crate) noise_variance: f64,
    pub(crate) initial: InitialLaw,
}

/// `Y_{t+1} = f_theta(Y_t) + U_t + V_{t+1}` on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarNonlinear {
    pub(crate) theta: DVector<f64>,
    pub(crate) features: Vec<Feature>,
    pub(crate) noise_variance: f64,
    pub(crate) initial: InitialLaw,
}

/// First-order finite-alphabet kernel: the next symbol is drawn from the row
/// indexed by `(last output, last input)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabular {
    pub(crate) alphabet: usize,
    pub(crate) inputs: usize,
    /// Row `y * inputs + u`.
    pub(crate) rows: Vec<Vec<f64>>,
    pub(crate) initial: InitialLaw,
}

impl Tabular {
    #[inline]
    pub fn row(&self, y: usize, u: usize) -> &[f64] {
        &self.rows[y * self.inputs + u]
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn input_alphabet(&self) -> usize {
        self.inputs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// A parameterized family of stochastic kernels `P_theta(dy_t | y^{t-1}, u^{t-1})`.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemModel {
    Linear(LinearGaussian),
    Nonlinear(ScalarNonlinear),
    Tabular(Tabular),
}

fn check_variance(noise_variance: f64) -> Result<()> {
    if noise_variance > 0.0 && noise_variance.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "noise variance must be positive, got {noise_variance}"
        )))
    }
}

impl SystemModel {
    pub fn linear(a: DMatrix<f64>, noise_variance: f64) -> Result<Self> {
        check_variance(noise_variance)?;
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "system matrix must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(SystemModel::Linear(LinearGaussian {
            a,
            noise_variance,
            initial: InitialLaw::Zero,
        }))
    }

    /// Scalar system `y -> a * y` with noise variance `noise_variance`.
    pub fn scalar(a: f64, noise_variance: f64) -> Result<Self> {
        Self::linear(DMatrix::from_element(1, 1, a), noise_variance)
    }

    pub fn nonlinear(theta: Vec<f64>, features: Vec<Feature>, noise_variance: f64) -> Result<Self> {
        check_variance(noise_variance)?;
        if theta.len() != features.len() || theta.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} features",
                theta.len(),
                features.len()
            )));
        }
        Ok(SystemModel::Nonlinear(ScalarNonlinear {
            theta: DVector::from_vec(theta),
            features,
            noise_variance,
            initial: InitialLaw::Zero,
        }))
    }

    /// Tabular kernel with rows indexed by `y * inputs + u`.
    pub fn tabular(alphabet: usize, inputs: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if alphabet == 0 || inputs == 0 {
            return Err(Error::InvalidModel("empty alphabet".into()));
        }
        if rows.len() != alphabet * inputs {
            return Err(Error::InvalidModel(format!(
                "expected {} rows, got {}",
                alphabet * inputs,
                rows.len()
            )));
        }
        for row in &rows {
            if row.len() != alphabet {
                return Err(Error::InvalidModel(format!(
                    "row of length {} for alphabet {alphabet}",
                    row.len()
                )));
            }
            check_probability_row(row)?;
        }
        Ok(SystemModel::Tabular(Tabular {
            alphabet,
            inputs,
            rows,
            initial: InitialLaw::Zero,
        }))
    }

    pub fn with_initial(mut self, law: InitialLaw) -> Result<Self> {
        match &mut self {
            SystemModel::Linear(m) => {
                law.validate_real()?;
                m.initial = law;
            }
            SystemModel::Nonlinear(m) => {
                law.validate_real()?;
                m.initial = law;
            }
            SystemModel::Tabular(m) => {
                law.validate_symbolic(m.alphabet)?;
                m.initial = law;
            }
        }
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            SystemModel::Linear(_) => ModelKind::LinearGaussian,
            SystemModel::Nonlinear(_) => ModelKind::ScalarNonlinearGaussian,
            SystemModel::Tabular(_) => ModelKind::TabularFinite,
        }
    }

    /// Output dimension `n` (1 for scalar and tabular models).
    pub fn output_dim(&self) -> usize {
        match self {
            SystemModel::Linear(m) => m.a.nrows(),
            _ => 1,
        }
    }

    pub fn noise_variance(&self) -> Option<f64> {
        match self {
            SystemModel::Linear(m) => Some(m.noise_variance),
            SystemModel::Nonlinear(m) => Some(m.noise_variance),
            SystemModel::Tabular(_) => None,
        }
    }

    pub fn initial(&self) -> &InitialLaw {
        match self {
            SystemModel::Linear(m) => &m.initial,
            SystemModel::Nonlinear(m) => &m.initial,
            SystemModel::Tabular(m) => &m.initial,
        }
    }

    pub fn system_matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            SystemModel::Linear(m) => Some(&m.a),
            _ => None,
        }
    }

    pub fn as_tabular(&self) -> Option<&Tabular> {
        match self {
            SystemModel::Tabular(m) => Some(m),
            _ => None,
        }
    }

    /// Whether the model lies in the uncertainty set `{A : ||A|| <= 1}`
    /// (linear case); other kinds are always members.
    pub fn in_unit_ball(&self) -> bool {
        match self {
            SystemModel::Linear(m) => spectral_norm(&m.a) <= 1.0 + 1e-12,
            _ => true,
        }
    }

    /// The model's coordinates as a point of its parameter space: `A` for
    /// linear models, the coefficient column for nonlinear ones, and the
    /// row-major flattened table for tabular ones.
    pub fn parameter(&self) -> Point {
        match self {
            SystemModel::Linear(m) => m.a.clone(),
            SystemModel::Nonlinear(m) => DMatrix::from_column_slice(m.theta.len(), 1, m.theta.as_slice()),
            SystemModel::Tabular(m) => {
                let flat: Vec<f64> = m.rows.iter().flatten().copied().collect();
                DMatrix::from_column_slice(flat.len(), 1, &flat)
            }
        }
    }

    /// Conditional mean of the next output for Gaussian kinds.
    pub fn mean(&self, y: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        match self {
            SystemModel::Linear(m) => &m.a * y + u,
            SystemModel::Nonlinear(m) => {
                let f: f64 = m
                    .features
                    .iter()
                    .zip(m.theta.iter())
                    .map(|(g, th)| th * g.eval(y[0]))
                    .sum();
                DVector::from_element(1, f + u[0])
            }
            SystemModel::Tabular(_) => unreachable!("tabular models have no conditional mean"),
        }
    }

    /// `K = sum_j sup g_j^2 / (2 sigma^2)` for the nonlinear family, so that
    /// `D(P_theta || P_theta') <= K |theta - theta'|^2` for every history.
    /// `None` when a feature is unbounded or the model is not nonlinear.
    pub fn smoothness_constant(&self) -> Option<f64> {
        match self {
            SystemModel::Nonlinear(m) => {
                let mut total = 0.0;
                for g in &m.features {
                    let s = g.sup_abs()?;
                    total += s * s;
                }
                Some(total / (2.0 * m.noise_variance))
            }
            _ => None,
        }
    }
}
