use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{ControllerPolicy, InitialLaw, SystemModel};
use crate::linalg::spectral_norm;

/// Controller used in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioController {
    /// The same policy for every system.
    Policy(ControllerPolicy),
    /// `F_t = A` for the system being controlled.
    Oracle,
}

impl ScenarioController {
    pub fn for_system(&self, a: &DMatrix<f64>) -> ControllerPolicy {
        match self {
            ScenarioController::Policy(p) => p.clone(),
            ScenarioController::Oracle => ControllerPolicy::feedback(a.clone()),
        }
    }
}

/// Linear systems `Y_{t+1} = A Y_t + U_t + V_{t+1}` with `||A|| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlScenario {
    pub dimension: usize,
    pub noise_variance: f64,
    pub systems: Vec<DMatrix<f64>>,
    pub controller: ScenarioController,
    pub pe_constant: f64,
    pub pe_confidence: f64,
    pub initial: InitialLaw,
}

impl ControlScenario {
    pub fn new(
        dimension: usize,
        noise_variance: f64,
        systems: Vec<DMatrix<f64>>,
        controller: ScenarioController,
        pe_constant: f64,
        pe_confidence: f64,
    ) -> Result<Self> {
        let s = ControlScenario {
            dimension,
            noise_variance,
            systems,
            controller,
            pe_constant,
            pe_confidence,
            initial: InitialLaw::Zero,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_initial(mut self, initial: InitialLaw) -> Result<Self> {
        self.initial = initial;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !(self.noise_variance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive, got {}",
                self.noise_variance
            )));
        }
        if !(self.pe_constant > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "excitation constant must be positive, got {}",
                self.pe_constant
            )));
        }
        if !(self.pe_confidence > 0.0 && self.pe_confidence < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "excitation confidence must lie in (0, 1), got {}",
                self.pe_confidence
            )));
        }
        if self.systems.is_empty() {
            return Err(Error::InvalidArgument("scenario has no systems".into()));
        }
        for a in &self.systems {
            if a.shape() != (self.dimension, self.dimension) {
                return Err(Error::DimensionMismatch(format!(
                    "system matrix is {}x{}, dimension is {}",
                    a.nrows(),
                    a.ncols(),
                    self.dimension
                )));
            }
            let norm = spectral_norm(a);
            if norm > 1.0 + 1e-12 {
                return Err(Error::InvalidModel(format!("system matrix has spectral norm {norm} > 1")));
            }
        }
        if let ScenarioController::Policy(p) = &self.controller {
            if !p.is_linear() {
                return Err(Error::IncompatibleController {
                    controller: p.name(),
                    model: "linear_gaussian",
                });
            }
        }
        SystemModel::linear(self.systems[0].clone(), self.noise_variance)?.with_initial(self.initial.clone())?;
        Ok(())
    }

    /// `C = E ||Y_1||^2`.
    pub fn initial_second_moment(&self) -> f64 {
        self.initial.second_moment(self.dimension)
    }

    pub fn model(&self, i: usize) -> Result<SystemModel> {
        SystemModel::linear(self.systems[i].clone(), self.noise_variance)?.with_initial(self.initial.clone())
    }

    pub fn controller_for(&self, i: usize) -> ControllerPolicy {
        self.controller.for_system(&self.systems[i])
    }
}
