use nalgebra::DMatrix;

use crate::entropy::PackingSet;
use crate::error::{Error, Result};
use crate::kernel::model::{Feature, InitialLaw, SystemModel};
use crate::Point;

/// Maps parameter points to system models. All models of one family share
/// the noise variance and the initial law.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFamily {
    Linear {
        dimension: usize,
        noise_variance: f64,
        initial: InitialLaw,
    },
    Nonlinear {
        features: Vec<Feature>,
        noise_variance: f64,
        initial: InitialLaw,
    },
    /// Points are row-major flattened tables of `alphabet * inputs` rows.
    Tabular {
        alphabet: usize,
        inputs: usize,
        initial: InitialLaw,
    },
}

impl ModelFamily {
    pub fn linear(dimension: usize, noise_variance: f64) -> Self {
        ModelFamily::Linear {
            dimension,
            noise_variance,
            initial: InitialLaw::Zero,
        }
    }

    pub fn tabular(alphabet: usize, inputs: usize) -> Self {
        ModelFamily::Tabular {
            alphabet,
            inputs,
            initial: InitialLaw::Zero,
        }
    }

    pub fn with_initial(self, law: InitialLaw) -> Self {
        match self {
            ModelFamily::Linear {
                dimension,
                noise_variance,
                ..
            } => ModelFamily::Linear {
                dimension,
                noise_variance,
                initial: law,
            },
            ModelFamily::Nonlinear {
                features,
                noise_variance,
                ..
            } => ModelFamily::Nonlinear {
                features,
                noise_variance,
                initial: law,
            },
            ModelFamily::Tabular { alphabet, inputs, .. } => ModelFamily::Tabular {
                alphabet,
                inputs,
                initial: law,
            },
        }
    }

    pub fn instantiate(&self, point: &Point) -> Result<SystemModel> {
        match self {
            ModelFamily::Linear {
                dimension,
                noise_variance,
                initial,
            } => {
                if point.nrows() != *dimension || point.ncols() != *dimension {
                    return Err(Error::DimensionMismatch(format!(
                        "expected a {dimension}x{dimension} system matrix, got {}x{}",
                        point.nrows(),
                        point.ncols()
                    )));
                }
                SystemModel::linear(point.clone(), *noise_variance)?.with_initial(initial.clone())
            }
            ModelFamily::Nonlinear {
                features,
                noise_variance,
                initial,
            } => SystemModel::nonlinear(point.iter().copied().collect(), features.clone(), *noise_variance)?
                .with_initial(initial.clone()),
            ModelFamily::Tabular {
                alphabet,
                inputs,
                initial,
            } => {
                let expected = alphabet * inputs * alphabet;
                if point.len() != expected {
                    return Err(Error::DimensionMismatch(format!(
                        "tabular point needs {expected} entries, got {}",
                        point.len()
                    )));
                }
                let flat: Vec<f64> = point.iter().copied().collect();
                let rows = flat.chunks(*alphabet).map(|c| c.to_vec()).collect();
                SystemModel::tabular(*alphabet, *inputs, rows)?.with_initial(initial.clone())
            }
        }
    }

    /// Point for a tabular model given its rows.
    pub fn tabular_point(rows: &[Vec<f64>]) -> Point {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        DMatrix::from_column_slice(flat.len(), 1, &flat)
    }
}

/// A finite hypothesis set: a packing of parameter points together with the
/// models they index.
#[derive(Debug, Clone)]
pub struct Hypotheses {
    family: ModelFamily,
    packing: PackingSet,
    models: Vec<SystemModel>,
}

impl Hypotheses {
    pub fn new(family: ModelFamily, packing: PackingSet) -> Result<Self> {
        let models = packing
            .points()
            .iter()
            .map(|p| family.instantiate(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Hypotheses {
            family,
            packing,
            models,
        })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn models(&self) -> &[SystemModel] {
        &self.models
    }

    pub fn model(&self, i: usize) -> &SystemModel {
        &self.models[i]
    }

    pub fn packing(&self) -> &PackingSet {
        &self.packing
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    pub fn points(&self) -> &[Point] {
        self.packing.points()
    }

    /// `log N` in nats.
    pub fn entropy_nats(&self) -> f64 {
        (self.len() as f64).ln()
    }

    pub fn is_tabular(&self) -> bool {
        matches!(self.family, ModelFamily::Tabular { .. })
    }
}
