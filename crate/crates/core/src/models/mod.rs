//! Probabilistic binary classifiers. Both families emit scores in `[0, 1]`
//! and label a row positive exactly when its score is strictly above 1/2.

mod boosted;
mod logistic;

use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boosted::{train_boosted, BoostedParams, BoostedTreesModel, Node, Tree};
pub use logistic::{
    log_loss_gradient, logistic_objective, train_logistic, LogisticModel, LogisticParams,
};

pub const DECISION_THRESHOLD: f64 = 0.5;
pub const MODEL_FORMAT: &str = "encfair-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

impl Prediction {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let labels = scores
            .iter()
            .map(|&s| (s > DECISION_THRESHOLD) as u8)
            .collect();
        Self { scores, labels }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Shared preconditions for both trainers.
pub(crate) fn check_training_data(x: ArrayView2<f64>, y: &[u8]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two training rows".into(),
        ));
    }
    if let Some(v) = y.iter().find(|&&v| v > 1) {
        return Err(Error::InvalidArgument(format!("label {v} is not 0/1")));
    }
    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClass);
    }
    check_finite(x)
}

pub(crate) fn check_finite(x: ArrayView2<f64>) -> Result<()> {
    for ((row, col), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteFeature { row, col });
        }
    }
    Ok(())
}

/// Model family plus hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelSpec {
    Logistic(LogisticParams),
    Boosted(BoostedParams),
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Logistic(LogisticParams::default())
    }
}

impl ModelSpec {
    pub fn train(&self, x: ArrayView2<f64>, y: &[u8]) -> Result<Model> {
        Ok(match self {
            ModelSpec::Logistic(p) => Model::Logistic(train_logistic(
                x,
                y,
                p.l1_strength,
                p.max_iters,
                p.tolerance,
            )?),
            ModelSpec::Boosted(p) => Model::Boosted(train_boosted(
                x,
                y,
                p.tree_count,
                p.max_depth,
                p.learning_rate,
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Model {
    Logistic(LogisticModel),
    Boosted(BoostedTreesModel),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: Model,
}

impl Model {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Prediction> {
        match self {
            Model::Logistic(m) => m.predict(x),
            Model::Boosted(m) => m.predict(x),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Logistic(m) => m.weights.len(),
            Model::Boosted(m) => m.n_features,
        }
    }

    /// Version-tagged JSON document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Envelope {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.format != MODEL_FORMAT {
            return Err(Error::Serialization(format!(
                "not a model document: format {:?}",
                env.format
            )));
        }
        if env.version != MODEL_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: env.version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        Ok(env.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Convenience for callers holding an owned matrix.
pub fn predict(model: &Model, x: &Array2<f64>) -> Result<Prediction> {
    model.predict(x.view())
}
