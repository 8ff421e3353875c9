//! Categorical encoders: one-hot, ordinal, target encoding (optionally
//! smoothed toward the global prior or perturbed with Gaussian noise at
//! training time) and the drop baseline.
//!
//! Typical noise widths for the Gaussian regularizer lie between 0.05 and
//! 0.6; nothing enforces that. Noise is not clipped, so training-phase target
//! encodings can leave `[0, 1]`.

use std::collections::HashMap;
use std::fmt;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{category_stats, CategoryStatistics, Dataset};
use crate::error::{Error, Result};
use crate::rng;

/// Upper end of the smoothing sweep range.
pub const MAX_SMOOTHING_M: f64 = 1e6;
/// Upper end of the Gaussian-noise sweep range.
pub const MAX_GAUSSIAN_LAMBDA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingMethod {
    OneHot,
    Ordinal,
    Target,
    Drop,
}

impl fmt::Display for EncodingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingMethod::OneHot => "one-hot",
            EncodingMethod::Ordinal => "ordinal",
            EncodingMethod::Target => "target",
            EncodingMethod::Drop => "drop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub method: EncodingMethod,
    #[serde(default)]
    pub smoothing_m: f64,
    #[serde(default)]
    pub gaussian_lambda: f64,
    #[serde(default)]
    pub noise_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConfigWarning {
    SmoothingOutOfRange(f64),
    LambdaOutOfRange(f64),
}

impl EncoderConfig {
    pub fn new(method: EncodingMethod) -> Self {
        Self {
            method,
            smoothing_m: 0.0,
            gaussian_lambda: 0.0,
            noise_seed: 0,
        }
    }

    pub fn one_hot() -> Self {
        Self::new(EncodingMethod::OneHot)
    }

    pub fn ordinal() -> Self {
        Self::new(EncodingMethod::Ordinal)
    }

    pub fn target() -> Self {
        Self::new(EncodingMethod::Target)
    }

    pub fn drop() -> Self {
        Self::new(EncodingMethod::Drop)
    }

    pub fn with_smoothing(mut self, m: f64) -> Self {
        self.smoothing_m = m;
        self
    }

    pub fn with_gaussian(mut self, lambda: f64) -> Self {
        self.gaussian_lambda = lambda;
        self
    }

    pub fn with_noise_seed(mut self, seed: u64) -> Self {
        self.noise_seed = seed;
        self
    }

    /// Hard errors for malformed configurations; out-of-range values that
    /// are still usable come back as warnings.
    pub fn validate(&self) -> Result<Vec<ConfigWarning>> {
        let m = self.smoothing_m;
        let l = self.gaussian_lambda;
        if m.is_nan() || l.is_nan() || m < 0.0 || l < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "regularization must be non-negative (m={m}, lambda={l})"
            )));
        }
        if self.method != EncodingMethod::Target && (m > 0.0 || l > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "regularization only applies to target encoding, not {}",
                self.method
            )));
        }
        if m > 0.0 && l > 0.0 {
            return Err(Error::InvalidArgument(
                "smoothing and Gaussian noise cannot be combined".into(),
            ));
        }
        let mut warnings = Vec::new();
        if m > MAX_SMOOTHING_M {
            warnings.push(ConfigWarning::SmoothingOutOfRange(m));
        }
        if l > MAX_GAUSSIAN_LAMBDA {
            warnings.push(ConfigWarning::LambdaOutOfRange(l));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Train,
    Eval,
}

/// m-probability estimate: `lambda(n_i) * rate + (1 - lambda(n_i)) * prior`
/// with `lambda(n_i) = n_i / (n_i + m)`.
pub fn smoothed_rate(count: u64, positives: u64, prior: f64, m: f64) -> f64 {
    let rate = positives as f64 / count as f64;
    if m == 0.0 {
        return rate;
    }
    let n = count as f64;
    let weight = n / (n + m);
    weight * rate + (1.0 - weight) * prior
}

/// A fitted, immutable encoder for one categorical attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    config: EncoderConfig,
    attribute: String,
    categories: Vec<String>,
    index: HashMap<String, usize>,
    /// target: p_hat_i (or the configured smoothed value); ordinal: code
    values: Vec<f64>,
    stats: Option<CategoryStatistics>,
    prior: f64,
    warnings: Vec<ConfigWarning>,
}

/// Fits an encoder on the training data.
pub fn fit(config: EncoderConfig, train: &Dataset, attribute: &str) -> Result<Encoder> {
    let warnings = config.validate()?;
    if train.n() == 0 {
        return Err(Error::EmptyDataset);
    }
    let stats = category_stats(train, attribute)?;
    let prior = stats.prior();
    let categories: Vec<String> = stats.categories.iter().map(|c| c.value.clone()).collect();
    let values = match config.method {
        EncodingMethod::Target => stats
            .categories
            .iter()
            .map(|c| smoothed_rate(c.count, c.positives, prior, config.smoothing_m))
            .collect(),
        EncodingMethod::Ordinal => (0..categories.len()).map(|i| i as f64).collect(),
        EncodingMethod::OneHot | EncodingMethod::Drop => Vec::new(),
    };
    for w in &warnings {
        log::warn!("encoder for {attribute}: {w:?}");
    }
    Ok(Encoder {
        config,
        attribute: attribute.to_string(),
        index: categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect(),
        categories,
        values,
        stats: Some(stats),
        prior,
        warnings,
    })
}

impl Encoder {
    /// Target encoder with given per-category values and no count
    /// statistics, e.g. the population posteriors.
    pub fn from_target_values(
        attribute: &str,
        values: Vec<(String, f64)>,
        prior: f64,
    ) -> Result<Self> {
        let mut index = HashMap::new();
        let mut categories = Vec::new();
        let mut vals = Vec::new();
        for (c, v) in values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "target value {v} for {c:?} outside [0, 1]"
                )));
            }
            if index.insert(c.clone(), categories.len()).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate category {c:?}")));
            }
            categories.push(c);
            vals.push(v);
        }
        Ok(Self {
            config: EncoderConfig::target(),
            attribute: attribute.to_string(),
            categories,
            index,
            values: vals,
            stats: None,
            prior,
            warnings: Vec::new(),
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn stats(&self) -> Option<&CategoryStatistics> {
        self.stats.as_ref()
    }

    /// Global prior n_Y / n of the training data.
    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn warnings(&self) -> &[ConfigWarning] {
        &self.warnings
    }

    /// Number of feature columns emitted.
    pub fn width(&self) -> usize {
        match self.config.method {
            EncodingMethod::OneHot => self.categories.len(),
            EncodingMethod::Ordinal | EncodingMethod::Target => 1,
            EncodingMethod::Drop => 0,
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        match self.config.method {
            EncodingMethod::OneHot => self
                .categories
                .iter()
                .map(|c| format!("{}={}", self.attribute, c))
                .collect(),
            EncodingMethod::Ordinal | EncodingMethod::Target => vec![self.attribute.clone()],
            EncodingMethod::Drop => Vec::new(),
        }
    }

    /// Value stored for a seen category under the configured method, without
    /// training-time noise. One-hot and drop encoders have no scalar value.
    pub fn value(&self, category: &str) -> Result<f64> {
        let i = *self
            .index
            .get(category)
            .ok_or_else(|| Error::UnseenCategory(category.to_string()))?;
        match self.config.method {
            EncodingMethod::Target | EncodingMethod::Ordinal => Ok(self.values[i]),
            m => Err(Error::InvalidArgument(format!(
                "{m} encoding has no scalar value"
            ))),
        }
    }

    /// Smoothed target estimate for `category` with an explicit `m`.
    pub fn encode_smoothed(&self, category: &str, m: f64) -> Result<f64> {
        if m.is_nan() || m < 0.0 {
            return Err(Error::InvalidArgument(format!("smoothing m={m} < 0")));
        }
        let stats = self
            .stats
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("encoder carries no count statistics".into()))?;
        let i = *self
            .index
            .get(category)
            .ok_or_else(|| Error::UnseenCategory(category.to_string()))?;
        let c = &stats.categories[i];
        Ok(smoothed_rate(c.count, c.positives, self.prior, m))
    }

    /// Encoding for a category not seen at fit time: the global prior for
    /// scalar encodings, all zeros for one-hot, nothing for drop.
    pub fn encode_unseen(&self) -> Vec<f64> {
        match self.config.method {
            EncodingMethod::Target | EncodingMethod::Ordinal => vec![self.prior],
            EncodingMethod::OneHot => vec![0.0; self.categories.len()],
            EncodingMethod::Drop => Vec::new(),
        }
    }

    /// Encodes `attribute` of every row. Training-phase target encoding adds
    /// N(0, lambda^2) noise drawn from a stream keyed by (noise_seed, row).
    pub fn transform(&self, data: &Dataset, attribute: &str, phase: Phase) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((data.n(), self.width()));
        self.transform_into(data, attribute, phase, &mut out)?;
        Ok(out)
    }

    /// Writes the encoding into `out`, which must have `width()` columns.
    pub fn transform_into(
        &self,
        data: &Dataset,
        attribute: &str,
        phase: Phase,
        out: &mut Array2<f64>,
    ) -> Result<()> {
        if attribute != self.attribute {
            return Err(Error::AttributeMismatch {
                fitted: self.attribute.clone(),
                requested: attribute.to_string(),
            });
        }
        let col = data.categorical(attribute)?;
        if out.ncols() != self.width() || out.nrows() != data.n() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                got: out.ncols(),
            });
        }
        // map the column's level table once
        let lookup: Vec<Option<usize>> = col
            .levels()
            .iter()
            .map(|l| self.index.get(l).copied())
            .collect();
        let noise = match (self.config.method, phase) {
            (EncodingMethod::Target, Phase::Train) if self.config.gaussian_lambda > 0.0 => {
                Some(self.config.gaussian_lambda)
            }
            _ => None,
        };
        for (row, &code) in col.codes().iter().enumerate() {
            let slot = lookup[code as usize];
            match self.config.method {
                EncodingMethod::Drop => {}
                EncodingMethod::OneHot => {
                    if let Some(i) = slot {
                        out[[row, i]] = 1.0;
                    }
                }
                EncodingMethod::Ordinal | EncodingMethod::Target => {
                    let mut v = slot.map_or(self.prior, |i| self.values[i]);
                    if let Some(lambda) = noise {
                        let z: f64 =
                            rng::stream(self.config.noise_seed, row as u64).sample(StandardNormal);
                        v += lambda * z;
                    }
                    out[[row, 0]] = v;
                }
            }
        }
        Ok(())
    }
}
