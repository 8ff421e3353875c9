//! Experiment configuration, read from TOML (or JSON by file extension).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{concat_attributes, load_csv, ColumnSchema, Dataset, CONCAT_SEPARATOR};
use crate::encoders::{EncoderConfig, EncodingMethod, MAX_GAUSSIAN_LAMBDA, MAX_SMOOTHING_M};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::theory::{sample_population, PopulationSpec};

pub const DEFAULT_LAMBDA_GRID: [f64; 9] = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0, 5.0];
pub const DEFAULT_M_GRID: [f64; 8] = [0.0, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// CSV file; relative paths resolve against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<Vec<ColumnSchema>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<PopulationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtectedConfig {
    pub attribute: String,
    pub reference: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    Lambda,
    M,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Lambda => "lambda",
            SweepParam::M => "m",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub method: EncodingMethod,
    #[serde(default)]
    pub smoothing_m: f64,
    #[serde(default)]
    pub gaussian_lambda: f64,
    /// Sweep this regularizer over its grid instead of using the fixed value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepParam>,
}

impl EncoderEntry {
    pub fn new(method: EncodingMethod) -> Self {
        Self {
            label: None,
            method,
            smoothing_m: 0.0,
            gaussian_lambda: 0.0,
            sweep: None,
        }
    }

    pub fn sweeping(mut self, param: SweepParam) -> Self {
        self.sweep = Some(param);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_smoothing(mut self, m: f64) -> Self {
        self.smoothing_m = m;
        self
    }

    pub fn with_gaussian(mut self, lambda: f64) -> Self {
        self.gaussian_lambda = lambda;
        self
    }

    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match self.sweep {
            Some(p) => format!("{}-{p}", self.method),
            None if self.smoothing_m > 0.0 => format!("{}-m{}", self.method, self.smoothing_m),
            None if self.gaussian_lambda > 0.0 => {
                format!("{}-lambda{}", self.method, self.gaussian_lambda)
            }
            None => self.method.to_string(),
        }
    }

    /// Encoder configuration at a grid value (or the fixed values).
    pub fn encoder_config(&self, grid_value: Option<f64>, noise_seed: u64) -> EncoderConfig {
        let mut cfg = EncoderConfig::new(self.method)
            .with_smoothing(self.smoothing_m)
            .with_gaussian(self.gaussian_lambda)
            .with_noise_seed(noise_seed);
        match (self.sweep, grid_value) {
            (Some(SweepParam::Lambda), Some(v)) => cfg.gaussian_lambda = v,
            (Some(SweepParam::M), Some(v)) => cfg.smoothing_m = v,
            _ => {}
        }
        cfg
    }
}

fn default_encoders() -> Vec<EncoderEntry> {
    vec![
        EncoderEntry::new(EncodingMethod::Drop),
        EncoderEntry::new(EncodingMethod::OneHot),
        EncoderEntry::new(EncodingMethod::Target).sweeping(SweepParam::Lambda),
        EncoderEntry::new(EncodingMethod::Target).sweeping(SweepParam::M),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    Logistic,
    Boosted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: ModelFamily,
    /// Family hyperparameters; missing keys take their defaults.
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            family: ModelFamily::Logistic,
            params: serde_json::Map::new(),
        }
    }
}

impl ModelConfig {
    pub fn spec(&self) -> Result<ModelSpec> {
        let mut obj = self.params.clone();
        obj.insert(
            "family".into(),
            serde_json::to_value(self.family).map_err(Error::from)?,
        );
        serde_json::from_value(serde_json::Value::Object(obj))
            .map_err(|e| Error::Config(format!("model params: {e}")))
    }

    pub fn from_spec(spec: &ModelSpec) -> Self {
        let mut params = match serde_json::to_value(spec) {
            Ok(serde_json::Value::Object(m)) => m,
            _ => serde_json::Map::new(),
        };
        params.remove("family");
        let family = match spec {
            ModelSpec::Logistic(_) => ModelFamily::Logistic,
            ModelSpec::Boosted(_) => ModelFamily::Boosted,
        };
        Self { family, params }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "lambda_grid")]
    pub lambda: Vec<f64>,
    #[serde(default = "m_grid")]
    pub m: Vec<f64>,
}

fn lambda_grid() -> Vec<f64> {
    DEFAULT_LAMBDA_GRID.to_vec()
}

fn m_grid() -> Vec<f64> {
    DEFAULT_M_GRID.to_vec()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda: lambda_grid(),
            m: m_grid(),
        }
    }
}

impl SweepConfig {
    /// Grid for `param`, ascending and without duplicates.
    pub fn grid(&self, param: SweepParam) -> Vec<f64> {
        let mut g = match param {
            SweepParam::Lambda => self.lambda.clone(),
            SweepParam::M => self.m.clone(),
        };
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "half")]
    pub fraction: f64,
    #[serde(default)]
    pub seed: u64,
    /// Column to stratify on; defaults to the audited attribute.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stratify: Option<String>,
}

fn half() -> f64 {
    0.5
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            fraction: 0.5,
            seed: 0,
            stratify: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Tabular,
    Structured,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tabular" | "csv" => Ok(OutputFormat::Tabular),
            "structured" | "json" => Ok(OutputFormat::Structured),
            _ => Err(Error::Config(format!("unknown output format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectConfig {
    /// Reference group per single attribute. Attributes without an entry use
    /// the protected reference (for the protected attribute) or their most
    /// frequent training category.
    #[serde(default)]
    pub references: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub protected: ProtectedConfig,
    /// Attributes to concatenate into one intersectional attribute.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub concat: Vec<String>,
    #[serde(default = "default_encoders")]
    pub encoders: Vec<EncoderEntry>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub split: SplitConfig,
    /// Base seed for training-time noise; each grid point derives its own.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub intersect: IntersectConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Config over an in-memory population with default encoders and grids.
    pub fn for_population(spec: PopulationSpec, reference: &str) -> Self {
        let attribute = spec.attribute.clone();
        Self {
            data: DataConfig {
                population: Some(spec),
                ..DataConfig::default()
            },
            protected: ProtectedConfig {
                attribute,
                reference: reference.to_string(),
            },
            concat: Vec::new(),
            encoders: default_encoders(),
            model: ModelConfig::default(),
            sweep: SweepConfig::default(),
            split: SplitConfig::default(),
            seed: 0,
            intersect: IntersectConfig::default(),
            output: OutputConfig::default(),
            base_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Overrides both the split seed and the noise seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.split.seed = seed;
        self.seed = seed;
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        self.model.spec()
    }

    /// Name of the concatenated attribute, if any.
    pub fn concat_name(&self) -> Option<String> {
        (!self.concat.is_empty()).then(|| self.concat.join(CONCAT_SEPARATOR))
    }

    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match (&self.data.path, &self.data.population) {
            (Some(_), Some(_)) => return bad("data.path and data.population are exclusive".into()),
            (None, None) => return bad("data needs a path or a population".into()),
            (Some(_), None) if self.data.schema.is_none() => {
                return bad("data.schema is required with data.path".into())
            }
            _ => {}
        }
        if let Some(p) = &self.data.population {
            p.validate()?;
        }
        if self.encoders.is_empty() {
            return bad("no encoders configured".into());
        }
        for required in [
            EncodingMethod::Drop,
            EncodingMethod::OneHot,
            EncodingMethod::Target,
        ] {
            if !self.encoders.iter().any(|e| e.method == required) {
                return bad(format!("encoders must include {required}"));
            }
        }
        let mut labels = std::collections::HashSet::new();
        for e in &self.encoders {
            let label = e.display_label();
            if !labels.insert(label.clone()) {
                return bad(format!("duplicate encoder label {label:?}"));
            }
            if let Some(param) = e.sweep {
                if e.method != EncodingMethod::Target {
                    return bad(format!("{label}: only target encoding can be swept"));
                }
                let fixed_other = match param {
                    SweepParam::Lambda => e.smoothing_m,
                    SweepParam::M => e.gaussian_lambda,
                };
                if fixed_other > 0.0 {
                    return bad(format!(
                        "{label}: smoothing and Gaussian noise cannot be combined"
                    ));
                }
                let grid = self.sweep.grid(param);
                if grid.is_empty() {
                    return bad(format!("sweep.{param} grid is empty"));
                }
                let max = match param {
                    SweepParam::Lambda => MAX_GAUSSIAN_LAMBDA,
                    SweepParam::M => MAX_SMOOTHING_M,
                };
                for &v in &grid {
                    if !v.is_finite() || v < 0.0 {
                        return bad(format!("sweep.{param} value {v} invalid"));
                    }
                    if v > max {
                        log::warn!("sweep.{param} value {v} above the usual range [0, {max}]");
                    }
                }
            }
            e.encoder_config(None, 0)
                .validate()
                .map_err(|err| Error::Config(format!("{label}: {err}")))?;
        }
        self.model_spec()?;
        if !(self.split.fraction > 0.0 && self.split.fraction < 1.0) {
            return bad(format!(
                "split.fraction {} outside (0, 1)",
                self.split.fraction
            ));
        }
        if self.concat.len() == 1 {
            return bad("concat needs at least two attributes".into());
        }
        Ok(())
    }

    /// Loads or samples the data, adds the concatenated attribute when
    /// configured, and checks that every named column exists.
    pub fn load_data(&self) -> Result<Dataset> {
        self.validate()?;
        let mut data = match (&self.data.path, &self.data.population) {
            (Some(path), _) => {
                let path = match &self.base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                load_csv(path, self.data.schema.as_deref().unwrap_or_default())?
            }
            (None, Some(spec)) => sample_population(spec)?,
            (None, None) => unreachable!("validated"),
        };
        if let Some(name) = self.concat_name() {
            let attrs: Vec<&str> = self.concat.iter().map(String::as_str).collect();
            data = concat_attributes(&data, &attrs, &name)?;
        }
        let mut names = vec![self.protected.attribute.as_str()];
        names.extend(self.split.stratify.as_deref());
        names.extend(self.intersect.references.keys().map(String::as_str));
        for name in names {
            data.categorical(name)
                .map_err(|e| Error::Config(format!("column {name:?}: {e}")))?;
        }
        Ok(data)
    }

    /// Config echo for result files.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BoostedParams, LogisticParams};

    const MINIMAL: &str = r#"
        [data]
        path = "x.csv"
        schema = [
            { name = "Ethnic", kind = "categorical", role = "protected" },
            { name = "Label", kind = "binary-target", role = "target" },
        ]

        [protected]
        attribute = "Ethnic"
        reference = "Caucasian"
    "#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.encoders.len(), 4);
        assert_eq!(c.sweep.lambda, DEFAULT_LAMBDA_GRID.to_vec());
        assert_eq!(c.split.fraction, 0.5);
        assert_eq!(
            c.model_spec().unwrap(),
            ModelSpec::Logistic(LogisticParams::default())
        );
    }

    #[test]
    fn model_params_and_round_trip() {
        let text =
            format!("{MINIMAL}\n[model]\nfamily = \"boosted\"\nparams = {{ tree_count = 7 }}\n");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(
            c.model_spec().unwrap(),
            ModelSpec::Boosted(BoostedParams {
                tree_count: 7,
                ..BoostedParams::default()
            })
        );
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.encoders.retain(|e| e.method != EncodingMethod::OneHot);
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.sweep.lambda.clear();
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.encoders[2].smoothing_m = 3.0;
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.data.schema = None;
        assert!(c.validate().is_err());

        let text = format!(
            "{MINIMAL}\n[model]\nfamily = \"boosted\"\nparams = {{ tree_count = \"x\" }}\n"
        );
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert!(c.validate().is_err());

        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}\nbogus = 1\n")).is_err());
    }

    #[test]
    fn grids_sorted_and_deduplicated() {
        let s = SweepConfig {
            lambda: vec![0.5, 0.0, 0.5, 0.1],
            m: vec![],
        };
        assert_eq!(s.grid(SweepParam::Lambda), vec![0.0, 0.1, 0.5]);
    }
}
