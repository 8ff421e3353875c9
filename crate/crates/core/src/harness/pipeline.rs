use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{EncoderEntry, ExperimentConfig, SweepParam};
use crate::audit::{evaluate, EncoderSource, Evaluation};
use crate::dataset::{stratified_split, Dataset, GroupSpec};
use crate::encoders::EncodingMethod;
use crate::error::Result;
use crate::metrics::{GroupEntry, MetricKind, SkippedGroup};
use crate::models::ModelSpec;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAuc {
    pub group: String,
    pub auc: Option<f64>,
}

/// Outcome of one (encoder, grid value) point, measured on the evaluation
/// part of the split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub encoder: String,
    pub method: EncodingMethod,
    /// `None` for points that are not part of a sweep.
    pub param_name: Option<SweepParam>,
    pub param_value: Option<f64>,
    pub attribute: String,
    pub reference: String,
    pub status: PointStatus,
    pub error: Option<String>,
    pub auc: Option<f64>,
    pub group_auc: Vec<GroupAuc>,
    pub l_eof: Option<f64>,
    pub l_dp: Option<f64>,
    pub l_aao: Option<f64>,
    pub max_eof: Option<f64>,
    pub max_dp: Option<f64>,
    pub max_aao: Option<f64>,
    pub eof: Vec<GroupEntry>,
    pub dp: Vec<GroupEntry>,
    pub aao: Vec<GroupEntry>,
    pub skipped: Vec<SkippedGroup>,
    pub wall_time_ms: f64,
}

impl SweepRecord {
    fn empty(entry: &EncoderEntry, grid_value: Option<f64>, group: &GroupSpec) -> Self {
        Self {
            encoder: entry.display_label(),
            method: entry.method,
            param_name: grid_value.and(entry.sweep),
            param_value: grid_value,
            attribute: group.attribute.clone(),
            reference: group.reference.clone(),
            status: PointStatus::Failed,
            error: None,
            auc: None,
            group_auc: Vec::new(),
            l_eof: None,
            l_dp: None,
            l_aao: None,
            max_eof: None,
            max_dp: None,
            max_aao: None,
            eof: Vec::new(),
            dp: Vec::new(),
            aao: Vec::new(),
            skipped: Vec::new(),
            wall_time_ms: 0.0,
        }
    }

    fn fill(&mut self, ev: &Evaluation) {
        let r = &ev.report;
        self.status = PointStatus::Ok;
        self.auc = ev.auc;
        self.group_auc = r
            .groups
            .iter()
            .map(|g| GroupAuc {
                group: g.group.clone(),
                auc: g.auc,
            })
            .collect();
        self.l_eof = r.l_eof;
        self.l_dp = r.l_dp;
        self.l_aao = r.l_aao;
        self.max_eof = r.max_abs(MetricKind::EqualOpportunity);
        self.max_dp = r.max_abs(MetricKind::DemographicParity);
        self.max_aao = r.max_abs(MetricKind::AverageAbsoluteOdds);
        self.eof = r.eof.entries.clone();
        self.dp = r.dp.entries.clone();
        self.aao = r.aao.entries.clone();
        self.skipped = r.skipped();
    }

    pub fn aggregate(&self, metric: MetricKind) -> Option<f64> {
        match metric {
            MetricKind::EqualOpportunity => self.l_eof,
            MetricKind::DemographicParity => self.l_dp,
            MetricKind::AverageAbsoluteOdds => self.l_aao,
        }
    }

    pub fn max_violation(&self, metric: MetricKind) -> Option<f64> {
        match metric {
            MetricKind::EqualOpportunity => self.max_eof,
            MetricKind::DemographicParity => self.max_dp,
            MetricKind::AverageAbsoluteOdds => self.max_aao,
        }
    }

    /// Equality of everything except the wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let mut a = self.clone();
        a.wall_time_ms = other.wall_time_ms;
        &a == other
    }
}

/// Data split once and shared by every point of a run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub group: GroupSpec,
    pub model: ModelSpec,
}

impl Prepared {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let data = config.load_data()?;
        Self::from_data(
            config,
            &data,
            &config.protected.attribute,
            &config.protected.reference,
        )
    }

    /// Splits `data` stratified on the configured column (default: the
    /// audited attribute).
    pub fn from_data(
        config: &ExperimentConfig,
        data: &Dataset,
        attribute: &str,
        reference: &str,
    ) -> Result<Self> {
        let stratify = config.split.stratify.as_deref().unwrap_or(attribute);
        let (train, test) =
            stratified_split(data, config.split.fraction, stratify, config.split.seed)?;
        let group = GroupSpec::new(&train, attribute, reference)?;
        Ok(Self {
            train,
            test,
            group,
            model: config.model_spec()?,
        })
    }

    /// Same split, audited on another attribute.
    pub fn with_group(&self, attribute: &str, reference: &str) -> Result<Self> {
        Ok(Self {
            group: GroupSpec::new(&self.train, attribute, reference)?,
            ..self.clone()
        })
    }
}

/// One point: fit the encoder on the training part, train, score the
/// evaluation part. Errors are recorded in the returned record.
pub fn run_point(
    prepared: &Prepared,
    entry: &EncoderEntry,
    grid_value: Option<f64>,
    noise_seed: u64,
) -> SweepRecord {
    evaluate_point(prepared, entry, grid_value, noise_seed).0
}

/// As [`run_point`], also returning the evaluation when it succeeded.
pub fn evaluate_point(
    prepared: &Prepared,
    entry: &EncoderEntry,
    grid_value: Option<f64>,
    noise_seed: u64,
) -> (SweepRecord, Option<Evaluation>) {
    let start = Instant::now();
    let mut record = SweepRecord::empty(entry, grid_value, &prepared.group);
    let cfg = entry.encoder_config(grid_value, noise_seed);
    let ev = match evaluate(
        &prepared.train,
        &prepared.test,
        &prepared.group,
        EncoderSource::Fit(cfg),
        &prepared.model,
    ) {
        Ok(ev) => {
            record.fill(&ev);
            Some(ev)
        }
        Err(e) => {
            log::warn!("{} at {grid_value:?} failed: {e}", record.encoder);
            record.error = Some(e.to_string());
            None
        }
    };
    record.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    (record, ev)
}

/// Loads the data, splits it, and runs one point. The noise seed is derived
/// from the config seed with stream index 0.
pub fn run_pipeline(
    config: &ExperimentConfig,
    entry: &EncoderEntry,
    grid_value: Option<f64>,
) -> Result<SweepRecord> {
    let prepared = Prepared::new(config)?;
    Ok(run_point(
        &prepared,
        entry,
        grid_value,
        rng::derive_seed(config.seed, 0),
    ))
}
