//! Audits each listed attribute alone and their concatenation, on one shared
//! split, and flags metrics where the concatenated attribute shows a larger
//! maximum violation than every single attribute.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepParam};
use super::pipeline::{Prepared, SweepRecord};
use super::sweep::{run_points, sweep_points};
use crate::dataset::{category_stats, Dataset, CONCAT_SEPARATOR};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrangement {
    pub attribute: String,
    pub reference: String,
    pub concatenated: bool,
    pub records: Vec<SweepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleViolation {
    pub attribute: String,
    pub max_violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectFlag {
    pub encoder: String,
    pub param_name: Option<SweepParam>,
    pub param_value: Option<f64>,
    pub metric: MetricKind,
    pub concatenated: Option<f64>,
    pub singles: Vec<SingleViolation>,
    /// Concatenated maximum strictly above every single-attribute maximum.
    pub exceeds_all: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectReport {
    pub arrangements: Vec<Arrangement>,
    pub flags: Vec<IntersectFlag>,
}

impl IntersectReport {
    /// Every record of every arrangement, arrangements in order.
    pub fn records(&self) -> Vec<SweepRecord> {
        self.arrangements
            .iter()
            .flat_map(|a| a.records.iter().cloned())
            .collect()
    }

    pub fn flag(
        &self,
        encoder: &str,
        param_value: Option<f64>,
        metric: MetricKind,
    ) -> Option<&IntersectFlag> {
        self.flags
            .iter()
            .find(|f| f.encoder == encoder && f.param_value == param_value && f.metric == metric)
    }
}

fn most_frequent(train: &Dataset, attribute: &str) -> Result<String> {
    let stats = category_stats(train, attribute)?;
    stats
        .categories
        .iter()
        .fold(
            None::<&crate::dataset::CategoryCount>,
            |best, c| match best {
                Some(b) if b.count >= c.count => Some(b),
                _ => Some(c),
            },
        )
        .map(|c| c.value.clone())
        .ok_or(Error::EmptyDataset)
}

pub fn run_intersectional(config: &ExperimentConfig) -> Result<IntersectReport> {
    if config.concat.len() < 2 {
        return Err(Error::Config(
            "intersectional audit needs at least two attributes in concat".into(),
        ));
    }
    let concat_name = config.concat_name().expect("non-empty");
    let data = config.load_data()?;

    // stratifying on the concatenation also stratifies every part
    let mut split_cfg = config.clone();
    if split_cfg.split.stratify.is_none() {
        split_cfg.split.stratify = Some(concat_name.clone());
    }
    let first = &config.concat[0];
    let base = Prepared::from_data(&split_cfg, &data, first, &most_frequent(&data, first)?)?;

    let mut singles = Vec::new();
    for attr in &config.concat {
        let reference = match config.intersect.references.get(attr) {
            Some(r) => r.clone(),
            None if *attr == config.protected.attribute => config.protected.reference.clone(),
            None => most_frequent(&base.train, attr)?,
        };
        singles.push((attr.clone(), reference));
    }
    let joined = singles
        .iter()
        .map(|(_, r)| r.as_str())
        .collect::<Vec<_>>()
        .join(CONCAT_SEPARATOR);
    let concat_ref = match config.intersect.references.get(&concat_name) {
        Some(r) => r.clone(),
        None if config.protected.attribute == concat_name => config.protected.reference.clone(),
        None if base
            .train
            .categorical(&concat_name)?
            .iter()
            .any(|v| v == joined) =>
        {
            joined
        }
        None => most_frequent(&base.train, &concat_name)?,
    };

    let points = sweep_points(config);
    let mut arrangements = Vec::new();
    for (attribute, reference, concatenated) in singles
        .into_iter()
        .map(|(a, r)| (a, r, false))
        .chain(std::iter::once((concat_name.clone(), concat_ref, true)))
    {
        let prepared = base.with_group(&attribute, &reference)?;
        let records = run_points(&prepared, &points, config.seed);
        arrangements.push(Arrangement {
            attribute,
            reference,
            concatenated,
            records,
        });
    }

    let mut flags = Vec::new();
    let concat = arrangements.last().expect("concatenated arrangement");
    for (k, rec) in concat.records.iter().enumerate() {
        for metric in MetricKind::ALL {
            let c = rec.max_violation(metric);
            let singles: Vec<SingleViolation> = arrangements[..arrangements.len() - 1]
                .iter()
                .map(|a| SingleViolation {
                    attribute: a.attribute.clone(),
                    max_violation: a.records[k].max_violation(metric),
                })
                .collect();
            let exceeds_all = c.is_some_and(|c| {
                singles
                    .iter()
                    .all(|s| s.max_violation.is_none_or(|v| c > v))
            });
            flags.push(IntersectFlag {
                encoder: rec.encoder.clone(),
                param_name: rec.param_name,
                param_value: rec.param_value,
                metric,
                concatenated: c,
                singles,
                exceeds_all,
            });
        }
    }
    Ok(IntersectReport {
        arrangements,
        flags,
    })
}
