//! Theory-lab run over a configured population: closed-form quantities plus
//! the irreducible/reducible split of every metric at every sweep point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::{evaluate_point, Prepared, SweepRecord};
use super::sweep::sweep_points;
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::rng;
use crate::theory::{
    bayes_error, constant_prediction_error, decompose, perfect_eof, BiasDecomposition, GroupValue,
    PopulationSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabPoint {
    pub record: SweepRecord,
    /// Empty when the point failed.
    pub decompositions: Vec<BiasDecomposition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub population: PopulationSpec,
    pub reference: String,
    pub bayes_error: f64,
    /// Error of always predicting 1.
    pub constant_error: f64,
    pub perfect_eof: Vec<GroupValue>,
    pub points: Vec<LabPoint>,
}

pub fn run_lab(config: &ExperimentConfig) -> Result<LabReport> {
    let spec = config
        .data
        .population
        .clone()
        .ok_or_else(|| Error::Config("the lab needs data.population".into()))?;
    if !spec.split_attributes.is_empty() || !config.concat.is_empty() {
        return Err(Error::Config(
            "the lab audits the single population attribute".into(),
        ));
    }
    let reference = config.protected.reference.clone();
    let prepared = Prepared::new(config)?;
    let points = sweep_points(config);
    let lab_points = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let (record, ev) = evaluate_point(
                &prepared,
                &p.entry,
                p.value,
                rng::derive_seed(config.seed, k as u64),
            );
            let decompositions = match ev {
                Some(ev) => MetricKind::ALL
                    .iter()
                    .map(|&m| decompose(&spec, &reference, &ev.report, m, ev.prior_score))
                    .collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            Ok(LabPoint {
                record,
                decompositions,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabReport {
        bayes_error: bayes_error(&spec),
        constant_error: constant_prediction_error(&spec, 1),
        perfect_eof: perfect_eof(&spec, &reference)?,
        population: spec,
        reference,
        points: lab_points,
    })
}

#[derive(Serialize)]
struct LabRow<'a> {
    encoder: &'a str,
    param_name: Option<String>,
    param_value: Option<f64>,
    metric: MetricKind,
    group: &'a str,
    irreducible: f64,
    total: Option<f64>,
    reducible: Option<f64>,
    prior_score: Option<f64>,
}

/// One CSV row per (point, metric, group).
pub fn write_lab_tabular<W: std::io::Write>(report: &LabReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in &report.points {
        for d in &p.decompositions {
            for g in &d.groups {
                w.serialize(LabRow {
                    encoder: &p.record.encoder,
                    param_name: p.record.param_name.map(|n| n.to_string()),
                    param_value: p.record.param_value,
                    metric: d.metric,
                    group: &g.group,
                    irreducible: g.irreducible,
                    total: g.total,
                    reducible: g.reducible,
                    prior_score: d.prior_score,
                })?;
            }
        }
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}
