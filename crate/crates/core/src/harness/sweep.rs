use rayon::prelude::*;

use super::config::{EncoderEntry, ExperimentConfig};
use super::pipeline::{run_point, Prepared, SweepRecord};
use crate::error::Result;
use crate::rng;

/// One configured point: an encoder entry and its grid value, if swept.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub entry: EncoderEntry,
    pub value: Option<f64>,
}

/// Points in output order: encoders as configured, each swept encoder over
/// its grid in ascending order.
pub fn sweep_points(config: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for e in &config.encoders {
        match e.sweep {
            None => out.push(SweepPoint {
                entry: e.clone(),
                value: None,
            }),
            Some(param) => out.extend(config.sweep.grid(param).into_iter().map(|v| SweepPoint {
                entry: e.clone(),
                value: Some(v),
            })),
        }
    }
    out
}

/// Every encoder once at its fixed settings, ignoring sweeps.
pub fn audit_points(config: &ExperimentConfig) -> Vec<SweepPoint> {
    config
        .encoders
        .iter()
        .map(|e| SweepPoint {
            entry: EncoderEntry {
                sweep: None,
                ..e.clone()
            },
            value: None,
        })
        .collect()
}

/// Runs points in parallel; point `k` draws its noise from
/// `(config.seed, k)`, so records do not depend on scheduling.
pub fn run_points(prepared: &Prepared, points: &[SweepPoint], base_seed: u64) -> Vec<SweepRecord> {
    points
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            run_point(
                prepared,
                &p.entry,
                p.value,
                rng::derive_seed(base_seed, k as u64),
            )
        })
        .collect()
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    let prepared = Prepared::new(config)?;
    Ok(run_points(&prepared, &sweep_points(config), config.seed))
}

pub fn run_audit(config: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    let prepared = Prepared::new(config)?;
    Ok(run_points(&prepared, &audit_points(config), config.seed))
}
