//! Synthetic populations with known group posteriors, and closed-form
//! quantities for the Bayes-threshold classifier on them.
//!
//! A population has groups `z_i` with prior `P(Z = z_i)` and posterior
//! `p_i = P(Y = 1 | Z = z_i)`. The perfect encoding maps `z_i` to `p_i`; the
//! Bayes-threshold classifier predicts `1(p_i > 1/2)`. Unfairness that
//! survives under that pair is irreducible; whatever an empirical pipeline
//! adds on top of it is reducible.
//!
//! Note on one-hot: a single-column variant that maps `z_i` to `2^i` is
//! sometimes used to argue about one-hot encoding analytically. It carries
//! the same information as the indicator columns and is not implemented.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{
    CategoricalColumn, ColumnData, ColumnSchema, Dataset, Role, CONCAT_SEPARATOR,
};
use crate::encoders::Encoder;
use crate::error::{Error, Result};
use crate::metrics::{FairnessReport, MetricKind, MetricOutcome};
use crate::rng;

pub const TARGET_COLUMN: &str = "label";
pub const COVARIATE_COLUMN: &str = "x";

fn default_attribute() -> String {
    "group".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationGroup {
    pub category: String,
    pub prior: f64,
    pub posterior: f64,
    /// Mean of the numeric covariate within this group.
    #[serde(default)]
    pub covariate_mean: f64,
}

impl PopulationGroup {
    pub fn new(category: impl Into<String>, prior: f64, posterior: f64) -> Self {
        Self {
            category: category.into(),
            prior,
            posterior,
            covariate_mean: 0.0,
        }
    }

    pub fn with_covariate_mean(mut self, mean: f64) -> Self {
        self.covariate_mean = mean;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub groups: Vec<PopulationGroup>,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Name of the protected column.
    #[serde(default = "default_attribute")]
    pub attribute: String,
    /// When non-empty, every category is a `|`-joined tuple and each part is
    /// emitted as its own protected column under these names instead of a
    /// single column.
    #[serde(default)]
    pub split_attributes: Vec<String>,
    /// When set, adds a numeric feature `x ~ N(covariate_mean_i, sd^2)`.
    #[serde(default)]
    pub covariate_sd: Option<f64>,
    /// Draw exactly `round(prior * n)` rows per group instead of sampling
    /// group membership.
    #[serde(default)]
    pub exact_counts: bool,
}

impl PopulationSpec {
    pub fn new(groups: Vec<PopulationGroup>, n: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            groups,
            n,
            seed,
            attribute: default_attribute(),
            split_attributes: Vec::new(),
            covariate_sd: None,
            exact_counts: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Groups with fixed row counts; priors are the count shares.
    pub fn with_counts(groups: &[(&str, usize, f64)], seed: u64) -> Result<Self> {
        let n: usize = groups.iter().map(|g| g.1).sum();
        if n == 0 {
            return Err(Error::InvalidPopulation("no rows requested".into()));
        }
        let mut spec = Self::new(
            groups
                .iter()
                .map(|&(c, k, p)| PopulationGroup::new(c, k as f64 / n as f64, p))
                .collect(),
            n,
            seed,
        )?;
        spec.exact_counts = true;
        Ok(spec)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPopulation(m));
        if self.groups.is_empty() {
            return bad("no groups".into());
        }
        if self.n == 0 {
            return bad("sample size must be >= 1".into());
        }
        let mut total = 0.0;
        for (i, g) in self.groups.iter().enumerate() {
            if g.category.is_empty() {
                return bad(format!("group {i} has an empty category"));
            }
            if self.groups[..i].iter().any(|h| h.category == g.category) {
                return bad(format!("duplicate category {:?}", g.category));
            }
            if !(g.prior > 0.0 && g.prior.is_finite()) {
                return bad(format!("prior of {:?} must be positive", g.category));
            }
            if !(0.0..=1.0).contains(&g.posterior) {
                return bad(format!("posterior of {:?} outside [0, 1]", g.category));
            }
            if !g.covariate_mean.is_finite() {
                return bad(format!("covariate mean of {:?} not finite", g.category));
            }
            total += g.prior;
        }
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("priors sum to {total}, not 1"));
        }
        if let Some(sd) = self.covariate_sd {
            if !(sd >= 0.0 && sd.is_finite()) {
                return bad(format!("covariate sd {sd} invalid"));
            }
        }
        if !self.split_attributes.is_empty() {
            let k = self.split_attributes.len();
            if k < 2 {
                return bad("split_attributes needs at least two names".into());
            }
            for g in &self.groups {
                let parts: Vec<&str> = g.category.split(CONCAT_SEPARATOR).collect();
                if parts.len() != k || parts.iter().any(|p| p.is_empty()) {
                    return bad(format!(
                        "category {:?} does not split into {k} parts",
                        g.category
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn group(&self, category: &str) -> Option<&PopulationGroup> {
        self.groups.iter().find(|g| g.category == category)
    }

    fn require(&self, category: &str) -> Result<&PopulationGroup> {
        self.group(category)
            .ok_or_else(|| Error::MissingGroup(category.to_string()))
    }

    /// Population prevalence `sum_i P(z_i) p_i`.
    pub fn prevalence(&self) -> f64 {
        self.groups.iter().map(|g| g.prior * g.posterior).sum()
    }

    fn counts(&self) -> Vec<usize> {
        let mut counts: Vec<usize> = self
            .groups
            .iter()
            .map(|g| (g.prior * self.n as f64).round() as usize)
            .collect();
        // keep the total at n; rounding drift lands on the largest group
        let total: usize = counts.iter().sum();
        let largest = (0..counts.len()).max_by_key(|&i| counts[i]).unwrap_or(0);
        if total > self.n {
            counts[largest] -= (total - self.n).min(counts[largest]);
        } else {
            counts[largest] += self.n - total;
        }
        counts
    }
}

/// Draws the population sample. Labels are Bernoulli(p_i); group membership
/// is i.i.d. from the priors unless `exact_counts` is set, in which case rows
/// come grouped in spec order.
pub fn sample_population(spec: &PopulationSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut r = rng::seeded(spec.seed);
    let membership: Vec<usize> = if spec.exact_counts {
        spec.counts()
            .into_iter()
            .enumerate()
            .flat_map(|(g, k)| std::iter::repeat_n(g, k))
            .collect()
    } else {
        let cumulative: Vec<f64> = spec
            .groups
            .iter()
            .scan(0.0, |acc, g| {
                *acc += g.prior;
                Some(*acc)
            })
            .collect();
        (0..spec.n)
            .map(|_| {
                let u = r.random::<f64>() * cumulative[cumulative.len() - 1];
                cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(cumulative.len() - 1)
            })
            .collect()
    };
    let labels: Vec<u8> = membership
        .iter()
        .map(|&g| (r.random::<f64>() < spec.groups[g].posterior) as u8)
        .collect();

    let mut schema = Vec::new();
    let mut columns = Vec::new();
    let names: Vec<&str> = spec.groups.iter().map(|g| g.category.as_str()).collect();
    if spec.split_attributes.is_empty() {
        let values: Vec<&str> = membership.iter().map(|&g| names[g]).collect();
        schema.push(ColumnSchema::categorical(&spec.attribute, Role::Protected));
        columns.push(ColumnData::Categorical(CategoricalColumn::from_values(
            &values,
        )));
    } else {
        for (k, attr) in spec.split_attributes.iter().enumerate() {
            let values: Vec<&str> = membership
                .iter()
                .map(|&g| names[g].split(CONCAT_SEPARATOR).nth(k).unwrap())
                .collect();
            schema.push(ColumnSchema::categorical(attr, Role::Protected));
            columns.push(ColumnData::Categorical(CategoricalColumn::from_values(
                &values,
            )));
        }
    }
    if let Some(sd) = spec.covariate_sd {
        let noise = Normal::new(0.0, sd).map_err(|e| Error::InvalidPopulation(e.to_string()))?;
        let x = membership
            .iter()
            .map(|&g| spec.groups[g].covariate_mean + noise.sample(&mut r))
            .collect();
        schema.push(ColumnSchema::numeric(COVARIATE_COLUMN, Role::Feature));
        columns.push(ColumnData::Numeric(x));
    }
    schema.push(ColumnSchema::target(TARGET_COLUMN));
    columns.push(ColumnData::Target(labels));
    Dataset::new(schema, columns)
}

/// Target encoder mapping each `z_i` to its posterior `p_i`.
pub fn perfect_encoding(spec: &PopulationSpec) -> Result<Encoder> {
    spec.validate()?;
    Encoder::from_target_values(
        &spec.attribute,
        spec.groups
            .iter()
            .map(|g| (g.category.clone(), g.posterior))
            .collect(),
        spec.prevalence(),
    )
}

/// Bayes classification error `sum_i P(z_i) min(p_i, 1 - p_i)`.
pub fn bayes_error(spec: &PopulationSpec) -> f64 {
    spec.groups
        .iter()
        .map(|g| g.prior * g.posterior.min(1.0 - g.posterior))
        .sum()
}

/// Error of predicting `label` for every row: `sum_i P(z_i) (1 - p_i)` for
/// label 1, `sum_i P(z_i) p_i` for label 0.
pub fn constant_prediction_error(spec: &PopulationSpec, label: u8) -> f64 {
    spec.groups
        .iter()
        .map(|g| {
            g.prior
                * if label == 1 {
                    1.0 - g.posterior
                } else {
                    g.posterior
                }
        })
        .sum()
}

fn bayes_label(p: f64) -> i8 {
    (p > 0.5) as i8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupValue {
    pub group: String,
    pub value: f64,
}

/// Equal opportunity of the Bayes-threshold classifier under the perfect
/// encoding: 0 when `p_i` and `p_r` sit on the same side of 1/2, otherwise
/// `sign(1(p_i > 1/2) - 1(p_r > 1/2))`.
pub fn perfect_eof(spec: &PopulationSpec, reference: &str) -> Result<Vec<GroupValue>> {
    let r = bayes_label(spec.require(reference)?.posterior);
    Ok(spec
        .groups
        .iter()
        .filter(|g| g.category != reference)
        .map(|g| GroupValue {
            group: g.category.clone(),
            value: f64::from(bayes_label(g.posterior) - r),
        })
        .collect())
}

/// `P(|p_hat - p| >= epsilon) <= 2 exp(-2 n epsilon^2)`.
pub fn hoeffding_bound(n: u64, epsilon: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} <= 0")));
    }
    Ok(2.0 * (-2.0 * n as f64 * epsilon * epsilon).exp())
}

/// Variance `p (1 - p) / n` of the empirical rate over `n` Bernoulli draws.
pub fn estimator_variance(p: f64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    Ok(p * (1.0 - p) / n as f64)
}

/// Closed-form metric value of the Bayes-threshold classifier for group `i`
/// against reference `r`. DP compares score distributions, which under the
/// perfect encoding are point masses at the posteriors.
fn irreducible_value(metric: MetricKind, p_i: f64, p_r: f64) -> f64 {
    let gap = f64::from(bayes_label(p_i) - bayes_label(p_r));
    match metric {
        MetricKind::EqualOpportunity => gap,
        MetricKind::AverageAbsoluteOdds => gap.abs(),
        MetricKind::DemographicParity => (p_i - p_r).abs(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDecomposition {
    pub group: String,
    pub irreducible: f64,
    /// `None` when the pipeline skipped the group.
    pub total: Option<f64>,
    pub reducible: Option<f64>,
}

/// Split of one metric into the part present under perfect encoding with
/// the Bayes-threshold classifier and the part added by the pipeline. All
/// values are absolute; `reducible` may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasDecomposition {
    pub metric: MetricKind,
    pub reference: String,
    pub groups: Vec<GroupDecomposition>,
    /// Sums over groups the pipeline did not skip.
    pub irreducible: f64,
    pub total: f64,
    pub reducible: f64,
    /// Model score at the prior encoding, when the pipeline reports it.
    pub prior_score: Option<f64>,
}

pub fn decompose_bias(
    spec: &PopulationSpec,
    reference: &str,
    outcome: &FairnessReport,
    metric: &str,
) -> Result<BiasDecomposition> {
    let metric: MetricKind = metric.parse()?;
    decompose(spec, reference, outcome, metric, None)
}

/// As [`decompose_bias`], recording the model's score at the prior encoding.
pub fn decompose(
    spec: &PopulationSpec,
    reference: &str,
    outcome: &FairnessReport,
    metric: MetricKind,
    prior_score: Option<f64>,
) -> Result<BiasDecomposition> {
    spec.validate()?;
    if outcome.reference != reference {
        return Err(Error::InvalidArgument(format!(
            "report uses reference {:?}, expected {reference:?}",
            outcome.reference
        )));
    }
    let p_r = spec.require(reference)?.posterior;
    let values = outcome.metric(metric);
    let mut groups = Vec::new();
    let (mut irr_sum, mut tot_sum) = (0.0, 0.0);
    for g in spec.groups.iter().filter(|g| g.category != reference) {
        let irreducible = irreducible_value(metric, g.posterior, p_r).abs();
        let total = match values.get(&g.category) {
            Some(MetricOutcome::Value(v)) => Some(v.abs()),
            _ => None,
        };
        if let Some(t) = total {
            irr_sum += irreducible;
            tot_sum += t;
        }
        groups.push(GroupDecomposition {
            group: g.category.clone(),
            irreducible,
            total,
            reducible: total.map(|t| t - irreducible),
        });
    }
    Ok(BiasDecomposition {
        metric,
        reference: reference.to_string(),
        groups,
        irreducible: irr_sum,
        total: tot_sum,
        reducible: tot_sum - irr_sum,
        prior_score,
    })
}
