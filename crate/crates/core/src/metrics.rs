//! AUC and group-fairness metrics against a reference group.
//!
//! Demographic parity is the Wasserstein-1 distance between the score
//! distributions of two groups, so it does not depend on a decision
//! threshold. Feeding 0/1 labels in place of scores recovers the thresholded
//! variant (the absolute difference in positive rates).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Prediction;

fn check_labels(scores_len: usize, labels: &[u8]) -> Result<(usize, usize)> {
    if scores_len != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores_len,
            got: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    Ok((pos, labels.len() - pos))
}

/// Mann-Whitney AUC with midranks for tied scores: the probability that a
/// random positive outscores a random negative, ties counting one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (n_pos, n_neg) = check_labels(scores.len(), labels)?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        let pos_in_block = idx[i..=j].iter().filter(|&&k| labels[k] == 1).count();
        rank_sum_pos += avg * pos_in_block as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Wasserstein-1 distance between two empirical distributions, computed as
/// the integral of |F_a - F_b| over the merged support.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "Wasserstein distance needs non-empty samples".into(),
        ));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as i64, b.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    let mut x = a[0].min(b[0]);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        // |F_a - F_b| on [x, next), as an integer numerator over na * nb
        let gap = (i as i64 * nb - j as i64 * na).abs();
        total += gap as f64 * (next - x);
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        x = next;
    }
    Ok(total / (na as f64 * nb as f64))
}

/// Rows partitioned by group value, groups in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Groups {
    names: Vec<String>,
    members: Vec<Vec<usize>>,
}

impl Groups {
    /// Groups in first-appearance order.
    pub fn from_values<S: AsRef<str>>(values: &[S]) -> Self {
        Self::with_known::<S, &str>(values, &[])
    }

    /// `known` groups first, in the given order, even when they have no
    /// rows; then any other value in first-appearance order.
    pub fn with_known<S: AsRef<str>, K: AsRef<str>>(values: &[S], known: &[K]) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut lookup = std::collections::HashMap::new();
        for k in known {
            let k = k.as_ref();
            if !lookup.contains_key(k) {
                lookup.insert(k.to_string(), names.len());
                names.push(k.to_string());
            }
        }
        let mut members = vec![Vec::new(); names.len()];
        for (row, v) in values.iter().enumerate() {
            let v = v.as_ref();
            let g = match lookup.get(v) {
                Some(&g) => g,
                None => {
                    lookup.insert(v.to_string(), names.len());
                    names.push(v.to_string());
                    members.push(Vec::new());
                    names.len() - 1
                }
            };
            members[g].push(row);
        }
        Self { names, members }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn rows(&self, group: &str) -> Option<&[usize]> {
        self.position(group).map(|g| self.members[g].as_slice())
    }

    fn position(&self, group: &str) -> Option<usize> {
        self.names.iter().position(|n| n == group)
    }

    fn total_rows(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    fn iter(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.members.iter().map(Vec::as_slice))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "EOF")]
    EqualOpportunity,
    #[serde(rename = "DP")]
    DemographicParity,
    #[serde(rename = "AAO")]
    AverageAbsoluteOdds,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [
        MetricKind::EqualOpportunity,
        MetricKind::DemographicParity,
        MetricKind::AverageAbsoluteOdds,
    ];

    pub fn short_name(&self) -> &'static str {
        match self {
            MetricKind::EqualOpportunity => "EOF",
            MetricKind::DemographicParity => "DP",
            MetricKind::AverageAbsoluteOdds => "AAO",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EOF" | "EO" | "EQUAL-OPPORTUNITY" => Ok(MetricKind::EqualOpportunity),
            "DP" | "DEMOGRAPHIC-PARITY" => Ok(MetricKind::DemographicParity),
            "AAO" | "AVERAGE-ABSOLUTE-ODDS" => Ok(MetricKind::AverageAbsoluteOdds),
            _ => Err(Error::UnknownMetric(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    /// The group has no rows in the evaluated data.
    NoRows,
    NoPositives,
    NoNegatives,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::NoRows => "no rows in evaluated data",
            SkipReason::NoPositives => "no positive labels",
            SkipReason::NoNegatives => "no negative labels",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricOutcome {
    Value(f64),
    Skipped(SkipReason),
}

impl MetricOutcome {
    pub fn value(&self) -> Option<f64> {
        match *self {
            MetricOutcome::Value(v) => Some(v),
            MetricOutcome::Skipped(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub group: String,
    pub outcome: MetricOutcome,
}

/// One fairness metric for every non-reference group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetric {
    pub metric: MetricKind,
    pub reference: String,
    pub entries: Vec<GroupEntry>,
}

impl GroupMetric {
    pub fn get(&self, group: &str) -> Option<&MetricOutcome> {
        self.entries
            .iter()
            .find(|e| e.group == group)
            .map(|e| &e.outcome)
    }

    pub fn values(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries
            .iter()
            .filter_map(|e| e.outcome.value().map(|v| (e.group.as_str(), v)))
    }

    /// Largest absolute per-group value.
    pub fn max_abs(&self) -> Option<f64> {
        self.values().map(|(_, v)| v.abs()).reduce(f64::max)
    }
}

/// Unweighted sum of absolute per-group values over non-skipped groups.
pub fn aggregate(metric: &GroupMetric) -> Result<f64> {
    let mut any = false;
    let mut total = 0.0;
    for (_, v) in metric.values() {
        any = true;
        total += v.abs();
    }
    if any {
        Ok(total)
    } else {
        Err(Error::AllGroupsSkipped)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub group: String,
    pub n: usize,
    pub positives: usize,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub auc: Option<f64>,
}

/// Confusion-matrix rates and AUC per group.
pub fn group_outcomes(
    pred: &Prediction,
    labels: &[u8],
    groups: &Groups,
) -> Result<Vec<GroupOutcome>> {
    check_labels(pred.len(), labels)?;
    if groups.total_rows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: groups.total_rows(),
        });
    }
    Ok(groups
        .iter()
        .map(|(name, rows)| {
            let mut tp = 0usize;
            let mut fp = 0usize;
            let mut pos = 0usize;
            for &r in rows {
                if labels[r] == 1 {
                    pos += 1;
                    tp += pred.labels[r] as usize;
                } else {
                    fp += pred.labels[r] as usize;
                }
            }
            let neg = rows.len() - pos;
            let auc = if pos > 0 && neg > 0 {
                let s: Vec<f64> = rows.iter().map(|&r| pred.scores[r]).collect();
                let l: Vec<u8> = rows.iter().map(|&r| labels[r]).collect();
                auc(&s, &l).ok()
            } else {
                None
            };
            GroupOutcome {
                group: name.to_string(),
                n: rows.len(),
                positives: pos,
                tpr: (pos > 0).then(|| tp as f64 / pos as f64),
                fpr: (neg > 0).then(|| fp as f64 / neg as f64),
                auc,
            }
        })
        .collect())
}

fn find<'a>(outcomes: &'a [GroupOutcome], reference: &str) -> Result<&'a GroupOutcome> {
    outcomes
        .iter()
        .find(|o| o.group == reference)
        .ok_or_else(|| Error::MissingGroup(reference.to_string()))
}

fn rate_skip(o: &GroupOutcome, need_negatives: bool) -> Option<SkipReason> {
    if o.n == 0 {
        Some(SkipReason::NoRows)
    } else if o.tpr.is_none() {
        Some(SkipReason::NoPositives)
    } else if need_negatives && o.fpr.is_none() {
        Some(SkipReason::NoNegatives)
    } else {
        None
    }
}

fn eof_from(outcomes: &[GroupOutcome], reference: &str) -> Result<GroupMetric> {
    let r = find(outcomes, reference)?;
    let tpr_r = r.tpr.ok_or_else(|| Error::ReferenceGroup {
        group: reference.to_string(),
        reason: "no positive labels".into(),
    })?;
    let entries = outcomes
        .iter()
        .filter(|o| o.group != reference)
        .map(|o| GroupEntry {
            group: o.group.clone(),
            outcome: match rate_skip(o, false) {
                Some(reason) => MetricOutcome::Skipped(reason),
                None => MetricOutcome::Value(o.tpr.unwrap() - tpr_r),
            },
        })
        .collect();
    Ok(GroupMetric {
        metric: MetricKind::EqualOpportunity,
        reference: reference.to_string(),
        entries,
    })
}

fn aao_from(outcomes: &[GroupOutcome], reference: &str) -> Result<GroupMetric> {
    let r = find(outcomes, reference)?;
    let (tpr_r, fpr_r) = match (r.tpr, r.fpr) {
        (Some(t), Some(f)) => (t, f),
        _ => {
            return Err(Error::ReferenceGroup {
                group: reference.to_string(),
                reason: "needs both positive and negative labels".into(),
            })
        }
    };
    let entries = outcomes
        .iter()
        .filter(|o| o.group != reference)
        .map(|o| GroupEntry {
            group: o.group.clone(),
            outcome: match rate_skip(o, true) {
                Some(reason) => MetricOutcome::Skipped(reason),
                None => MetricOutcome::Value(
                    0.5 * ((o.fpr.unwrap() - fpr_r).abs() + (o.tpr.unwrap() - tpr_r).abs()),
                ),
            },
        })
        .collect();
    Ok(GroupMetric {
        metric: MetricKind::AverageAbsoluteOdds,
        reference: reference.to_string(),
        entries,
    })
}

/// EOF_{i,r} = TPR_i - TPR_r.
pub fn equal_opportunity(
    pred: &Prediction,
    labels: &[u8],
    groups: &Groups,
    reference: &str,
) -> Result<GroupMetric> {
    eof_from(&group_outcomes(pred, labels, groups)?, reference)
}

/// AAO_{i,r} = (|FPR_i - FPR_r| + |TPR_i - TPR_r|) / 2.
pub fn average_absolute_odds(
    pred: &Prediction,
    labels: &[u8],
    groups: &Groups,
    reference: &str,
) -> Result<GroupMetric> {
    aao_from(&group_outcomes(pred, labels, groups)?, reference)
}

/// DP_{i,r} = W1(scores of group i, scores of group r).
pub fn demographic_parity(scores: &[f64], groups: &Groups, reference: &str) -> Result<GroupMetric> {
    if groups.total_rows() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            got: groups.total_rows(),
        });
    }
    let pick = |rows: &[usize]| rows.iter().map(|&r| scores[r]).collect::<Vec<f64>>();
    let r_rows = groups
        .rows(reference)
        .ok_or_else(|| Error::MissingGroup(reference.to_string()))?;
    if r_rows.is_empty() {
        return Err(Error::ReferenceGroup {
            group: reference.to_string(),
            reason: "no rows".into(),
        });
    }
    let r_scores = pick(r_rows);
    let mut entries = Vec::new();
    for (name, rows) in groups.iter() {
        if name == reference {
            continue;
        }
        let outcome = if rows.is_empty() {
            MetricOutcome::Skipped(SkipReason::NoRows)
        } else {
            MetricOutcome::Value(wasserstein1(&pick(rows), &r_scores)?)
        };
        entries.push(GroupEntry {
            group: name.to_string(),
            outcome,
        });
    }
    Ok(GroupMetric {
        metric: MetricKind::DemographicParity,
        reference: reference.to_string(),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedGroup {
    pub group: String,
    pub metric: MetricKind,
    pub reason: SkipReason,
}

/// Per-group outcomes and the three disparity metrics against one
/// reference group, with their aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub reference: String,
    pub groups: Vec<GroupOutcome>,
    pub eof: GroupMetric,
    pub dp: GroupMetric,
    pub aao: GroupMetric,
    pub l_eof: Option<f64>,
    pub l_dp: Option<f64>,
    pub l_aao: Option<f64>,
}

impl FairnessReport {
    pub fn metric(&self, kind: MetricKind) -> &GroupMetric {
        match kind {
            MetricKind::EqualOpportunity => &self.eof,
            MetricKind::DemographicParity => &self.dp,
            MetricKind::AverageAbsoluteOdds => &self.aao,
        }
    }

    pub fn aggregate(&self, kind: MetricKind) -> Option<f64> {
        match kind {
            MetricKind::EqualOpportunity => self.l_eof,
            MetricKind::DemographicParity => self.l_dp,
            MetricKind::AverageAbsoluteOdds => self.l_aao,
        }
    }

    pub fn max_abs(&self, kind: MetricKind) -> Option<f64> {
        self.metric(kind).max_abs()
    }

    pub fn skipped(&self) -> Vec<SkippedGroup> {
        MetricKind::ALL
            .iter()
            .flat_map(|&k| {
                self.metric(k)
                    .entries
                    .iter()
                    .filter_map(move |e| match e.outcome {
                        MetricOutcome::Skipped(reason) => Some(SkippedGroup {
                            group: e.group.clone(),
                            metric: k,
                            reason,
                        }),
                        MetricOutcome::Value(_) => None,
                    })
            })
            .collect()
    }
}

pub fn fairness_report(
    pred: &Prediction,
    labels: &[u8],
    groups: &Groups,
    reference: &str,
) -> Result<FairnessReport> {
    let outcomes = group_outcomes(pred, labels, groups)?;
    let eof = eof_from(&outcomes, reference)?;
    let aao = aao_from(&outcomes, reference)?;
    let dp = demographic_parity(&pred.scores, groups, reference)?;
    Ok(FairnessReport {
        reference: reference.to_string(),
        groups: outcomes,
        l_eof: aggregate(&eof).ok(),
        l_dp: aggregate(&dp).ok(),
        l_aao: aggregate(&aao).ok(),
        eof,
        dp,
        aao,
    })
}
