//! Exposure, inequality, and concentration measurements.

use thiserror::Error;

use crate::graph::{Group, LabeledDigraph, NodeId};
use crate::recommend::RecommendationBatch;

/// Degree-percentile thresholds covering the top-1%, 3%, 5%, 10%, 20%,
/// 50%, and the whole group.
pub const DEFAULT_PERCENTILES: [f64; 7] = [0.01, 0.03, 0.05, 0.10, 0.20, 0.50, 1.00];

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("input is empty")]
    EmptyInput,
    #[error("negative value {0} not allowed")]
    NegativeValue(f64),
    #[error("iteration-1 baseline missing or zero")]
    MissingBaseline,
}

/// Share of recommendation slots per group in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureReport {
    pub e_min: f64,
    pub e_maj: f64,
    pub recs_issued: usize,
}

/// Counts recommended target slots per group; a node recommended to
/// several users counts once per slot. `None` when no slots were issued.
pub fn exposure(batch: &RecommendationBatch, labels: &[Group]) -> Option<ExposureReport> {
    let mut minority = 0usize;
    let mut total = 0usize;
    for list in &batch.lists {
        for &v in &list.targets {
            total += 1;
            if labels[v as usize] == Group::Minority {
                minority += 1;
            }
        }
    }
    if total == 0 {
        return None;
    }
    let e_min = minority as f64 / total as f64;
    Some(ExposureReport {
        e_min,
        e_maj: 1.0 - e_min,
        recs_issued: total,
    })
}

/// `E_t / E_1` over a per-iteration exposure series (`series[0]` is t=1).
pub fn exposure_ratio(series: &[Option<f64>], t: usize) -> Result<f64, MetricsError> {
    let baseline = series
        .first()
        .copied()
        .flatten()
        .filter(|&e| e > 0.0)
        .ok_or(MetricsError::MissingBaseline)?;
    let value = series
        .get(t.checked_sub(1).ok_or(MetricsError::EmptyInput)?)
        .copied()
        .flatten()
        .ok_or(MetricsError::EmptyInput)?;
    Ok(value / baseline)
}

/// Gini coefficient:
/// `G = (1/N) * (N + 1 - 2 * sum_i (N + 1 - i) y_i / sum_i y_i)` with the
/// values indexed ascending. All-zero input is defined as 0.
pub fn gini(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if let Some(&bad) = values.iter().find(|&&y| y < 0.0) {
        return Err(MetricsError::NegativeValue(bad));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("gini input must be finite"));
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(idx, y)| (n - idx as f64) * y)
        .sum();
    Ok((n + 1.0 - 2.0 * weighted / total) / n)
}

/// Gini of current in-degree over the members of one group.
pub fn group_in_degree_gini(g: &LabeledDigraph, group: Group) -> Result<f64, MetricsError> {
    let degrees: Vec<f64> = g
        .members(group)
        .into_iter()
        .map(|u| g.in_degree(u) as f64)
        .collect();
    gini(&degrees)
}

/// Cumulative exposure share captured by the top in-degree slices of a
/// group. Shares are non-decreasing in the threshold and end at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileBuckets {
    pub thresholds: Vec<f64>,
    pub shares: Vec<f64>,
}

/// Ranks `group` members by in-degree (descending, ties by ascending node
/// id) and accumulates their share of the group's recommendation slots at
/// each threshold. `None` when the group received no recommendations.
pub fn percentile_exposure(
    batch: &RecommendationBatch,
    g: &LabeledDigraph,
    group: Group,
    thresholds: &[f64],
) -> Option<PercentileBuckets> {
    let members = g.members(group);
    if members.is_empty() {
        return None;
    }
    let mut slots = vec![0usize; g.node_count()];
    let mut group_total = 0usize;
    for list in &batch.lists {
        for &v in &list.targets {
            if g.label(v) == group {
                slots[v as usize] += 1;
                group_total += 1;
            }
        }
    }
    if group_total == 0 {
        return None;
    }

    let mut ranked: Vec<NodeId> = members;
    ranked.sort_by(|&a, &b| g.in_degree(b).cmp(&g.in_degree(a)).then(a.cmp(&b)));
    let prefix: Vec<usize> = ranked
        .iter()
        .scan(0usize, |acc, &u| {
            *acc += slots[u as usize];
            Some(*acc)
        })
        .collect();

    let shares = thresholds
        .iter()
        .map(|&q| {
            let top = ((q * ranked.len() as f64).ceil() as usize).clamp(1, ranked.len());
            prefix[top - 1] as f64 / group_total as f64
        })
        .collect();
    Some(PercentileBuckets {
        thresholds: thresholds.to_vec(),
        shares,
    })
}
