//! Chart recommendation for query results.
//!
//! Candidate charts are enumerated from the result's column kinds, described
//! by a small feature vector, scored by a rule-driven partial order (or a
//! learned pairwise model) and then picked greedily for diversity.

mod candidates;
mod diversified;
mod ltr;
mod partial_order;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use candidates::{enumerate_candidates, AxisKind, HISTOGRAM_BINS};
pub use diversified::{jaccard_distance, rank_diversified, DiversifiedConfig};
pub use ltr::{train_pairwise, RankingModel, TrainingPair};
pub use partial_order::{rank_partial_order, ChartCondition, PartialOrderRules, Rule};

#[derive(Debug, Error, PartialEq)]
pub enum VizError {
    #[error("no chart fits this result")]
    NoCandidates,
    #[error("partial-order rules form a cycle through {0}")]
    CycleDetected(String),
    #[error("training pair {0} has identical feature vectors")]
    DegenerateInput(usize),
    #[error("invalid ranking config: {0}")]
    Config(String),
}

/// Declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartType {
    Bar,
    Line,
    Pie,
    Scatter,
}

impl ChartType {
    pub const ALL: [ChartType; 4] = [ChartType::Bar, ChartType::Line, ChartType::Pie, ChartType::Scatter];

    pub fn name(self) -> &'static str {
        match self {
            ChartType::Bar => "bar",
            ChartType::Line => "line",
            ChartType::Pie => "pie",
            ChartType::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    None,
    Sum,
    Avg,
    Count,
}

impl Aggregate {
    pub const ALL: [Aggregate; 4] = [Aggregate::None, Aggregate::Sum, Aggregate::Avg, Aggregate::Count];

    pub fn name(self) -> &'static str {
        match self {
            Aggregate::None => "none",
            Aggregate::Sum => "sum",
            Aggregate::Avg => "avg",
            Aggregate::Count => "count",
        }
    }
}

/// The y axis: a result column, or the row count of each x group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum YAxis {
    Column(String),
    Count,
}

impl YAxis {
    pub fn name(&self) -> &str {
        match self {
            YAxis::Column(c) => c,
            YAxis::Count => "count",
        }
    }
}

impl fmt::Display for YAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub chart_type: ChartType,
    pub aggregate: Aggregate,
    pub x_kind: AxisKind,
    pub y_kind: AxisKind,
    /// Distinct x values over rows, in [0, 1].
    pub distinct_ratio_x: f64,
    /// Pearson correlation, only when both axes are numeric.
    pub correlation_xy: Option<f64>,
    /// Number of distinct x values (the groups an aggregate would form).
    pub group_count: usize,
    pub null_ratio: f64,
    pub row_count: usize,
}

impl FeatureVector {
    /// Length of [`FeatureVector::to_vec`].
    pub const LEN: usize = 4 + 4 + 3 + 3 + 6;

    /// Numeric layout used by the learned model: one-hot chart type,
    /// aggregate, x kind and y kind, then the scalar features.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::LEN);
        v.extend(ChartType::ALL.iter().map(|c| f64::from(u8::from(*c == self.chart_type))));
        v.extend(Aggregate::ALL.iter().map(|a| f64::from(u8::from(*a == self.aggregate))));
        for kind in [self.x_kind, self.y_kind] {
            v.extend(AxisKind::ALL.iter().map(|k| f64::from(u8::from(*k == kind))));
        }
        v.push(self.distinct_ratio_x);
        v.push(self.correlation_xy.unwrap_or(0.0));
        v.push(f64::from(u8::from(self.correlation_xy.is_some())));
        v.push((1.0 + self.group_count as f64).ln());
        v.push(self.null_ratio);
        v.push((1.0 + self.row_count as f64).ln());
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisualizationNode {
    pub chart_type: ChartType,
    pub x: String,
    pub y: YAxis,
    pub aggregate: Aggregate,
    /// Bin count for histogram-style bars over a numeric x.
    pub bins: Option<usize>,
    pub features: FeatureVector,
    pub score: f64,
}

impl VisualizationNode {
    /// Items compared by the Jaccard node distance.
    pub fn descriptor(&self) -> BTreeSet<String> {
        [
            format!("chart:{}", self.chart_type.name()),
            format!("x:{}", self.x),
            format!("y:{}", self.y),
            format!("agg:{}", self.aggregate.name()),
        ]
        .into_iter()
        .collect()
    }

    /// Identity of a candidate, ignoring features and score.
    pub fn key(&self) -> (ChartType, &str, &YAxis, Aggregate, Option<usize>) {
        (self.chart_type, &self.x, &self.y, self.aggregate, self.bins)
    }

    pub fn spec(&self) -> ChartSpec {
        ChartSpec {
            chart_type: self.chart_type,
            x: self.x.clone(),
            y: self.y.name().to_string(),
            aggregate: self.aggregate,
            bins: self.bins,
            score: self.score,
        }
    }
}

/// Presentation order: higher score first, then chart type, x, y, aggregate.
pub fn presentation_order(a: &VisualizationNode, b: &VisualizationNode) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.chart_type.cmp(&b.chart_type))
        .then_with(|| a.x.cmp(&b.x))
        .then_with(|| a.y.cmp(&b.y))
        .then_with(|| a.aggregate.cmp(&b.aggregate))
        .then_with(|| a.bins.cmp(&b.bins))
}

/// What a plotting layer needs to draw one chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    #[serde(rename = "type")]
    pub chart_type: ChartType,
    pub x: String,
    pub y: String,
    pub aggregate: Aggregate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    pub score: f64,
}

/// Rescales scores to [0, 1]. All-equal scores become 1.
pub fn normalize_scores(nodes: &mut [VisualizationNode]) {
    let (lo, hi) = nodes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| (lo.min(n.score), hi.max(n.score)));
    for n in nodes {
        n.score = if hi > lo { (n.score - lo) / (hi - lo) } else { 1.0 };
    }
}

/// Which ranking feeds the presented order.
#[derive(Debug, Clone, Default)]
pub enum RankingStrategy {
    /// Partial-order scores, then diversified top-k.
    #[default]
    Diversified,
    /// Learned pairwise scores, normalized, top-k by score.
    Learned(RankingModel),
}

#[derive(Debug, Clone)]
pub struct VizConfig {
    pub rules: PartialOrderRules,
    pub diversified: DiversifiedConfig,
    pub strategy: RankingStrategy,
}

impl Default for VizConfig {
    fn default() -> Self {
        VizConfig {
            rules: PartialOrderRules::builtin(),
            diversified: DiversifiedConfig::default(),
            strategy: RankingStrategy::default(),
        }
    }
}

/// Enumerates, scores and orders charts for a result. Returns an empty
/// list when no chart fits.
pub fn recommend(result: &crate::executor::ResultTable, config: &VizConfig) -> Result<Vec<ChartSpec>, VizError> {
    let nodes = match enumerate_candidates(result) {
        Ok(n) => n,
        Err(VizError::NoCandidates) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let picked = match &config.strategy {
        RankingStrategy::Diversified => {
            rank_diversified(&rank_partial_order(nodes, &config.rules)?, &config.diversified)
        }
        RankingStrategy::Learned(model) => {
            let mut scored = model.score_nodes(nodes);
            scored.sort_by(presentation_order);
            scored.truncate(config.diversified.k);
            scored
        }
    };
    Ok(picked.iter().map(VisualizationNode::spec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_shape() {
        let spec = ChartSpec {
            chart_type: ChartType::Bar,
            x: "region".into(),
            y: "revenue".into(),
            aggregate: Aggregate::Sum,
            bins: None,
            score: 1.0,
        };
        assert_eq!(
            serde_json::to_string(&spec).unwrap(),
            r#"{"type":"bar","x":"region","y":"revenue","aggregate":"sum","score":1.0}"#
        );
    }

    #[test]
    fn feature_layout_length() {
        let f = FeatureVector {
            chart_type: ChartType::Pie,
            aggregate: Aggregate::Count,
            x_kind: AxisKind::Categorical,
            y_kind: AxisKind::Numeric,
            distinct_ratio_x: 0.5,
            correlation_xy: None,
            group_count: 3,
            null_ratio: 0.0,
            row_count: 6,
        };
        assert_eq!(f.to_vec().len(), FeatureVector::LEN);
    }
}
