use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{presentation_order, AxisKind, ChartType, FeatureVector, VisualizationNode, VizError};
use super::Aggregate;

const BUILTIN_RULES: &str = include_str!("../../data/viz_rules.json");

/// Extra requirements on the preferred node's features.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChartCondition {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_kind: Option<AxisKind>,
    /// Fewest distinct x values the preferred node may have.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_distinct_x: Option<usize>,
}

impl ChartCondition {
    fn holds(&self, f: &FeatureVector) -> bool {
        self.x_kind.is_none_or(|k| k == f.x_kind) && self.min_distinct_x.is_none_or(|m| f.group_count >= m)
    }
}

/// One dominance rule: `prefers(u, v)` adds the edge u -> v.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    /// Same columns and aggregate, one chart type over another.
    ChartOverChart {
        better: ChartType,
        worse: ChartType,
        #[serde(default)]
        when: ChartCondition,
    },
    /// An aggregated chart over its raw twin when aggregation shrinks the
    /// rows below this fraction.
    AggregatedOverRaw { max_group_fraction: f64 },
    /// Same chart type and aggregate over other columns: fewer nulls wins.
    LowerNullRatio,
}

impl Rule {
    pub fn prefers(&self, u: &VisualizationNode, v: &VisualizationNode) -> bool {
        let same_columns = u.x == v.x && u.y == v.y && u.bins == v.bins;
        match self {
            Rule::ChartOverChart { better, worse, when } => {
                u.chart_type == *better
                    && v.chart_type == *worse
                    && same_columns
                    && u.aggregate == v.aggregate
                    && when.holds(&u.features)
            }
            Rule::AggregatedOverRaw { max_group_fraction } => {
                u.aggregate != Aggregate::None
                    && v.aggregate == Aggregate::None
                    && u.chart_type == v.chart_type
                    && same_columns
                    && (u.features.group_count as f64) < u.features.row_count as f64 * max_group_fraction
            }
            Rule::LowerNullRatio => {
                u.chart_type == v.chart_type
                    && u.aggregate == v.aggregate
                    && (u.x != v.x || u.y != v.y)
                    && u.features.null_ratio < v.features.null_ratio
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialOrderRules {
    pub rules: Vec<Rule>,
}

impl PartialOrderRules {
    /// The shipped rule set.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_RULES).expect("bundled rules parse")
    }

    pub fn from_json(text: &str) -> Result<Self, VizError> {
        serde_json::from_str(text).map_err(|e| VizError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, VizError> {
        let text = std::fs::read_to_string(path).map_err(|e| VizError::Config(e.to_string()))?;
        Self::from_json(&text)
    }

    /// Every (better, worse) index pair some rule asserts.
    pub fn edges(&self, nodes: &[VisualizationNode]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, u) in nodes.iter().enumerate() {
            for (j, v) in nodes.iter().enumerate() {
                if i != j && self.rules.iter().any(|r| r.prefers(u, v)) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Topological layer of each node along its longest incoming path.
pub fn layers(n: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>, usize> {
    let mut out_edges = vec![Vec::new(); n];
    let mut indegree = vec![0; n];
    for &(u, v) in edges {
        out_edges[u].push(v);
        indegree[v] += 1;
    }
    let mut layer = vec![0; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut done = 0;
    while let Some(u) = queue.pop_front() {
        done += 1;
        for &v in &out_edges[u] {
            layer[v] = layer[v].max(layer[u] + 1);
            indegree[v] -= 1;
            if indegree[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    if done < n {
        return Err(indegree.iter().position(|&d| d > 0).expect("a node is left on the cycle"));
    }
    Ok(layer)
}

/// Scores nodes by topological layer of the rule graph:
/// `(max_layer - layer) / max_layer`, so sources score 1. Returned in
/// presentation order.
pub fn rank_partial_order(
    mut nodes: Vec<VisualizationNode>,
    rules: &PartialOrderRules,
) -> Result<Vec<VisualizationNode>, VizError> {
    let edges = rules.edges(&nodes);
    let layer = layers(nodes.len(), &edges).map_err(|i| {
        let n = &nodes[i];
        VizError::CycleDetected(format!("{}({}, {}, {})", n.chart_type.name(), n.x, n.y, n.aggregate.name()))
    })?;
    let max = layer.iter().copied().max().unwrap_or(0);
    for (node, l) in nodes.iter_mut().zip(layer) {
        node.score = if max == 0 { 1.0 } else { (max - l) as f64 / max as f64 };
    }
    nodes.sort_by(presentation_order);
    Ok(nodes)
}
