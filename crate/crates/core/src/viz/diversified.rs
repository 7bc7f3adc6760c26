use std::cmp::Ordering;

use super::{presentation_order, VisualizationNode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversifiedConfig {
    pub k: usize,
    /// 1 ranks by relevance only, 0 by diversity only.
    pub lambda: f64,
}

impl Default for DiversifiedConfig {
    fn default() -> Self {
        DiversifiedConfig { k: 3, lambda: 0.5 }
    }
}

/// Jaccard distance between the {chart, x, y, aggregate} descriptors.
pub fn jaccard_distance(a: &VisualizationNode, b: &VisualizationNode) -> f64 {
    let (da, db) = (a.descriptor(), b.descriptor());
    let inter = da.intersection(&db).count();
    let union = da.union(&db).count();
    if union == 0 {
        0.0
    } else {
        1.0 - inter as f64 / union as f64
    }
}

/// Greedy max-marginal selection of `min(k, n)` nodes.
///
/// The first pick is the most relevant node; every later pick maximizes
/// `lambda * score + (1 - lambda) * distance to the nearest pick`. Scores are
/// used as given. Ties fall back to the presentation order.
pub fn rank_diversified(nodes: &[VisualizationNode], config: &DiversifiedConfig) -> Vec<VisualizationNode> {
    let mut pool: Vec<&VisualizationNode> = nodes.iter().collect();
    pool.sort_by(|a, b| presentation_order(a, b));
    let mut picked: Vec<&VisualizationNode> = Vec::new();
    while picked.len() < config.k && !pool.is_empty() {
        let objective = |n: &VisualizationNode| {
            if picked.is_empty() {
                return n.score;
            }
            let nearest = picked.iter().map(|p| jaccard_distance(n, p)).fold(f64::INFINITY, f64::min);
            config.lambda * n.score + (1.0 - config.lambda) * nearest
        };
        // Pool is in presentation order, so the first maximum wins ties.
        let mut best = 0;
        let mut best_value = objective(pool[0]);
        for (i, n) in pool.iter().enumerate().skip(1) {
            let value = objective(n);
            if value.total_cmp(&best_value) == Ordering::Greater {
                best = i;
                best_value = value;
            }
        }
        picked.push(pool.remove(best));
    }
    picked.into_iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::viz::{Aggregate, AxisKind, ChartType, FeatureVector, YAxis};

    fn node(chart: ChartType, x: &str, y: &str, score: f64) -> VisualizationNode {
        VisualizationNode {
            chart_type: chart,
            x: x.into(),
            y: YAxis::Column(y.into()),
            aggregate: Aggregate::Sum,
            bins: None,
            features: FeatureVector {
                chart_type: chart,
                aggregate: Aggregate::Sum,
                x_kind: AxisKind::Categorical,
                y_kind: AxisKind::Numeric,
                distinct_ratio_x: 0.5,
                correlation_xy: None,
                group_count: 4,
                null_ratio: 0.0,
                row_count: 8,
            },
            score,
        }
    }

    fn picks(nodes: &[VisualizationNode], k: usize, lambda: f64) -> Vec<(ChartType, String)> {
        rank_diversified(nodes, &DiversifiedConfig { k, lambda })
            .into_iter()
            .map(|n| (n.chart_type, n.x))
            .collect()
    }

    #[test]
    fn diversity_beats_near_duplicate() {
        let nodes = [
            node(ChartType::Bar, "region", "revenue", 0.9),
            node(ChartType::Pie, "region", "revenue", 0.85),
            node(ChartType::Line, "month", "revenue", 0.8),
        ];
        assert_eq!(
            picks(&nodes, 2, 0.5),
            [(ChartType::Bar, "region".to_string()), (ChartType::Line, "month".to_string())]
        );
        assert_eq!(picks(&nodes, 1, 0.5), [(ChartType::Bar, "region".to_string())]);
        // Pure relevance.
        assert_eq!(
            picks(&nodes, 2, 1.0),
            [(ChartType::Bar, "region".to_string()), (ChartType::Pie, "region".to_string())]
        );
    }

    #[test]
    fn identical_nodes_pick_deterministically() {
        let nodes = [
            node(ChartType::Pie, "a", "v", 0.5),
            node(ChartType::Bar, "b", "v", 0.5),
            node(ChartType::Bar, "a", "v", 0.5),
        ];
        let once = picks(&nodes, 5, 0.5);
        assert_eq!(once.len(), 3);
        assert_eq!(once[0], (ChartType::Bar, "a".to_string()));
        assert_eq!(once, picks(&nodes, 5, 0.5));
    }

    #[test]
    fn distance_bounds() {
        let a = node(ChartType::Bar, "region", "revenue", 0.0);
        let b = node(ChartType::Pie, "region", "revenue", 0.0);
        assert_eq!(jaccard_distance(&a, &a), 0.0);
        assert!((jaccard_distance(&a, &b) - 0.4).abs() < 1e-12);
    }
}
