use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize_scores, FeatureVector, VisualizationNode, VizError};

const BUILTIN_PAIRS: &str = include_str!("../../data/viz_training_pairs.json");
const MAX_EPOCHS: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub better: FeatureVector,
    pub worse: FeatureVector,
}

/// Linear scorer over [`FeatureVector::to_vec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingModel {
    pub weights: Vec<f64>,
    pub pairs_seen: usize,
}

impl Default for RankingModel {
    fn default() -> Self {
        RankingModel { weights: vec![0.0; FeatureVector::LEN], pairs_seen: 0 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RankingModel {
    /// Trained on the bundled toy pairs.
    pub fn builtin() -> Self {
        let pairs = Self::pairs_from_json(BUILTIN_PAIRS).expect("bundled pairs parse");
        train_pairwise(&pairs).expect("bundled pairs are valid")
    }

    pub fn pairs_from_json(text: &str) -> Result<Vec<TrainingPair>, VizError> {
        serde_json::from_str(text).map_err(|e| VizError::Config(e.to_string()))
    }

    pub fn pairs_from_file(path: &Path) -> Result<Vec<TrainingPair>, VizError> {
        let text = std::fs::read_to_string(path).map_err(|e| VizError::Config(e.to_string()))?;
        Self::pairs_from_json(&text)
    }

    pub fn score(&self, f: &FeatureVector) -> f64 {
        dot(&self.weights, &f.to_vec())
    }

    /// Whether `a` strictly outranks `b`.
    pub fn better(&self, a: &FeatureVector, b: &FeatureVector) -> bool {
        self.score(a) > self.score(b)
    }

    /// Scores nodes with the model, then rescales to [0, 1].
    pub fn score_nodes(&self, mut nodes: Vec<VisualizationNode>) -> Vec<VisualizationNode> {
        for n in &mut nodes {
            n.score = self.score(&n.features);
        }
        normalize_scores(&mut nodes);
        nodes
    }
}

/// Perceptron on feature differences: every misordered pair pushes the
/// weights toward `better - worse` until a full pass makes no mistakes.
/// Separable pair sets therefore end up ordered correctly.
pub fn train_pairwise(pairs: &[TrainingPair]) -> Result<RankingModel, VizError> {
    if pairs.is_empty() {
        return Err(VizError::Config("no training pairs".into()));
    }
    let diffs: Vec<Vec<f64>> = pairs
        .iter()
        .map(|p| p.better.to_vec().iter().zip(p.worse.to_vec()).map(|(a, b)| a - b).collect())
        .collect();
    if let Some(i) = diffs.iter().position(|d: &Vec<f64>| d.iter().all(|x| *x == 0.0)) {
        return Err(VizError::DegenerateInput(i));
    }
    let mut model = RankingModel { weights: vec![0.0; FeatureVector::LEN], pairs_seen: pairs.len() };
    for _ in 0..MAX_EPOCHS {
        let mut mistakes = 0;
        for d in &diffs {
            if dot(&model.weights, d) <= 0.0 {
                for (w, x) in model.weights.iter_mut().zip(d) {
                    *w += x;
                }
                mistakes += 1;
            }
        }
        if mistakes == 0 {
            break;
        }
    }
    Ok(model)
}
