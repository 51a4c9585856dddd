use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RefineError;
use crate::cluster::ClusterModel;
use crate::stats::cohens_kappa;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecall {
    pub cluster: usize,
    pub theme: String,
    pub n: usize,
    pub matches: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringEvaluation {
    pub clusters: Vec<ClusterRecall>,
    /// Unweighted mean over clusters with at least one gold label.
    pub average_recall: f64,
    /// Agreement of two coders' correct/incorrect judgments, when a second
    /// coder is given and kappa is defined.
    pub kappa: Option<f64>,
}

/// Share of gold-labeled images whose gold theme equals their cluster's
/// theme. `second` holds an independent coder's themes for the same images.
pub fn evaluate_clustering(
    model: &ClusterModel,
    gold: &BTreeMap<String, String>,
    second: Option<&BTreeMap<String, String>>,
) -> Result<ClusteringEvaluation, RefineError> {
    if gold.is_empty() {
        return Err(RefineError::Evaluation("no gold labels".into()));
    }
    let assigned = model.assignment_map();
    let mut tally = vec![(0usize, 0usize); model.k()];
    let mut correct = BTreeMap::new();
    for (id, theme) in gold {
        let &j = assigned
            .get(id.as_str())
            .ok_or_else(|| RefineError::Evaluation(format!("gold image {id:?} is not clustered")))?;
        let ok = *theme == model.theme_name(j);
        tally[j].0 += 1;
        tally[j].1 += ok as usize;
        correct.insert(id.as_str(), (j, ok));
    }
    let clusters: Vec<ClusterRecall> = tally
        .iter()
        .enumerate()
        .filter(|(_, t)| t.0 > 0)
        .map(|(j, &(n, matches))| ClusterRecall {
            cluster: j,
            theme: model.theme_name(j),
            n,
            matches,
            recall: matches as f64 / n as f64,
        })
        .collect();
    let average_recall = clusters.iter().map(|c| c.recall).sum::<f64>() / clusters.len() as f64;

    let kappa = second.and_then(|second| {
        let (a, b): (Vec<bool>, Vec<bool>) = second
            .iter()
            .filter_map(|(id, theme)| {
                let &(j, ok) = correct.get(id.as_str())?;
                Some((ok, *theme == model.theme_name(j)))
            })
            .unzip();
        cohens_kappa::<f64, bool>(&a, &b).ok().map(|k| k.kappa)
    });
    Ok(ClusteringEvaluation { clusters, average_recall, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingMatrix;

    fn model() -> ClusterModel {
        let rows = (0..100).map(|i| (format!("i{i:03}"), vec![(i / 25) as f64 * 10.0])).collect();
        let m: EmbeddingMatrix<f64> = EmbeddingMatrix::from_rows(rows, 1, "t").unwrap();
        let labels = (0..100).map(|i| i / 25).collect();
        let mut model = ClusterModel::from_labels(&m, labels, 4, 0).unwrap();
        model.themes = ["Posters", "People", "Food", "TextImages"].iter().map(|t| Some(t.to_string())).collect();
        model
    }

    #[test]
    fn eighty_of_hundred_even() {
        let model = model();
        let gold: BTreeMap<String, String> = (0..100)
            .map(|i| {
                let theme = if i % 25 < 20 { model.theme_name(i / 25) } else { "OutdoorScenes".into() };
                (format!("i{i:03}"), theme)
            })
            .collect();
        let ev = evaluate_clustering(&model, &gold, None).unwrap();
        assert_eq!(ev.average_recall, 0.8);
        assert!(ev.clusters.iter().all(|c| c.recall == 0.8 && c.n == 25));
        assert_eq!(ev.kappa, None);
    }

    #[test]
    fn identical_second_coder_has_unit_kappa() {
        let model = model();
        let gold: BTreeMap<String, String> = (0..100)
            .map(|i| (format!("i{i:03}"), if i % 3 == 0 { "Food".to_string() } else { model.theme_name(i / 25) }))
            .collect();
        let ev = evaluate_clustering(&model, &gold, Some(&gold)).unwrap();
        assert_eq!(ev.kappa, Some(1.0));
    }

    #[test]
    fn errors() {
        let model = model();
        assert!(evaluate_clustering(&model, &BTreeMap::new(), None).is_err());
        let gold = BTreeMap::from([("nope".to_string(), "Food".to_string())]);
        assert!(evaluate_clustering(&model, &gold, None).is_err());
    }
}
