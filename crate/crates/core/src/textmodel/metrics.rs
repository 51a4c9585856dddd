use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Task, TextModelError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub label: String,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub labels: Vec<String>,
    /// Rows are gold labels, columns predictions, both in label order.
    pub confusion: Vec<Vec<u64>>,
    pub n: u64,
    pub accuracy: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub per_label: Vec<LabelScores>,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Score `(gold, predicted)` pairs of a single-label task. Each pair counts
/// once, so micro-F1 equals accuracy.
pub fn evaluate<'a, I>(task: Task, pairs: I) -> Result<ClassificationReport, TextModelError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let labels = task.labels();
    let k = labels.len();
    let mut confusion = vec![vec![0u64; k]; k];
    let index = |l: &str| task.index_of(l).ok_or_else(|| TextModelError::UnknownLabel(l.to_string()));
    let mut n = 0u64;
    for (gold, pred) in pairs {
        confusion[index(gold)?][index(pred)?] += 1;
        n += 1;
    }
    if n == 0 {
        return Err(TextModelError::Empty("no prediction pairs to evaluate"));
    }
    let correct: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let per_label: Vec<LabelScores> = (0..k)
        .map(|i| {
            let tp = confusion[i][i];
            let support: u64 = confusion[i].iter().sum();
            let predicted: u64 = confusion.iter().map(|r| r[i]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
            LabelScores { label: labels[i].to_string(), support, precision, recall, f1 }
        })
        .collect();
    let present: Vec<&LabelScores> = per_label.iter().filter(|s| s.support > 0).collect();
    let macro_f1 = present.iter().map(|s| s.f1).sum::<f64>() / present.len() as f64;
    // micro precision and recall both reduce to correct / n
    let accuracy = ratio(correct, n);
    Ok(ClassificationReport {
        labels: labels.iter().map(|s| s.to_string()).collect(),
        confusion,
        n,
        accuracy,
        micro_f1: accuracy,
        macro_f1,
        per_label,
    })
}

/// Score predictions against gold labels keyed by post id; the id sets must
/// match exactly.
pub fn evaluate_keyed(
    task: Task,
    predictions: &BTreeMap<String, String>,
    gold: &BTreeMap<String, String>,
) -> Result<ClassificationReport, TextModelError> {
    if let Some(id) = gold.keys().find(|k| !predictions.contains_key(*k)) {
        return Err(TextModelError::Misaligned(format!("no prediction for {id:?}")));
    }
    if let Some(id) = predictions.keys().find(|k| !gold.contains_key(*k)) {
        return Err(TextModelError::Misaligned(format!("no gold label for {id:?}")));
    }
    evaluate(task, gold.iter().map(|(id, g)| (g.as_str(), predictions[id].as_str())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_and_scores() {
        let pairs = [
            ("Hopeful", "Hopeful"),
            ("Hopeful", "Neutral"),
            ("Neutral", "Neutral"),
            ("Anxious", "Neutral"),
        ];
        let r = evaluate(Task::Emotion, pairs).unwrap();
        assert_eq!(r.confusion[0][0], 1);
        assert_eq!(r.confusion[0][2], 1);
        assert_eq!(r.confusion[4][2], 1);
        assert_eq!(r.micro_f1, 0.5);
        let neutral = &r.per_label[2];
        assert_eq!(neutral.precision, 1.0 / 3.0);
        assert_eq!(neutral.recall, 1.0);
        assert_eq!(r.per_label[0].f1, 2.0 / 3.0);
    }

    #[test]
    fn eight_of_ten() {
        let gold: BTreeMap<String, String> =
            (0..10).map(|i| (format!("p{i}"), "Neutral".to_string())).collect();
        let mut pred = gold.clone();
        pred.insert("p0".into(), "Anxious".into());
        pred.insert("p1".into(), "Hopeful".into());
        assert_eq!(evaluate_keyed(Task::Emotion, &pred, &gold).unwrap().micro_f1, 0.8);
        assert_eq!(evaluate_keyed(Task::Emotion, &gold, &gold).unwrap().micro_f1, 1.0);
        pred.remove("p3");
        assert!(matches!(evaluate_keyed(Task::Emotion, &pred, &gold), Err(TextModelError::Misaligned(_))));
    }

    #[test]
    fn rejects_unknown_and_empty() {
        assert!(matches!(evaluate(Task::Info, [("Gossip", "LifeRecording")]), Err(TextModelError::UnknownLabel(_))));
        assert!(evaluate(Task::Info, std::iter::empty()).is_err());
    }
}
