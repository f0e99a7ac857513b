use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::TernaryLabel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Indexed Negative, Neutral, Positive.
    pub per_class: [ClassScores; 3],
    pub macro_f1: f64,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision/recall/F1 and their unweighted mean F1.
///
/// A class absent from both predictions and gold has F1 0 and still counts
/// in the mean. Undefined precision or recall is taken as 0.
pub fn classification_report(
    predictions: &[TernaryLabel],
    gold: &[TernaryLabel],
) -> Result<ClassificationReport> {
    if predictions.len() != gold.len() {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::InsufficientData("macro F1 of an empty set".into()));
    }
    let mut confusion = [[0usize; 3]; 3];
    for (p, g) in predictions.iter().zip(gold) {
        confusion[g.index()][p.index()] += 1;
    }
    let mut per_class = [ClassScores::default(); 3];
    for c in 0..3 {
        let tp = confusion[c][c];
        let predicted: usize = (0..3).map(|g| confusion[g][c]).sum();
        let actual: usize = confusion[c].iter().sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, actual);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class[c] = ClassScores {
            precision,
            recall,
            f1,
        };
    }
    let correct: usize = (0..3).map(|c| confusion[c][c]).sum();
    Ok(ClassificationReport {
        macro_f1: per_class.iter().map(|s| s.f1).sum::<f64>() / 3.0,
        accuracy: ratio(correct, gold.len()),
        per_class,
    })
}

pub fn macro_f1(predictions: &[TernaryLabel], gold: &[TernaryLabel]) -> Result<f64> {
    classification_report(predictions, gold).map(|r| r.macro_f1)
}

/// Most frequent gold label, ties going to the lower class.
pub fn majority_label(gold: &[TernaryLabel]) -> Option<TernaryLabel> {
    if gold.is_empty() {
        return None;
    }
    let mut counts = [0usize; 3];
    for g in gold {
        counts[g.index()] += 1;
    }
    let mut best = 0;
    for c in 1..3 {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    TernaryLabel::from_index(best)
}

/// Macro F1 of always predicting the majority label.
pub fn majority_baseline_f1(gold: &[TernaryLabel]) -> Result<f64> {
    let label = majority_label(gold)
        .ok_or_else(|| Error::InsufficientData("majority baseline of an empty set".into()))?;
    macro_f1(&vec![label; gold.len()], gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TernaryLabel::*;

    #[test]
    fn perfect_predictions() {
        let g = [Negative, Neutral, Positive, Positive];
        assert_eq!(macro_f1(&g, &g).unwrap(), 1.0);
    }

    #[test]
    fn all_neutral_on_balanced_gold() {
        // neutral: precision 1/3, recall 1 -> F1 0.5; others 0.
        let gold = [Negative, Neutral, Positive, Negative, Neutral, Positive];
        let pred = [Neutral; 6];
        let f1 = macro_f1(&pred, &gold).unwrap();
        assert!((f1 - 0.5 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn absent_class_contributes_zero() {
        let gold = [Negative, Positive];
        assert!((macro_f1(&gold, &gold).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(macro_f1(&[], &[]).is_err());
        assert!(macro_f1(&[Neutral], &[]).is_err());
    }

    #[test]
    fn majority_baseline_value() {
        // 3 neutral of 5: neutral F1 = 2 * 0.6 / 1.6 = 0.75 -> macro 0.25
        let gold = [Neutral, Neutral, Neutral, Positive, Negative];
        assert!((majority_baseline_f1(&gold).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(majority_label(&[Positive, Negative]), Some(Negative));
    }
}
