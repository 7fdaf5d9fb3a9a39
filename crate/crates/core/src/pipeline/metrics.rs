use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::N_CLASSES;

/// Per-class precision and recall. A ratio whose denominator is zero is
/// reported as 0 with its `*_defined` flag cleared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub precision: f64,
    pub precision_defined: bool,
    pub recall: f64,
    pub recall_defined: bool,
    /// True-class sample count.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub samples: u64,
    /// `confusion[true][predicted]`.
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
    /// Rows divided by their true-class totals; empty rows stay zero.
    pub normalized: [[f64; N_CLASSES]; N_CLASSES],
    pub per_class: Vec<ClassStats>,
}

impl Metrics {
    pub fn from_confusion(confusion: [[u64; N_CLASSES]; N_CLASSES]) -> Result<Self> {
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::Argument("confusion matrix holds no samples".into()));
        }
        let trace: u64 = (0..N_CLASSES).map(|k| confusion[k][k]).sum();
        let mut normalized = [[0.0; N_CLASSES]; N_CLASSES];
        let mut per_class = Vec::with_capacity(N_CLASSES);
        for k in 0..N_CLASSES {
            let row: u64 = confusion[k].iter().sum();
            let col: u64 = (0..N_CLASSES).map(|t| confusion[t][k]).sum();
            if row > 0 {
                for p in 0..N_CLASSES {
                    normalized[k][p] = confusion[k][p] as f64 / row as f64;
                }
            }
            let ratio = |num: u64, den: u64| if den > 0 { (num as f64 / den as f64, true) } else { (0.0, false) };
            let (precision, precision_defined) = ratio(confusion[k][k], col);
            let (recall, recall_defined) = ratio(confusion[k][k], row);
            per_class.push(ClassStats {
                precision,
                precision_defined,
                recall,
                recall_defined,
                support: row,
            });
        }
        Ok(Metrics {
            accuracy: trace as f64 / total as f64,
            samples: total,
            confusion,
            normalized,
            per_class,
        })
    }
}

/// Confusion counts, accuracy and per-class statistics for paired labels.
pub fn evaluate(predicted: &[u8], truth: &[u8]) -> Result<Metrics> {
    if predicted.len() != truth.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} reference labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Argument("nothing to evaluate".into()));
    }
    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    for (&p, &t) in predicted.iter().zip(truth) {
        if p as usize >= N_CLASSES || t as usize >= N_CLASSES {
            return Err(Error::Argument(format!(
                "pair ({p}, {t}) contains a non-trainable class"
            )));
        }
        confusion[t as usize][p as usize] += 1;
    }
    Metrics::from_confusion(confusion)
}

/// Unweighted mean, `None` for an empty list.
pub fn average_accuracy(accuracies: &[f64]) -> Option<f64> {
    if accuracies.is_empty() {
        None
    } else {
        Some(accuracies.iter().sum::<f64>() / accuracies.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_two_class() {
        let m = evaluate(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.normalized[0][0], 1.0);
        assert_eq!(m.normalized[1][1], 1.0);
        assert_eq!(m.normalized[0][1], 0.0);
        assert!(!m.per_class[5].recall_defined);
        assert_eq!(m.per_class[5].recall, 0.0);
    }

    #[test]
    fn all_wrong_binary() {
        let m = evaluate(&[1, 0, 0], &[0, 1, 1]).unwrap();
        assert_eq!(m.accuracy, 0.0);
        assert_eq!(m.confusion[1][0], 2);
    }

    #[test]
    fn scene_average() {
        assert_eq!(average_accuracy(&[0.90, 0.875]).unwrap(), 0.8875);
        assert_eq!(average_accuracy(&[]), None);
    }

    #[test]
    fn errors() {
        assert!(evaluate(&[0], &[0, 1]).is_err());
        assert!(evaluate(&[], &[]).is_err());
        assert!(evaluate(&[255], &[0]).is_err());
    }

    proptest! {
        #[test]
        fn accuracy_is_support_weighted_recall(
            pairs in proptest::collection::vec((0u8..8, 0u8..8), 1..200)
        ) {
            let (p, t): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            let m = evaluate(&p, &t).unwrap();
            let n = m.samples as f64;
            let weighted: f64 = m.per_class.iter().map(|c| c.recall * c.support as f64 / n).sum();
            prop_assert!((weighted - m.accuracy).abs() < 1e-12);
            for k in 0..N_CLASSES {
                if m.per_class[k].support > 0 {
                    prop_assert!((m.normalized[k].iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
