//! Binary evaluation of detector verdicts against ground truth.
//!
//! Personal is the positive class. A class F1 with a zero denominator is 0.

pub mod dessi;
pub mod predictions;
pub mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::AnnotationSet;

pub use dessi::{map_dessi, DessiClass};
pub use predictions::{PredictionRecord, Predictions};
pub use report::{render_report, ReportFormat};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no label for predicted column {0:?}")]
    MissingLabel(String),
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("ground truth contains only one class")]
    SingleClassTruth,
    #[error("unknown DeSSI class {0:?}")]
    UnknownClass(String),
    #[error("malformed input {path}: {message}")]
    MalformedInput { path: String, message: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    /// Same matrix with non-personal treated as the positive class.
    pub fn swapped(&self) -> Self {
        Self::new(self.tn, self.fn_, self.fp, self.tp)
    }

    pub fn personal(&self) -> ClassMetrics {
        ClassMetrics::from_counts(self.tp, self.fp, self.fn_)
    }

    pub fn non_personal(&self) -> ClassMetrics {
        ClassMetrics::from_counts(self.tn, self.fn_, self.fp)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else if precision == recall {
        precision
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

impl ClassMetrics {
    fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Self {
            precision,
            recall,
            f1: f1(precision, recall),
            support: tp + fn_,
        }
    }
}

/// Counts predictions against labels, positive class = personal.
pub fn confusion<'a>(
    preds: impl IntoIterator<Item = (&'a str, bool)>,
    truth: &AnnotationSet,
) -> Result<ConfusionMatrix, EvalError> {
    let mut cm = ConfusionMatrix::default();
    for (column, predicted) in preds {
        let actual = truth
            .get(column)
            .ok_or_else(|| EvalError::MissingLabel(column.to_string()))?;
        cm.record(predicted, actual);
    }
    Ok(cm)
}

/// Unweighted mean of the personal and non-personal F1 scores.
pub fn macro_f1(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    Ok((cm.personal().f1 + cm.non_personal().f1) / 2.0)
}

/// F1 over counts pooled across both classes. Every error is a false positive
/// for one class and a false negative for the other, so pooled precision and
/// recall coincide and equal accuracy.
pub fn micro_f1(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let n = cm.total();
    if n == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    let tp = cm.tp + cm.tn;
    let fp = cm.fp + cm.fn_;
    let fn_ = cm.fn_ + cm.fp;
    let score = f1(ratio(tp, tp + fp), ratio(tp, tp + fn_));
    debug_assert_eq!(score, ratio(cm.tp + cm.tn, n));
    Ok(score)
}

/// Mean of per-class recall.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    if cm.tp + cm.fn_ == 0 || cm.tn + cm.fp == 0 {
        return Err(EvalError::SingleClassTruth);
    }
    Ok((cm.personal().recall + cm.non_personal().recall) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub detector_id: String,
    pub dataset_id: String,
    pub n_columns: u64,
    pub macro_f1: f64,
    pub micro_f1: f64,
    /// Undefined (null) when the ground truth has a single class.
    pub balanced_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub personal: Option<ClassMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub non_personal: Option<ClassMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
    /// Columns left out because the detector failed on them.
    #[serde(default)]
    pub errors: u64,
    /// Effective run configuration, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<serde_json::Value>,
}

impl MetricsReport {
    pub fn from_confusion(
        detector_id: impl Into<String>,
        dataset_id: impl Into<String>,
        cm: ConfusionMatrix,
    ) -> Result<Self, EvalError> {
        Ok(Self {
            detector_id: detector_id.into(),
            dataset_id: dataset_id.into(),
            n_columns: cm.total(),
            macro_f1: macro_f1(&cm)?,
            micro_f1: micro_f1(&cm)?,
            balanced_accuracy: balanced_accuracy(&cm).ok(),
            personal: Some(cm.personal()),
            non_personal: Some(cm.non_personal()),
            confusion: Some(cm),
            errors: 0,
            run: None,
        })
    }

    /// A report holding only the three headline numbers.
    pub fn headline(
        detector_id: impl Into<String>,
        dataset_id: impl Into<String>,
        macro_f1: f64,
        micro_f1: f64,
        balanced_accuracy: f64,
    ) -> Self {
        Self {
            detector_id: detector_id.into(),
            dataset_id: dataset_id.into(),
            n_columns: 0,
            macro_f1,
            micro_f1,
            balanced_accuracy: Some(balanced_accuracy),
            personal: None,
            non_personal: None,
            confusion: None,
            errors: 0,
            run: None,
        }
    }
}
