//! The `<run>.preds.json` file: one record per scanned column, in column order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{confusion, ConfusionMatrix, EvalError};
use crate::corpus::AnnotationSet;
use crate::verdict::{ColumnVerdict, Evidence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub column: String,
    /// Absent when the detector failed on this column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub personal: Option<bool>,
    pub detector: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    pub fn from_verdict(v: &ColumnVerdict, detector: &str) -> Self {
        Self {
            column: v.column.clone(),
            personal: Some(v.personal),
            detector: detector.to_string(),
            evidence: Some(v.evidence.clone()),
            error: None,
        }
    }

    pub fn failed(column: &str, detector: &str, error: impl ToString) -> Self {
        Self {
            column: column.to_string(),
            personal: None,
            detector: detector.to_string(),
            evidence: None,
            error: Some(error.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Predictions(pub Vec<PredictionRecord>);

impl Predictions {
    pub fn read(path: &Path) -> Result<Self, EvalError> {
        let malformed = |message: String| EvalError::MalformedInput {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| malformed(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))
    }

    /// Pretty JSON with a trailing newline; identical input gives identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("predictions serialize");
        s.push('\n');
        s
    }

    pub fn error_count(&self) -> usize {
        self.0.iter().filter(|r| r.personal.is_none()).count()
    }

    /// Detector name shared by the records, if they agree.
    pub fn detector(&self) -> Option<&str> {
        let first = self.0.first()?.detector.as_str();
        self.0.iter().all(|r| r.detector == first).then_some(first)
    }

    /// Confusion over successfully predicted columns; failed ones are skipped.
    pub fn confusion(&self, truth: &AnnotationSet) -> Result<ConfusionMatrix, EvalError> {
        confusion(
            self.0
                .iter()
                .filter_map(|r| r.personal.map(|p| (r.column.as_str(), p))),
            truth,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn record_json_shape() {
        let v = ColumnVerdict {
            column: "ID".into(),
            position: 0,
            personal: true,
            evidence: Evidence::Reply("{'ID': true}".into()),
        };
        let preds = Predictions(vec![
            PredictionRecord::from_verdict(&v, "llm"),
            PredictionRecord::failed("Age", "llm", "boom"),
        ]);
        let json: serde_json::Value = serde_json::from_str(&preds.to_json()).unwrap();
        assert_eq!(json[0]["personal"], true);
        assert_eq!(json[0]["evidence"]["reply"], "{'ID': true}");
        assert!(json[1].get("personal").is_none());
        assert_eq!(json[1]["error"], "boom");
        assert_eq!(preds.error_count(), 1);
        assert_eq!(preds.detector(), Some("llm"));
    }

    #[test]
    fn errors_excluded_from_confusion() {
        let preds = Predictions(vec![
            PredictionRecord::from_verdict(
                &ColumnVerdict {
                    column: "a".into(),
                    position: 0,
                    personal: true,
                    evidence: Evidence::Entities(BTreeMap::new()),
                },
                "rules",
            ),
            PredictionRecord::failed("b", "rules", "x"),
        ]);
        let truth: AnnotationSet = [("a".to_string(), true)].into_iter().collect();
        assert_eq!(preds.confusion(&truth).unwrap(), ConfusionMatrix::new(1, 0, 0, 0));
    }
}
