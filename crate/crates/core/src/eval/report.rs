//! Cross-detector, cross-dataset comparison grid.
//!
//! Datasets become blocks of three metric rows, detectors become columns.
//! With more than one dataset an Average block follows, holding the
//! unweighted mean of the per-dataset values. Numbers are rounded half-up to
//! three decimals.

use serde::Serialize;

use super::MetricsReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

const METRICS: [(&str, &str); 3] = [
    ("macro_f1", "Macro F1"),
    ("micro_f1", "Micro F1"),
    ("balanced_accuracy", "Balanced Acc."),
];

fn metric(r: &MetricsReport, key: &str) -> Option<f64> {
    match key {
        "macro_f1" => Some(r.macro_f1),
        "micro_f1" => Some(r.micro_f1),
        "balanced_accuracy" => r.balanced_accuracy,
        _ => None,
    }
}

/// Half-up rounding to three decimals. The small nudge keeps decimal ties
/// such as 0.6425 from rounding down through binary representation error.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0 + 0.5 + 1e-7).floor() / 1000.0
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricRow {
    pub metric: &'static str,
    /// One value per detector, in [`Grid::detectors`] order.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetBlock {
    pub dataset: String,
    pub rows: Vec<MetricRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    pub detectors: Vec<String>,
    pub datasets: Vec<DatasetBlock>,
    pub average: Option<Vec<MetricRow>>,
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_string());
    }
}

/// Arranges reports by dataset and detector, in first-seen order. A later
/// report for the same (dataset, detector) pair replaces an earlier one.
pub fn build_grid(reports: &[MetricsReport]) -> Grid {
    let mut detectors = Vec::new();
    let mut datasets = Vec::new();
    for r in reports {
        push_unique(&mut detectors, &r.detector_id);
        push_unique(&mut datasets, &r.dataset_id);
    }
    let lookup = |ds: &str, det: &str| {
        reports
            .iter()
            .rev()
            .find(|r| r.dataset_id == ds && r.detector_id == det)
    };
    let blocks: Vec<DatasetBlock> = datasets
        .iter()
        .map(|ds| DatasetBlock {
            dataset: ds.clone(),
            rows: METRICS
                .iter()
                .map(|(key, label)| MetricRow {
                    metric: label,
                    values: detectors
                        .iter()
                        .map(|det| lookup(ds, det).and_then(|r| metric(r, key)).map(round3))
                        .collect(),
                })
                .collect(),
        })
        .collect();

    let average = (datasets.len() > 1).then(|| {
        METRICS
            .iter()
            .map(|(key, label)| MetricRow {
                metric: label,
                values: detectors
                    .iter()
                    .map(|det| {
                        let vals: Vec<f64> = datasets
                            .iter()
                            .filter_map(|ds| lookup(ds, det).and_then(|r| metric(r, key)))
                            .collect();
                        (!vals.is_empty())
                            .then(|| round3(vals.iter().sum::<f64>() / vals.len() as f64))
                    })
                    .collect(),
            })
            .collect()
    });

    Grid {
        detectors,
        datasets: blocks,
        average,
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

fn markdown(grid: &Grid) -> String {
    let mut out = String::new();
    out.push_str("| Dataset | Metric |");
    for d in &grid.detectors {
        out.push_str(&format!(" {d} |"));
    }
    out.push_str("\n| --- | --- |");
    for _ in &grid.detectors {
        out.push_str(" ---: |");
    }
    out.push('\n');
    let mut block = |name: &str, rows: &[MetricRow]| {
        for (i, row) in rows.iter().enumerate() {
            let label = if i == 0 { name } else { "" };
            out.push_str(&format!("| {label} | {} |", row.metric));
            for v in &row.values {
                out.push_str(&format!(" {} |", cell(*v)));
            }
            out.push('\n');
        }
    };
    for b in &grid.datasets {
        block(&b.dataset, &b.rows);
    }
    if let Some(avg) = &grid.average {
        block("**Average**", avg);
    }
    out
}

pub fn render_report(reports: &[MetricsReport], format: ReportFormat) -> String {
    let grid = build_grid(reports);
    match format {
        ReportFormat::Markdown => markdown(&grid),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&grid).expect("grid serializes");
            s.push('\n');
            s
        }
    }
}
