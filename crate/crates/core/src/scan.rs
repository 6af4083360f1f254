//! Runs a detector over every column of a dataset with a bounded worker pool.
//! Results come back in column order whatever order the workers finish in.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::corpus::Dataset;
use crate::eval::{PredictionRecord, Predictions};
use crate::llm::LlmClassifier;
use crate::rules::{EntityHit, RuleEngine, ScanStrategy};
use crate::verdict::ColumnVerdict;

pub enum Detector {
    Rules(RuleEngine),
    Llm(LlmClassifier),
}

impl Detector {
    pub fn id(&self) -> &'static str {
        match self {
            Detector::Rules(_) => "rules",
            Detector::Llm(_) => "llm",
        }
    }
}

/// Outcome for one column, in dataset order.
pub type ColumnOutcome = Result<ColumnVerdict, String>;

/// Applies `f` to `0..n` on up to `workers` threads; output is indexed by input.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = workers.clamp(1, n.max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let out = f(i);
                *slots[i].lock().unwrap() = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every slot filled"))
        .collect()
}

pub fn scan_dataset(ds: &Dataset, detector: &Detector, workers: usize) -> Vec<ColumnOutcome> {
    match detector {
        Detector::Llm(clf) => parallel_map(ds.columns.len(), workers, |i| {
            clf.classify_column(ds, &ds.columns[i]).map_err(|e| e.to_string())
        }),
        Detector::Rules(engine) => match engine.policy().strategy {
            ScanStrategy::Columnwise => parallel_map(ds.columns.len(), workers, |i| {
                engine.classify_column(&ds.columns[i]).map_err(|e| e.to_string())
            }),
            ScanStrategy::Rowwise => {
                let per_row = parallel_map(ds.row_count(), workers, |row| engine.rowwise_hits(ds, row));
                let mut per_column: Vec<Vec<EntityHit>> = vec![Vec::new(); ds.columns.len()];
                for row in per_row {
                    match row {
                        Ok(hits) => {
                            for (ci, h) in hits {
                                per_column[ci].push(h);
                            }
                        }
                        Err(e) => return ds.columns.iter().map(|_| Err(e.to_string())).collect(),
                    }
                }
                engine
                    .verdicts_from_hits(ds, &per_column)
                    .into_iter()
                    .map(Ok)
                    .collect()
            }
        },
    }
}

pub fn to_predictions(ds: &Dataset, outcomes: &[ColumnOutcome], detector_id: &str) -> Predictions {
    Predictions(
        ds.columns
            .iter()
            .zip(outcomes)
            .map(|(col, o)| match o {
                Ok(v) => PredictionRecord::from_verdict(v, detector_id),
                Err(e) => PredictionRecord::failed(&col.name, detector_id, e),
            })
            .collect(),
    )
}
