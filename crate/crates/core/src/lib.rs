//! Detection of personal data in tabular datasets.
//!
//! Two detectors classify each column as personal or non-personal:
//!
//! * [`rules`]: regex, checksum and word-list recognizers with two-threshold
//!   aggregation over column-wise or row-wise serialisations.
//! * [`llm`]: a context-rich prompt per column (dataset title, description,
//!   sibling feature names, most frequent values) sent to a chat model.
//!
//! [`eval`] scores either detector against ground-truth labels and renders
//! comparison tables.

pub mod corpus;
pub mod eval;
pub mod llm;
pub mod rules;
pub mod scan;
pub mod verdict;

pub use corpus::{AnnotationSet, Column, Dataset, ValueSample};
pub use eval::{ConfusionMatrix, MetricsReport};
pub use verdict::{ColumnVerdict, Evidence};
