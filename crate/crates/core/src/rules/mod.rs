//! Deterministic entity recognition over serialised columns or rows.
//!
//! Hits are filtered by two thresholds (minimum confidence, minimum count per
//! entity kind) and the surviving kinds are mapped to personal/non-personal.

pub mod checksum;
pub mod recognizers;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Column, Dataset};
use crate::verdict::{ColumnVerdict, Evidence};

pub use checksum::{iban_valid, luhn_valid, ChecksumError};
pub use recognizers::{Lexicon, RecognizerSet};

#[derive(Debug, Error)]
pub enum RulesError {
    #[error("column {0:?} has no non-empty values")]
    EmptyColumn(String),
    #[error("row {row} out of range (dataset has {rows} rows)")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("unknown entity kind {0:?}")]
    UnknownEntity(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("cannot read word list {path}: {source}")]
    WordList {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityKind {
    CreditCard,
    Crypto,
    EmailAddress,
    IbanCode,
    Nrp,
    Person,
    PhoneNumber,
    UsSsn,
    UsBankNumber,
    UsDriverLicense,
    UsItin,
    UsPassport,
    DateTime,
    IpAddress,
    Location,
    Url,
    AuAbn,
    AuAcn,
}

impl EntityKind {
    pub const ALL: [EntityKind; 18] = [
        EntityKind::CreditCard,
        EntityKind::Crypto,
        EntityKind::EmailAddress,
        EntityKind::IbanCode,
        EntityKind::Nrp,
        EntityKind::Person,
        EntityKind::PhoneNumber,
        EntityKind::UsSsn,
        EntityKind::UsBankNumber,
        EntityKind::UsDriverLicense,
        EntityKind::UsItin,
        EntityKind::UsPassport,
        EntityKind::DateTime,
        EntityKind::IpAddress,
        EntityKind::Location,
        EntityKind::Url,
        EntityKind::AuAbn,
        EntityKind::AuAcn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::CreditCard => "CREDIT_CARD",
            EntityKind::Crypto => "CRYPTO",
            EntityKind::EmailAddress => "EMAIL_ADDRESS",
            EntityKind::IbanCode => "IBAN_CODE",
            EntityKind::Nrp => "NRP",
            EntityKind::Person => "PERSON",
            EntityKind::PhoneNumber => "PHONE_NUMBER",
            EntityKind::UsSsn => "US_SSN",
            EntityKind::UsBankNumber => "US_BANK_NUMBER",
            EntityKind::UsDriverLicense => "US_DRIVER_LICENSE",
            EntityKind::UsItin => "US_ITIN",
            EntityKind::UsPassport => "US_PASSPORT",
            EntityKind::DateTime => "DATE_TIME",
            EntityKind::IpAddress => "IP_ADDRESS",
            EntityKind::Location => "LOCATION",
            EntityKind::Url => "URL",
            EntityKind::AuAbn => "AU_ABN",
            EntityKind::AuAcn => "AU_ACN",
        }
    }

    /// Binary class of the kind: direct identifiers and sensitive attributes
    /// are personal, general or business references are not.
    pub fn is_personal(self) -> bool {
        !matches!(
            self,
            EntityKind::DateTime
                | EntityKind::IpAddress
                | EntityKind::Location
                | EntityKind::Url
                | EntityKind::AuAbn
                | EntityKind::AuAcn
        )
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = RulesError;

    /// Accepts the canonical names plus the bare `SSN` alias.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "SSN" {
            return Ok(EntityKind::UsSsn);
        }
        EntityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| RulesError::UnknownEntity(s.to_string()))
    }
}

/// Personal/non-personal class for an entity name; unknown names are errors.
pub fn entity_is_personal(name: &str) -> Result<bool, RulesError> {
    name.parse::<EntityKind>().map(EntityKind::is_personal)
}

/// One recognizer firing. `span` is a byte range inside the cell at
/// `cell_index` (the row position).
#[derive(Debug, Clone, PartialEq)]
pub struct EntityHit {
    pub kind: EntityKind,
    pub confidence: f64,
    pub cell_index: usize,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanStrategy {
    #[default]
    Columnwise,
    Rowwise,
}

impl FromStr for ScanStrategy {
    type Err = RulesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "columnwise" => Ok(ScanStrategy::Columnwise),
            "rowwise" => Ok(ScanStrategy::Rowwise),
            other => Err(RulesError::InvalidPolicy(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationPolicy {
    pub min_hits: usize,
    pub min_confidence: f64,
    pub strategy: ScanStrategy,
}

impl Default for AggregationPolicy {
    fn default() -> Self {
        Self {
            min_hits: 3,
            min_confidence: 0.4,
            strategy: ScanStrategy::Columnwise,
        }
    }
}

impl AggregationPolicy {
    pub fn validate(&self) -> Result<(), RulesError> {
        if self.min_hits == 0 {
            return Err(RulesError::InvalidPolicy("min_hits must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(RulesError::InvalidPolicy(format!(
                "min_confidence {} outside [0, 1]",
                self.min_confidence
            )));
        }
        Ok(())
    }

    /// Kinds whose count of sufficiently confident hits reaches `min_hits`.
    pub fn surviving_kinds(&self, hits: &[EntityHit]) -> BTreeMap<EntityKind, usize> {
        let mut counts = BTreeMap::new();
        for h in hits.iter().filter(|h| h.confidence >= self.min_confidence) {
            *counts.entry(h.kind).or_insert(0) += 1;
        }
        counts.retain(|_, n| *n >= self.min_hits);
        counts
    }
}

/// Column name followed by its non-empty cells, one per line.
pub fn serialize_columnwise(col: &Column) -> Result<String, RulesError> {
    if col.is_blank() {
        return Err(RulesError::EmptyColumn(col.name.clone()));
    }
    let mut out = col.name.clone();
    for (_, v) in col.non_empty() {
        out.push('\n');
        out.push_str(v);
    }
    Ok(out)
}

/// Non-empty cells of one row, space-joined in column order.
pub fn serialize_rowwise(ds: &Dataset, row: usize) -> Result<String, RulesError> {
    Ok(rowwise_with_offsets(ds, row)?.0)
}

/// Row text plus `(column index, byte offset)` for each included cell.
fn rowwise_with_offsets(ds: &Dataset, row: usize) -> Result<(String, Vec<(usize, usize)>), RulesError> {
    let rows = ds.row_count();
    if row >= rows {
        return Err(RulesError::RowOutOfRange { row, rows });
    }
    let mut text = String::new();
    let mut offsets = Vec::new();
    for (ci, col) in ds.columns.iter().enumerate() {
        let v = &col.values[row];
        if v.is_empty() {
            continue;
        }
        if !text.is_empty() {
            text.push(' ');
        }
        offsets.push((ci, text.len()));
        text.push_str(v);
    }
    Ok((text, offsets))
}

/// Recognizers plus thresholds.
#[derive(Debug, Clone, Default)]
pub struct RuleEngine {
    recognizers: RecognizerSet,
    policy: AggregationPolicy,
}

impl RuleEngine {
    pub fn new(recognizers: RecognizerSet, policy: AggregationPolicy) -> Result<Self, RulesError> {
        policy.validate()?;
        Ok(Self { recognizers, policy })
    }

    pub fn policy(&self) -> &AggregationPolicy {
        &self.policy
    }

    pub fn recognize(&self, text: &str) -> Vec<EntityHit> {
        self.recognizers.recognize(text)
    }

    /// Hits for one column from its column-wise serialisation. Hits on the
    /// header line are discarded; the rest are attributed to their cell.
    pub fn column_hits(&self, col: &Column) -> Result<Vec<EntityHit>, RulesError> {
        let text = serialize_columnwise(col)?;
        // (row index, byte offset of the line) for each serialised cell
        let mut lines = Vec::new();
        let mut offset = col.name.len() + 1;
        for (row, v) in col.non_empty() {
            lines.push((row, offset, v.len()));
            offset += v.len() + 1;
        }
        let mut hits = Vec::new();
        for mut h in self.recognizers.recognize(&text) {
            let idx = lines.partition_point(|&(_, start, _)| start <= h.span.start);
            if idx == 0 {
                continue;
            }
            let (row, start, len) = lines[idx - 1];
            if h.span.end > start + len {
                continue;
            }
            h.cell_index = row;
            h.span = h.span.start - start..h.span.end - start;
            hits.push(h);
        }
        Ok(hits)
    }

    pub fn classify_column(&self, col: &Column) -> Result<ColumnVerdict, RulesError> {
        let hits = self.column_hits(col)?;
        Ok(self.verdict(col, &hits))
    }

    /// Hits per column from the row-wise serialisation of every row. A hit
    /// belongs to the cell containing the start of its span.
    pub fn rowwise_hits(&self, ds: &Dataset, row: usize) -> Result<Vec<(usize, EntityHit)>, RulesError> {
        let (text, offsets) = rowwise_with_offsets(ds, row)?;
        let mut out = Vec::new();
        for mut h in self.recognizers.recognize(&text) {
            let idx = offsets.partition_point(|&(_, start)| start <= h.span.start);
            let (ci, start) = offsets[idx - 1];
            let cell_len = ds.columns[ci].values[row].len();
            h.cell_index = row;
            h.span = h.span.start - start..(h.span.end - start).min(cell_len);
            out.push((ci, h));
        }
        Ok(out)
    }

    /// Classifies every column of `ds` with the engine's strategy.
    pub fn classify_dataset(&self, ds: &Dataset) -> Result<Vec<ColumnVerdict>, RulesError> {
        match self.policy.strategy {
            ScanStrategy::Columnwise => ds.columns.iter().map(|c| self.classify_column(c)).collect(),
            ScanStrategy::Rowwise => {
                let mut per_column: Vec<Vec<EntityHit>> = vec![Vec::new(); ds.columns.len()];
                for row in 0..ds.row_count() {
                    for (ci, h) in self.rowwise_hits(ds, row)? {
                        per_column[ci].push(h);
                    }
                }
                Ok(self.verdicts_from_hits(ds, &per_column))
            }
        }
    }

    /// Turns per-column hit lists (indexed like `ds.columns`) into verdicts.
    pub fn verdicts_from_hits(&self, ds: &Dataset, per_column: &[Vec<EntityHit>]) -> Vec<ColumnVerdict> {
        ds.columns
            .iter()
            .zip(per_column)
            .map(|(c, hits)| self.verdict(c, hits))
            .collect()
    }

    fn verdict(&self, col: &Column, hits: &[EntityHit]) -> ColumnVerdict {
        let surviving = self.policy.surviving_kinds(hits);
        let personal = surviving.keys().any(|k| k.is_personal());
        ColumnVerdict {
            column: col.name.clone(),
            position: col.position,
            personal,
            evidence: Evidence::Entities(surviving),
        }
    }
}
