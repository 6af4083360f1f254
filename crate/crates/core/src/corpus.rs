//! Tabular datasets, their metadata sidecars and ground-truth annotations.
//!
//! Every cell is kept as text. Missing cells are stored as empty strings and
//! carry no signal: they are skipped by sampling and by recognition.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of sampled values handed to the prompt builder when not configured.
pub const DEFAULT_SAMPLE_SIZE: usize = 10;

/// Upper bound on the description length passed downstream, in characters.
pub const MAX_DESCRIPTION_CHARS: usize = 2000;

/// Appended to a description that was cut at [`MAX_DESCRIPTION_CHARS`].
pub const TRUNCATION_MARKER: &str = " [...]";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: missing header row")]
    MissingHeader(PathBuf),
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("{path}: malformed csv: {message}")]
    MalformedCsv { path: PathBuf, message: String },
    #[error("{path}: malformed metadata: {message}")]
    MalformedMetadata { path: PathBuf, message: String },
    #[error("{path}: malformed labels: {message}")]
    MalformedLabels { path: PathBuf, message: String },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {0:?} has no non-empty values")]
    EmptyColumn(String),
    #[error("sample size must be at least 1")]
    ZeroSampleSize,
}

/// One named column. `values` holds one entry per dataset row, in row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub values: Vec<String>,
    pub position: usize,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<String>, position: usize) -> Self {
        Self {
            name: name.into(),
            values,
            position,
        }
    }

    /// Non-empty cells paired with their row index.
    pub fn non_empty(&self) -> impl Iterator<Item = (usize, &str)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_empty())
            .map(|(i, v)| (i, v.as_str()))
    }

    pub fn is_blank(&self) -> bool {
        self.values.iter().all(|v| v.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub title: String,
    pub description: String,
    pub columns: Vec<Column>,
    pub source_path: PathBuf,
}

/// Contents of a `<name>.meta.json` sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub title: String,
    pub description: String,
}

impl Dataset {
    /// Builds a dataset from in-memory columns, checking the same invariants
    /// as [`load_dataset`]. Column positions are reassigned in order.
    pub fn from_columns(
        title: impl Into<String>,
        description: impl Into<String>,
        columns: Vec<(String, Vec<String>)>,
    ) -> Result<Self, CorpusError> {
        let rows = columns.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(columns.len());
        for (position, (name, mut values)) in columns.into_iter().enumerate() {
            let name = name.trim().to_string();
            if !seen.insert(name.clone()) {
                return Err(CorpusError::DuplicateColumn(name));
            }
            values.resize(rows, String::new());
            out.push(Column::new(name, values, position));
        }
        let ds = Dataset {
            title: title.into(),
            description: description.into(),
            columns: out,
            source_path: PathBuf::new(),
        };
        ds.check_non_empty()?;
        Ok(ds)
    }

    pub fn row_count(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    /// Description cut to [`MAX_DESCRIPTION_CHARS`] at a word boundary.
    pub fn prompt_description(&self) -> String {
        truncate_description(&self.description, MAX_DESCRIPTION_CHARS)
    }

    pub fn metadata(&self) -> Metadata {
        Metadata {
            title: self.title.clone(),
            description: self.description.clone(),
        }
    }

    fn check_non_empty(&self) -> Result<(), CorpusError> {
        if self.columns.is_empty() {
            return Err(CorpusError::MissingHeader(self.source_path.clone()));
        }
        if let Some(c) = self.columns.iter().find(|c| c.is_blank()) {
            return Err(CorpusError::EmptyColumn(c.name.clone()));
        }
        Ok(())
    }

    /// Writes the cell grid as delimiter-separated text with a header row.
    pub fn write_csv(&self, path: &Path, delimiter: u8) -> Result<(), CorpusError> {
        let io_err = |e: csv::Error| CorpusError::MalformedCsv {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_path(path)
            .map_err(io_err)?;
        w.write_record(self.column_names()).map_err(io_err)?;
        for row in 0..self.row_count() {
            w.write_record(self.columns.iter().map(|c| c.values[row].as_str()))
                .map_err(io_err)?;
        }
        w.flush().map_err(|source| CorpusError::UnreadableFile {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write_metadata(&self, path: &Path) -> Result<(), CorpusError> {
        let text = serde_json::to_string_pretty(&self.metadata()).expect("metadata serializes");
        fs::write(path, text).map_err(|source| CorpusError::UnreadableFile {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::UnreadableFile {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_metadata(path: &Path) -> Result<Metadata, CorpusError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CorpusError::MalformedMetadata {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads only the cell grid; title is the file stem and description is empty.
pub fn load_csv(csv_path: &Path, delimiter: u8) -> Result<Dataset, CorpusError> {
    let malformed = |message: String| CorpusError::MalformedCsv {
        path: csv_path.to_path_buf(),
        message,
    };
    let text = read_text(csv_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(CorpusError::MissingHeader(csv_path.to_path_buf()));
    }
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let mut seen = HashSet::new();
    for n in &names {
        if !seen.insert(n.as_str()) {
            return Err(CorpusError::DuplicateColumn(n.clone()));
        }
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        if record.len() > names.len() {
            return Err(malformed(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                record.len(),
                names.len()
            )));
        }
        for (col, cells) in cells.iter_mut().enumerate() {
            cells.push(record.get(col).unwrap_or("").to_string());
        }
    }

    let columns = names
        .into_iter()
        .zip(cells)
        .enumerate()
        .map(|(position, (name, values))| Column::new(name, values, position))
        .collect();
    let title = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ds = Dataset {
        title,
        description: String::new(),
        columns,
        source_path: csv_path.to_path_buf(),
    };
    ds.check_non_empty()?;
    Ok(ds)
}

/// Loads a dataset and its metadata sidecar.
pub fn load_dataset(csv_path: &Path, meta_path: &Path, delimiter: u8) -> Result<Dataset, CorpusError> {
    let meta = load_metadata(meta_path)?;
    let mut ds = load_csv(csv_path, delimiter)?;
    ds.title = meta.title;
    ds.description = meta.description;
    Ok(ds)
}

/// Sidecar path convention: `data.csv` -> `data.meta.json`.
pub fn sidecar_path(csv_path: &Path, suffix: &str) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv_path.with_file_name(format!("{stem}.{suffix}"))
}

/// Ground-truth binary labels keyed by column name (`true` = personal).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnnotationSet {
    labels: BTreeMap<String, bool>,
}

impl AnnotationSet {
    pub fn get(&self, column: &str) -> Option<bool> {
        self.labels.get(column).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.labels.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn count_personal(&self) -> usize {
        self.labels.values().filter(|v| **v).count()
    }

    /// Reads a labels file without checking it against a dataset.
    pub fn from_path(path: &Path) -> Result<Self, CorpusError> {
        let text = read_text(path)?;
        let labels: BTreeMap<String, bool> =
            serde_json::from_str(&text).map_err(|e| CorpusError::MalformedLabels {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        Ok(Self { labels })
    }

    /// Checks that every label names a column of `ds`.
    pub fn validate(&self, ds: &Dataset) -> Result<(), CorpusError> {
        match self.labels.keys().find(|k| ds.column(k).is_none()) {
            Some(k) => Err(CorpusError::UnknownColumn(k.clone())),
            None => Ok(()),
        }
    }
}

impl FromIterator<(String, bool)> for AnnotationSet {
    fn from_iter<I: IntoIterator<Item = (String, bool)>>(iter: I) -> Self {
        Self {
            labels: iter.into_iter().collect(),
        }
    }
}

pub fn load_annotations(labels_path: &Path, ds: &Dataset) -> Result<AnnotationSet, CorpusError> {
    let set = AnnotationSet::from_path(labels_path)?;
    set.validate(ds)?;
    Ok(set)
}

/// Up to `k` distinct non-empty values of a column, most frequent first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSample {
    pub values: Vec<String>,
    pub k: usize,
}

/// Ranks distinct non-empty values by descending count; ties go to the value
/// seen first in row order.
pub fn sample_top_k(col: &Column, k: usize) -> Result<ValueSample, CorpusError> {
    if k == 0 {
        return Err(CorpusError::ZeroSampleSize);
    }
    // value -> (count, first row)
    let mut stats: HashMap<&str, (usize, usize)> = HashMap::new();
    for (row, v) in col.non_empty() {
        stats.entry(v).or_insert((0, row)).0 += 1;
    }
    if stats.is_empty() {
        return Err(CorpusError::EmptyColumn(col.name.clone()));
    }
    let mut ranked: Vec<(&str, usize, usize)> =
        stats.into_iter().map(|(v, (n, first))| (v, n, first)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    Ok(ValueSample {
        values: ranked.into_iter().take(k).map(|(v, _, _)| v.to_string()).collect(),
        k,
    })
}

/// Cuts `text` to at most `max_chars` characters at the last whitespace
/// boundary, then appends [`TRUNCATION_MARKER`].
pub fn truncate_description(text: &str, max_chars: usize) -> String {
    if text.chars().count() <= max_chars {
        return text.to_string();
    }
    let cut = text
        .char_indices()
        .nth(max_chars)
        .map_or(text.len(), |(i, _)| i);
    let head = &text[..cut];
    // Only back off to a word boundary if the cut landed mid-word.
    let mid_word = !text[cut..].starts_with(char::is_whitespace);
    let head = match head.rfind(char::is_whitespace) {
        Some(ws) if mid_word && ws > 0 => &head[..ws],
        _ => head,
    };
    format!("{}{}", head.trim_end(), TRUNCATION_MARKER)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[&str]) -> Column {
        Column::new("c", values.iter().map(|s| s.to_string()).collect(), 0)
    }

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn loads_small_csv_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "t.csv", "ID,Age\n1,30\n2,41\n3,29\n");
        let meta = write(dir.path(), "t.meta.json", r#"{"title":"T","description":"D"}"#);
        let ds = load_dataset(&csv, &meta, b',').unwrap();
        assert_eq!(ds.title, "T");
        assert_eq!(ds.description, "D");
        assert_eq!(ds.columns.len(), 2);
        assert_eq!(ds.row_count(), 3);
        assert_eq!(ds.columns[1].values, vec!["30", "41", "29"]);
        assert_eq!(ds.columns[1].position, 1);
    }

    #[test]
    fn rejects_duplicate_headers() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "d.csv", "a,a\n1,2\n");
        let err = load_csv(&csv, b',').unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateColumn(n) if n == "a"));
        // trimming happens before the uniqueness check
        let csv = write(dir.path(), "e.csv", "a , a\n1,2\n");
        assert!(matches!(load_csv(&csv, b','), Err(CorpusError::DuplicateColumn(_))));
    }

    #[test]
    fn empty_file_has_no_header() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "e.csv", "");
        assert!(matches!(load_csv(&csv, b','), Err(CorpusError::MissingHeader(_))));
    }

    #[test]
    fn missing_file_is_unreadable() {
        let err = load_csv(Path::new("/nonexistent/x.csv"), b',').unwrap_err();
        assert!(matches!(err, CorpusError::UnreadableFile { .. }));
    }

    #[test]
    fn bad_sidecar_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "t.csv", "a\n1\n");
        let meta = write(dir.path(), "t.meta.json", r#"{"title":"T"}"#);
        assert!(matches!(
            load_dataset(&csv, &meta, b','),
            Err(CorpusError::MalformedMetadata { .. })
        ));
    }

    #[test]
    fn short_rows_are_padded_and_long_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "s.csv", "a,b\n1\n2,3\n");
        let ds = load_csv(&csv, b',').unwrap();
        assert_eq!(ds.columns[1].values, vec!["", "3"]);
        let csv = write(dir.path(), "l.csv", "a,b\n1,2,3\n");
        assert!(matches!(load_csv(&csv, b','), Err(CorpusError::MalformedCsv { .. })));
    }

    #[test]
    fn all_empty_column_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "s.csv", "a,b\n1,\n2,\n");
        assert!(matches!(load_csv(&csv, b','), Err(CorpusError::EmptyColumn(n)) if n == "b"));
    }

    #[test]
    fn custom_delimiter() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(dir.path(), "s.csv", "a;b\n1;x,y\n");
        let ds = load_csv(&csv, b';').unwrap();
        assert_eq!(ds.columns[1].values, vec!["x,y"]);
    }

    #[test]
    fn annotations_resolve_against_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let ds = Dataset::from_columns("T", "D", vec![("ID".into(), vec!["1".into()])]).unwrap();
        let ok = write(dir.path(), "ok.labels.json", r#"{"ID": true}"#);
        assert_eq!(load_annotations(&ok, &ds).unwrap().len(), 1);
        let ghost = write(dir.path(), "g.labels.json", r#"{"ghost": true}"#);
        assert!(matches!(load_annotations(&ghost, &ds), Err(CorpusError::UnknownColumn(n)) if n == "ghost"));
        let bad = write(dir.path(), "b.labels.json", r#"{"ID": "yes"}"#);
        assert!(matches!(load_annotations(&bad, &ds), Err(CorpusError::MalformedLabels { .. })));
    }

    #[test]
    fn top_k_by_frequency() {
        let s = sample_top_k(&col(&["A", "B", "A", "C", "A", "B"]), 2).unwrap();
        assert_eq!(s.values, vec!["A", "B"]);
        assert_eq!(s.k, 2);
    }

    #[test]
    fn top_k_fewer_distinct_than_k() {
        assert_eq!(sample_top_k(&col(&["X"]), 10).unwrap().values, vec!["X"]);
    }

    #[test]
    fn top_k_ties_keep_first_occurrence() {
        let ids = ["3", "20", "28", "11", "15", "34", "10", "33", "14", "36"];
        assert_eq!(sample_top_k(&col(&ids), 10).unwrap().values, ids);
    }

    #[test]
    fn top_k_skips_empty_cells() {
        let s = sample_top_k(&col(&["", "", "", "v"]), 3).unwrap();
        assert_eq!(s.values, vec!["v"]);
        assert!(matches!(sample_top_k(&col(&["", ""]), 3), Err(CorpusError::EmptyColumn(_))));
        assert!(matches!(sample_top_k(&col(&["a"]), 0), Err(CorpusError::ZeroSampleSize)));
    }

    #[test]
    fn short_description_untouched() {
        assert_eq!(truncate_description("short text", 2000), "short text");
    }

    #[test]
    fn long_description_cut_at_word_boundary() {
        let text = "alpha beta gamma delta";
        assert_eq!(truncate_description(text, 8), format!("alpha{TRUNCATION_MARKER}"));
        // cut landing exactly before a space keeps the whole word
        assert_eq!(truncate_description(text, 10), format!("alpha beta{TRUNCATION_MARKER}"));
        let long = "word ".repeat(1000);
        let cut = truncate_description(&long, MAX_DESCRIPTION_CHARS);
        assert!(cut.chars().count() <= MAX_DESCRIPTION_CHARS + TRUNCATION_MARKER.len());
        assert!(cut.ends_with(TRUNCATION_MARKER));
        assert!(cut.trim_end_matches(TRUNCATION_MARKER).ends_with("word"));
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(
            sidecar_path(Path::new("/d/abs.csv"), "meta.json"),
            PathBuf::from("/d/abs.meta.json")
        );
    }
}
