use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use pdd_core::corpus::{load_annotations, load_dataset, sample_top_k, Column};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn absenteeism_has_21_features_in_order() {
    let ds = load_dataset(&fixture("absenteeism.csv"), &fixture("absenteeism.meta.json"), b',').unwrap();
    let names: Vec<&str> = ds.column_names().collect();
    assert_eq!(names.len(), 21);
    assert_eq!(names[0], "ID");
    assert_eq!(names[1], "Reason for absence");
    assert_eq!(names[9], "Work load Average/day");
    assert_eq!(names[20], "Absenteeism time in hours");
    assert_eq!(ds.title, "Absenteeism at Work");
    let ids = sample_top_k(ds.column("ID").unwrap(), 10).unwrap();
    assert_eq!(ids.values, ["3", "20", "28", "11", "15", "34", "10", "33", "14", "36"]);
}

#[test]
fn mimic_shaped_labels() {
    let dir = tempfile::tempdir().unwrap();
    let names: Vec<String> = (0..163).map(|i| format!("field_{i:03}")).collect();
    let header = names.join(",");
    let row = names.iter().map(|_| "x").collect::<Vec<_>>().join(",");
    fs::write(dir.path().join("m.csv"), format!("{header}\n{row}\n")).unwrap();
    fs::write(dir.path().join("m.meta.json"), r#"{"title":"MIMIC","description":"demo"}"#).unwrap();
    let labels: HashMap<&str, bool> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i < 43)).collect();
    fs::write(dir.path().join("m.labels.json"), serde_json::to_string(&labels).unwrap()).unwrap();

    let ds = load_dataset(&dir.path().join("m.csv"), &dir.path().join("m.meta.json"), b',').unwrap();
    let set = load_annotations(&dir.path().join("m.labels.json"), &ds).unwrap();
    assert_eq!(set.len(), 163);
    assert_eq!(set.count_personal(), 43);
}

/// Independent top-k: count by brute force over the distinct values.
fn oracle_top_k(values: &[String], k: usize) -> Vec<String> {
    let mut distinct: Vec<&String> = Vec::new();
    for v in values {
        if !v.is_empty() && !distinct.contains(&v) {
            distinct.push(v);
        }
    }
    let count = |x: &String| values.iter().filter(|v| *v == x).count();
    let mut out: Vec<String> = Vec::new();
    for _ in 0..k.min(distinct.len()) {
        // highest count; earliest first occurrence wins ties (distinct is in first-seen order)
        let best = distinct
            .iter()
            .filter(|d| !out.contains(d))
            .fold(None::<&String>, |acc, d| match acc {
                Some(a) if count(a) >= count(d) => Some(a),
                _ => Some(d),
            })
            .unwrap();
        out.push(best.clone());
    }
    out
}

fn cells() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(
        prop_oneof![
            4 => (0u8..20).prop_map(|i| format!("s{i}")),
            1 => Just(String::new()),
        ],
        1..1000,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn top_k_matches_oracle(values in cells(), k in 1usize..25) {
        prop_assume!(values.iter().any(|v| !v.is_empty()));
        let col = Column::new("c", values.clone(), 0);
        let sample = sample_top_k(&col, k).unwrap();
        prop_assert_eq!(&sample.values, &oracle_top_k(&values, k));
        let freq = |x: &String| values.iter().filter(|v| *v == x).count();
        for w in sample.values.windows(2) {
            prop_assert!(freq(&w[0]) >= freq(&w[1]));
        }
        prop_assert!(sample.values.iter().all(|v| !v.is_empty()));
        prop_assert_eq!(sample_top_k(&col, k).unwrap(), sample);
    }

    #[test]
    fn csv_round_trip(
        grid in proptest::collection::vec(proptest::collection::vec("[a-z ,\"\n]{0,6}", 3), 1..8),
    ) {
        let mut cols: Vec<(String, Vec<String>)> = (0..3)
            .map(|c| (format!("col {c}"), grid.iter().map(|r| r[c].clone()).collect()))
            .collect();
        // every column needs a value
        for (_, v) in cols.iter_mut() {
            v[0].push('v');
        }
        let ds = pdd_core::Dataset::from_columns("T", "D", cols).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (csv, meta) = (dir.path().join("r.csv"), dir.path().join("r.meta.json"));
        ds.write_csv(&csv, b',').unwrap();
        ds.write_metadata(&meta).unwrap();
        let back = load_dataset(&csv, &meta, b',').unwrap();
        prop_assert_eq!(&back.columns, &ds.columns);
        prop_assert_eq!((&back.title, &back.description), (&ds.title, &ds.description));
        back.write_csv(&csv, b',').unwrap();
        let again = load_dataset(&csv, &meta, b',').unwrap();
        prop_assert_eq!(again.columns, back.columns);
    }
}
