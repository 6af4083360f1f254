use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use pdd_core::corpus::{load_csv, load_dataset, sidecar_path, AnnotationSet, Dataset};
use pdd_core::eval::{render_report, Predictions};
use pdd_core::llm::{conversation_for, ChatTransport, HttpTransport, LlmClassifier, LlmError, MockTransport};
use pdd_core::rules::{RecognizerSet, RuleEngine};
use pdd_core::scan::{scan_dataset, to_predictions, Detector};
use pdd_core::MetricsReport;
use serde_json::json;

use crate::config::{DetectorKind, FileConfig, RunConfig, RunPaths, ScanOverrides};
use crate::{EvalArgs, PromptArgs, ReportArgs, ScanArgs};

/// `x.preds.json` -> `x.run.json`; anything else gets `.run.json` after its stem.
pub fn run_sidecar(preds: &Path) -> PathBuf {
    let name = preds.file_name().and_then(|n| n.to_str()).unwrap_or("preds");
    let stem = name.strip_suffix(".json").unwrap_or(name);
    let stem = stem.strip_suffix(".preds").unwrap_or(stem);
    preds.with_file_name(format!("{stem}.run.json"))
}

fn default_meta(data: &Path) -> Option<PathBuf> {
    Some(sidecar_path(data, "meta.json")).filter(|p| p.is_file())
}

fn load(data: &Path, meta: Option<&Path>, delimiter: u8) -> Result<Dataset> {
    let ds = match meta {
        Some(m) => load_dataset(data, m, delimiter)?,
        None => load_csv(data, delimiter)?,
    };
    Ok(ds)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn scan(args: ScanArgs) -> Result<ExitCode> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let paths = RunPaths {
        meta: args.meta.clone().or_else(|| default_meta(&args.data)),
        dataset: args.data,
        mock: args.mock,
        output: args.out,
    };
    let flags = ScanOverrides {
        detector: args.detector,
        values_per_column: args.values_per_column,
        min_hits: args.min_hits,
        min_conf: args.min_conf,
        strategy: args.strategy,
        endpoint: args.endpoint,
        model: args.model,
        seed: args.seed,
        workers: args.workers,
        delimiter: args.delimiter,
    };
    let cfg = RunConfig::resolve(file, flags, paths)?;
    let ds = load(&cfg.paths.dataset, cfg.paths.meta.as_deref(), cfg.delimiter_byte())?;

    let detector = match cfg.detector {
        DetectorKind::Rules => Detector::Rules(RuleEngine::new(RecognizerSet::builtin(), cfg.policy)?),
        DetectorKind::Llm => {
            let transport: Box<dyn ChatTransport> = match &cfg.paths.mock {
                Some(p) => Box::new(MockTransport::from_path(p)?),
                None => Box::new(HttpTransport::new(cfg.transport.clone())),
            };
            Detector::Llm(
                LlmClassifier::new(transport, cfg.transport.clone()).with_sample_size(cfg.values_per_column),
            )
        }
    };
    log::info!("scanning {} columns of {:?} with {}", ds.columns.len(), ds.title, detector.id());
    let outcomes = scan_dataset(&ds, &detector, cfg.workers);
    let preds = to_predictions(&ds, &outcomes, detector.id());
    for r in preds.0.iter().filter(|r| r.error.is_some()) {
        eprintln!("column {:?}: {}", r.column, r.error.as_deref().unwrap_or_default());
    }
    write(&cfg.paths.output, &preds.to_json())?;

    let mut run = json!({
        "detector": detector.id(),
        "dataset": ds.title,
        "paths": cfg.paths,
        "values_per_column": cfg.values_per_column,
        "workers": cfg.workers,
        "delimiter": cfg.delimiter.to_string(),
        "columns": ds.columns.len(),
        "errors": preds.error_count(),
    });
    match &detector {
        Detector::Rules(_) => run["policy"] = serde_json::to_value(cfg.policy)?,
        Detector::Llm(clf) => {
            // The config holds only the name of the key variable, never its value.
            run["transport"] = serde_json::to_value(clf.config())?;
            run["backend"] = json!(clf.transport_name());
            run["requests"] = json!(clf.request_count());
        }
    }
    write(&run_sidecar(&cfg.paths.output), &(serde_json::to_string_pretty(&run)? + "\n"))?;

    let errors = preds.error_count();
    println!(
        "{}: {} columns, {} personal, {} failed",
        ds.title,
        preds.0.len(),
        preds.0.iter().filter(|r| r.personal == Some(true)).count(),
        errors
    );
    Ok(if errors > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let preds = Predictions::read(&args.preds)?;
    let text = fs::read_to_string(&args.labels).with_context(|| format!("reading {}", args.labels.display()))?;
    let truth: AnnotationSet =
        serde_json::from_str(&text).with_context(|| format!("malformed labels {}", args.labels.display()))?;
    let cm = preds.confusion(&truth)?;

    let sidecar = run_sidecar(&args.preds);
    let run: Option<serde_json::Value> = if sidecar.is_file() {
        let text = fs::read_to_string(&sidecar)?;
        Some(serde_json::from_str(&text).with_context(|| format!("malformed run file {}", sidecar.display()))?)
    } else {
        None
    };
    let dataset = args
        .dataset
        .or_else(|| run.as_ref()?.get("dataset")?.as_str().map(str::to_string))
        .unwrap_or_else(|| {
            let name = args.preds.file_name().and_then(|n| n.to_str()).unwrap_or("dataset");
            let stem = name.strip_suffix(".json").unwrap_or(name);
            stem.strip_suffix(".preds").unwrap_or(stem).to_string()
        });
    let detector = preds.detector().unwrap_or("mixed");
    let mut report = MetricsReport::from_confusion(detector, dataset, cm)?;
    report.errors = preds.error_count() as u64;
    report.run = run;
    write(&args.out, &(serde_json::to_string_pretty(&report)? + "\n"))?;

    println!("macro_f1           {:.3}", report.macro_f1);
    println!("micro_f1           {:.3}", report.micro_f1);
    match report.balanced_accuracy {
        Some(b) => println!("balanced_accuracy  {b:.3}"),
        None => println!("balanced_accuracy  n/a (single-class ground truth)"),
    }
    if report.errors > 0 {
        println!("({} failed columns excluded)", report.errors);
    }
    Ok(())
}

pub fn prompt(args: PromptArgs) -> Result<()> {
    if !args.delimiter.is_ascii() {
        bail!("delimiter must be a single ASCII character");
    }
    let meta = args.meta.or_else(|| default_meta(&args.data));
    let ds = load(&args.data, meta.as_deref(), args.delimiter as u8)?;
    let col = ds
        .column(&args.column)
        .ok_or_else(|| anyhow!(LlmError::ColumnNotInDataset(args.column.clone())))?;
    print!("{}", conversation_for(&ds, col, args.values_per_column)?.transcript());
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let reports = args
        .metrics
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<MetricsReport>(&text).with_context(|| format!("malformed metrics {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    print!("{}", render_report(&reports, args.format));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_names() {
        assert_eq!(run_sidecar(Path::new("out/a.preds.json")), Path::new("out/a.run.json"));
        assert_eq!(run_sidecar(Path::new("p.json")), Path::new("p.run.json"));
        assert_eq!(run_sidecar(Path::new("p")), Path::new("p.run.json"));
    }
}
