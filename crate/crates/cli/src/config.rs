//! Effective run configuration: command-line flags over the config file over
//! built-in defaults.
//!
//! The config file is TOML with one table per module:
//!
//! ```toml
//! [scan]
//! detector = "llm"
//! values_per_column = 10
//! workers = 4
//!
//! [rules]
//! min_hits = 3
//! min_confidence = 0.4
//! strategy = "columnwise"
//!
//! [llm]
//! endpoint_url = "https://api.example.com/v1/chat/completions"
//! model_id = "gpt-4o"
//! api_key_env = "PDD_API_KEY"
//! seed = 42
//! ```
//!
//! Unknown keys are rejected, so a misplaced secret fails loudly instead of
//! being carried along.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pdd_core::corpus::DEFAULT_SAMPLE_SIZE;
use pdd_core::llm::TransportConfig;
use pdd_core::rules::{AggregationPolicy, ScanStrategy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Rules,
    Llm,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub rules: RulesSection,
    pub llm: Option<TransportConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub detector: Option<DetectorKind>,
    pub values_per_column: Option<usize>,
    pub workers: Option<usize>,
    pub delimiter: Option<char>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesSection {
    pub min_hits: Option<usize>,
    pub min_confidence: Option<f64>,
    pub strategy: Option<ScanStrategy>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flag values as given on the command line; `None` means not given.
#[derive(Debug, Default, Clone)]
pub struct ScanOverrides {
    pub detector: Option<DetectorKind>,
    pub values_per_column: Option<usize>,
    pub min_hits: Option<usize>,
    pub min_conf: Option<f64>,
    pub strategy: Option<ScanStrategy>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub seed: Option<i64>,
    pub workers: Option<usize>,
    pub delimiter: Option<char>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunPaths {
    pub dataset: PathBuf,
    pub meta: Option<PathBuf>,
    pub mock: Option<PathBuf>,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub detector: DetectorKind,
    pub values_per_column: usize,
    pub policy: AggregationPolicy,
    pub transport: TransportConfig,
    pub paths: RunPaths,
    pub workers: usize,
    pub delimiter: char,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get().min(8))
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: ScanOverrides, paths: RunPaths) -> Result<Self> {
        let defaults = AggregationPolicy::default();
        let mut transport = file.llm.unwrap_or_default();
        if let Some(url) = flags.endpoint {
            transport.endpoint_url = url;
        }
        if let Some(model) = flags.model {
            transport.model_id = model;
        }
        if flags.seed.is_some() {
            transport.seed = flags.seed;
        }
        let cfg = RunConfig {
            detector: flags.detector.or(file.scan.detector).unwrap_or(DetectorKind::Rules),
            values_per_column: flags
                .values_per_column
                .or(file.scan.values_per_column)
                .unwrap_or(DEFAULT_SAMPLE_SIZE),
            policy: AggregationPolicy {
                min_hits: flags.min_hits.or(file.rules.min_hits).unwrap_or(defaults.min_hits),
                min_confidence: flags
                    .min_conf
                    .or(file.rules.min_confidence)
                    .unwrap_or(defaults.min_confidence),
                strategy: flags.strategy.or(file.rules.strategy).unwrap_or(defaults.strategy),
            },
            transport,
            paths,
            workers: flags.workers.or(file.scan.workers).unwrap_or_else(default_workers),
            delimiter: flags.delimiter.or(file.scan.delimiter).unwrap_or(','),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values_per_column == 0 {
            bail!("values-per-column must be at least 1");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        match self.detector {
            DetectorKind::Rules => self.policy.validate()?,
            DetectorKind::Llm => {
                if self.paths.mock.is_none() && self.transport.endpoint_url.is_empty() {
                    bail!("the llm detector needs --endpoint or --mock");
                }
                if self.paths.meta.is_none() {
                    bail!("the llm detector needs dataset metadata (--meta or a sibling .meta.json)");
                }
                self.transport.validate().map_err(anyhow::Error::msg)?;
            }
        }
        Ok(())
    }

    pub fn delimiter_byte(&self) -> u8 {
        self.delimiter as u8
    }
}
