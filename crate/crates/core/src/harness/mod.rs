//! Dataset synthesis, the end-to-end pipeline with its ablation modes, and
//! classification/localization metrics.

mod dataset;
mod metrics;
mod pipeline;

use thiserror::Error;

use crate::code_model::CodeModelError;
use crate::forge::ForgeError;

pub use dataset::{
    check_leakage, load_corpus, read_records, synth_dataset, write_jsonl, DatasetRecord, PatternSplit, Ratios, Split,
    SynthOptions,
};
pub use metrics::{
    classification, compute_metrics, f1, metrics_csv, ClassMetrics, Classification, Localization, Metrics,
};
pub use pipeline::{AnalysisReport, Mode, Pipeline, PipelineConfig, Timings};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("insufficient corpus: {0}")]
    InsufficientCorpus(String),
    #[error("misaligned inputs: {0}")]
    MisalignedInputs(String),
    #[error("pattern leakage: {0}")]
    PatternLeakage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("forge failed on host `{host}`: {source}")]
    Forge {
        host: String,
        #[source]
        source: ForgeError,
    },
    #[error("{0}")]
    Stage(String),
    #[error("bad record format: {0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] CodeModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
