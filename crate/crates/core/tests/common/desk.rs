//! The desk-scale dataset built from the fixture corpus.

use dce_core::classifier::ClassifierKind;
use dce_core::code_model::{CodeSnippet, Language};
use dce_core::harness::{
    synth_dataset, AnalysisReport, DatasetRecord, Mode, PatternSplit, Pipeline, PipelineConfig, SynthOptions,
};
use dce_core::llm::Transport;

pub fn all_hosts() -> Vec<CodeSnippet> {
    Language::ALL
        .into_iter()
        .flat_map(super::corpus)
        .map(|(_, s)| s)
        .collect()
}

pub fn dataset(seed: u64, variants: usize) -> Vec<DatasetRecord> {
    let opts = SynthOptions {
        seed,
        variants,
        ..SynthOptions::default()
    };
    synth_dataset(&all_hosts(), &opts, &PatternSplit::from_catalog(seed, 0.5)).unwrap()
}

/// Enough variants for every test host to carry each test pattern once.
pub fn full_coverage() -> usize {
    PatternSplit::from_catalog(7, 0.5).test.len()
}

pub fn run_with(
    mode: Mode,
    kind: ClassifierKind,
    records: &[DatasetRecord],
    transport: Option<Box<dyn Transport>>,
) -> Vec<AnalysisReport> {
    let mut cfg = PipelineConfig {
        mode,
        timings: false,
        ..PipelineConfig::default()
    };
    cfg.classifier.kind = kind;
    Pipeline::new(cfg, transport).unwrap().run_all(records, 4).unwrap()
}

pub fn run(mode: Mode, kind: ClassifierKind, records: &[DatasetRecord]) -> Vec<AnalysisReport> {
    run_with(mode, kind, records, None)
}
