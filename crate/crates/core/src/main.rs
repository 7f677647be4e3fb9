use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use dce_core::audit::{audit, audit_with_exec};
use dce_core::classifier::ClassifierKind;
use dce_core::code_model::{split_lines, CodeSnippet, Language};
use dce_core::config::{ConfigError, Settings};
use dce_core::forge::catalog_dump;
use dce_core::forge::diffexec::DiffExecConfig;
use dce_core::harness::{
    check_leakage, compute_metrics, load_corpus, metrics_csv, read_records, synth_dataset, write_jsonl, DatasetRecord,
    HarnessError, Metrics, Mode, PatternSplit, Pipeline, Ratios, Split,
};
use dce_core::labels::{Class, DeadType};
use dce_core::oracle::{findings, GoldAnnotation, LineFinding, Reason};

/// Dead-code detection and elimination: synthesize labeled corpora, locate
/// dead lines, ask an LLM to explain and fix them, and score the result.
///
/// LLM credentials come only from DCE_LLM_BASE_URL, DCE_LLM_API_KEY and
/// DCE_LLM_MODEL. Settings resolve as flags, then environment, then the
/// --config file, then built-in defaults.
#[derive(Parser, Debug)]
#[command(name = "dce", version, about, long_about)]
struct Cli {
    /// TOML settings file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads [default: logical cores].
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Exit 1 if any record fails or an audited fix is not acceptable.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct PipelineArgs {
    /// Pivot classifier: heuristic, fixture or remote.
    #[arg(long, value_name = "KIND")]
    classifier: Option<ClassifierKind>,
    /// Soft-threshold divisor; lines scoring at least max/tau are kept [default: 2].
    #[arg(long)]
    tau: Option<f64>,
    /// Per-class floor below which nothing is selected [default: 0.02].
    #[arg(long)]
    epsilon: Option<f64>,
    /// Pipeline mode: full, no_pivot, no_llm, no_attribution or oracle.
    #[arg(long)]
    mode: Option<String>,
    /// Answer LLM prompts from canned responses in DIR instead of the network.
    #[arg(long, value_name = "DIR")]
    replay: Option<PathBuf>,
    /// Leave per-stage timings out of reports.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a labeled dataset (JSONL) from a directory of clean sources.
    Synth {
        /// Directory of .py/.java hosts.
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        /// Output dataset file.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Seed for host splits, role assignment and pattern draws [default: 7].
        #[arg(long)]
        seed: Option<u64>,
        /// Host mix normal:unused:unreachable [default: 4:1:1].
        #[arg(long)]
        ratios: Option<Ratios>,
        /// Records per unused/unreachable host, each with a different block [default: 1].
        #[arg(long)]
        variants: Option<usize>,
    },
    /// Run the pipeline on source files or dataset records; prints one
    /// report per line.
    Analyze {
        /// Source files to analyze.
        files: Vec<PathBuf>,
        /// Analyze records of this dataset instead of files.
        #[arg(long, value_name = "FILE", conflicts_with = "files")]
        data: Option<PathBuf>,
        /// With --data, only records of this split.
        #[arg(long, requires = "data")]
        split: Option<Split>,
        /// Print static oracle findings only, one per line.
        #[arg(long)]
        oracle_only: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Print per-line attribution scores and the selected lines.
    Attribute {
        file: PathBuf,
        /// Pivot classifier: heuristic, fixture or remote.
        #[arg(long, value_name = "KIND")]
        classifier: Option<ClassifierKind>,
        /// Soft-threshold divisor [default: 2].
        #[arg(long)]
        tau: Option<f64>,
        /// Per-class floor [default: 0.02].
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Run the pipeline over a dataset split and compute metrics.
    Eval {
        /// Dataset file.
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        /// Split to evaluate.
        #[arg(long, default_value = "test")]
        split: Split,
        /// Directory for reports.jsonl, metrics.json and metrics.csv.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Audit a fixed file against its original.
    Audit {
        original: PathBuf,
        fixed: PathBuf,
        /// Gold dead lines of the original, e.g. `4:unused,5:unreachable`.
        #[arg(long, value_name = "LINES")]
        gold: Option<String>,
        /// Also run both versions, e.g. `python3 {file}`, and compare output.
        #[arg(long, value_name = "CMD")]
        exec: Option<String>,
    },
    /// Print the pattern catalog as JSON (the forge.json dump).
    Patterns {
        /// Write to FILE instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn json_out<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

fn read_source(path: &Path) -> Result<CodeSnippet, Failure> {
    let lang = path
        .extension()
        .and_then(|e| e.to_str())
        .and_then(Language::from_extension)
        .ok_or_else(|| Failure::Usage(format!("{}: unknown source extension", path.display())))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
    split_lines(&text, lang).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn apply_pipeline_args(s: &mut Settings, p: &PipelineArgs) -> Result<(), Failure> {
    if let Some(k) = p.classifier {
        s.pipeline.classifier.kind = k;
    }
    if let Some(t) = p.tau {
        s.pipeline.tau = t;
    }
    if let Some(e) = p.epsilon {
        s.pipeline.epsilon = e;
    }
    if let Some(m) = &p.mode {
        s.pipeline.mode = m.parse::<Mode>()?;
    }
    if let Some(r) = &p.replay {
        s.replay = Some(r.clone());
    }
    if p.no_timings {
        s.pipeline.timings = false;
    }
    Ok(())
}

fn pipeline(s: &Settings) -> Result<Pipeline, Failure> {
    Ok(s.build_pipeline()?)
}

fn parse_gold(spec: &str) -> Result<GoldAnnotation, Failure> {
    let mut lines = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Failure::Usage(format!("bad gold entry `{part}`; expected LINE:TYPE"));
        let (idx, kind) = part.split_once(':').ok_or_else(bad)?;
        lines.push(LineFinding {
            index: idx.trim().parse().map_err(|_| bad())?,
            kind: kind.parse::<DeadType>().map_err(|_| bad())?,
            reason: Reason::InsertedPattern,
        });
    }
    Ok(GoldAnnotation::from_lines(lines))
}

fn print_metrics(m: &Metrics) {
    println!("{:<12} {:>7} {:>7} {:>7} {:>7}", "class", "R", "P", "F1", "support");
    for c in Class::ALL {
        let cm = m.class(c);
        println!(
            "{:<12} {:>7.2} {:>7.2} {:>7.2} {:>7}",
            c.as_str(),
            cm.recall,
            cm.precision,
            cm.f1,
            cm.support
        );
    }
    println!("accuracy     {:>7.2}  ({} records)", m.accuracy, m.total);
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
    println!(
        "line recall  {}  mean candidate size {}",
        opt(m.localization.line_recall),
        opt(m.localization.mean_candidate_size)
    );
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let mut s = Settings::load(cli.config.as_deref(), |k| std::env::var(k).ok())?;
    if let Some(w) = cli.workers {
        s.workers = Some(w);
    }
    if cli.strict {
        s.strict = true;
    }
    match cli.command {
        Command::Synth {
            corpus,
            out,
            seed,
            ratios,
            variants,
        } => {
            if let Some(v) = seed {
                s.synth.seed = v;
            }
            if let Some(r) = ratios {
                s.synth.ratios = r;
            }
            if let Some(v) = variants {
                s.synth.variants = v;
            }
            let hosts = load_corpus(&corpus)?;
            let split = PatternSplit::from_catalog(s.synth.seed, s.pattern_train_fraction);
            let records = synth_dataset(&hosts, &s.synth, &split)?;
            write_jsonl(&out, &records)?;
            let mut counts: BTreeMap<(Split, &str), usize> = BTreeMap::new();
            for r in &records {
                *counts.entry((r.split, r.label.as_str())).or_default() += 1;
            }
            println!("wrote {} records to {}", records.len(), out.display());
            for ((split, label), n) in counts {
                println!("{split:<5} {label:<11} {n}");
            }
            Ok(true)
        }
        Command::Analyze {
            files,
            data,
            split,
            oracle_only,
            pipeline: p,
        } => {
            apply_pipeline_args(&mut s, &p)?;
            let records: Vec<DatasetRecord> = match &data {
                Some(path) => read_records(path)?
                    .into_iter()
                    .filter(|r| split.is_none_or(|sp| r.split == sp))
                    .collect(),
                None => {
                    if files.is_empty() {
                        return Err(Failure::Usage("give source files or --data".into()));
                    }
                    files
                        .iter()
                        .map(|f| Ok(DatasetRecord::from_source(f.to_string_lossy(), &read_source(f)?)))
                        .collect::<Result<_, Failure>>()?
                }
            };
            let mut stdout = std::io::stdout().lock();
            if oracle_only {
                for r in &records {
                    for f in findings(&r.snippet().map_err(|e| Failure::Run(e.to_string()))?) {
                        let line = json!({"record_id": r.id, "index": f.index, "type": f.kind, "reason": f.reason});
                        writeln!(stdout, "{line}")?;
                    }
                }
                return Ok(true);
            }
            let reports = pipeline(&s)?.run_all(&records, s.workers())?;
            for r in &reports {
                writeln!(stdout, "{}", json_out(r))?;
            }
            Ok(!s.strict || reports.iter().all(|r| !r.failed()))
        }
        Command::Attribute {
            file,
            classifier,
            tau,
            epsilon,
        } => {
            apply_pipeline_args(
                &mut s,
                &PipelineArgs {
                    classifier,
                    tau,
                    epsilon,
                    ..PipelineArgs::default()
                },
            )?;
            let record = DatasetRecord::from_source(file.to_string_lossy(), &read_source(&file)?);
            let p = Pipeline::new(s.pipeline.clone(), None)?;
            let (scores, candidates) = p.attribution(&record)?;
            let mut stdout = std::io::stdout().lock();
            for sc in scores {
                let selected: Vec<&str> = candidates.classes_of(sc.index).iter().map(|t| t.as_str()).collect();
                let line = json!({
                    "index": sc.index,
                    "a_unused": sc.a_unused,
                    "a_unreachable": sc.a_unreachable,
                    "selected": selected,
                });
                writeln!(stdout, "{line}")?;
            }
            Ok(true)
        }
        Command::Eval {
            data,
            split,
            out,
            pipeline: p,
        } => {
            apply_pipeline_args(&mut s, &p)?;
            let all = read_records(&data)?;
            check_leakage(&all, None)?;
            let records: Vec<DatasetRecord> = all.into_iter().filter(|r| r.split == split).collect();
            if records.is_empty() {
                return Err(Failure::Run(format!("no {split} records in {}", data.display())));
            }
            let reports = pipeline(&s)?.run_all(&records, s.workers())?;
            let metrics = compute_metrics(&reports, &records)?;
            print_metrics(&metrics);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                write_jsonl(&dir.join("reports.jsonl"), &reports)?;
                let doc = json!({
                    "mode": s.pipeline.mode,
                    "split": split,
                    "config_fingerprint": s.pipeline.fingerprint(),
                    "metrics": metrics,
                });
                let pretty = serde_json::to_string_pretty(&doc).expect("metrics serialize");
                std::fs::write(dir.join("metrics.json"), pretty + "\n")?;
                std::fs::write(
                    dir.join("metrics.csv"),
                    metrics_csv(s.pipeline.mode.as_str(), &metrics)?,
                )?;
                println!("wrote {}", dir.display());
            }
            Ok(!s.strict || reports.iter().all(|r| !r.failed()))
        }
        Command::Audit {
            original,
            fixed,
            gold,
            exec,
        } => {
            let orig = read_source(&original)?;
            let fixed_text = std::fs::read_to_string(&fixed)?;
            let gold = gold.as_deref().map(parse_gold).transpose()?;
            let report = match exec {
                Some(cmd) => {
                    let cfg = DiffExecConfig::new(cmd.split_whitespace());
                    audit_with_exec(&orig, gold.as_ref(), &fixed_text, &cfg, &[])
                }
                None => audit(&orig, gold.as_ref(), &fixed_text),
            };
            println!("{}", serde_json::to_string_pretty(&report).expect("audit serializes"));
            let ok = if gold.is_some() {
                report.acceptable(s.pipeline.min_confinement)
            } else {
                report.parse_ok
            };
            Ok(!s.strict || ok)
        }
        Command::Patterns { out } => {
            let text = serde_json::to_string_pretty(&catalog_dump()).expect("catalog serializes") + "\n";
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("dce: {msg}");
            eprintln!("try `dce --help`");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("dce: {msg}");
            ExitCode::from(1)
        }
    }
}
