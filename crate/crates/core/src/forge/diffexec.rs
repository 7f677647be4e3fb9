//! Differential execution: run host and mutant under a user-configured
//! interpreter command and compare what they print.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{render, CodeSnippet, Language};

#[derive(Debug, Error)]
pub enum DiffExecError {
    #[error("command template is empty")]
    EmptyCommand,
    #[error("command template has no `{{file}}` placeholder")]
    MissingPlaceholder,
    #[error("failed to run `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("run exceeded {0:?}")]
    Timeout(Duration),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How to run a snippet, e.g. `["python3", "{file}"]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffExecConfig {
    pub command: Vec<String>,
    /// Extension for the temporary source file; defaults by language.
    #[serde(default)]
    pub file_name: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    10_000
}

impl DiffExecConfig {
    pub fn new<S: Into<String>>(command: impl IntoIterator<Item = S>) -> Self {
        DiffExecConfig {
            command: command.into_iter().map(Into::into).collect(),
            file_name: None,
            timeout_ms: default_timeout_ms(),
        }
    }

    fn validate(&self) -> Result<(), DiffExecError> {
        if self.command.is_empty() {
            return Err(DiffExecError::EmptyCommand);
        }
        if !self.command.iter().any(|a| a.contains("{file}")) {
            return Err(DiffExecError::MissingPlaceholder);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub stdout: String,
    pub status: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    /// Inputs (fed on stdin) whose outcomes differ.
    pub mismatches: Vec<usize>,
    pub runs: usize,
}

impl DiffReport {
    pub fn equivalent(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn source_name(config: &DiffExecConfig, snippet: &CodeSnippet) -> String {
    if let Some(name) = &config.file_name {
        return name.clone();
    }
    match snippet.language() {
        Language::Python => "snippet.py".into(),
        // javac wants the file named after the public class
        Language::Java => {
            let class = snippet
                .texts()
                .iter()
                .find_map(|t| {
                    let mut words = t.split_whitespace();
                    while let Some(w) = words.next() {
                        if w == "class" {
                            return words.next().map(|n| n.trim_end_matches('{').to_string());
                        }
                    }
                    None
                })
                .unwrap_or_else(|| "Main".into());
            format!("{class}.java")
        }
    }
}

fn run_once(config: &DiffExecConfig, file: &Path, input: &str) -> Result<RunOutcome, DiffExecError> {
    let file_str = file.to_string_lossy();
    let args: Vec<String> = config.command.iter().map(|a| a.replace("{file}", &file_str)).collect();
    let mut child = Command::new(&args[0])
        .args(&args[1..])
        .current_dir(file.parent().unwrap_or(Path::new(".")))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|source| DiffExecError::Spawn {
            program: args[0].clone(),
            source,
        })?;
    if let Some(mut stdin) = child.stdin.take() {
        // a program that never reads stdin closes the pipe early
        let _ = stdin.write_all(input.as_bytes());
    }
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });
    let limit = Duration::from_millis(config.timeout_ms);
    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() > limit {
            let _ = child.kill();
            let _ = child.wait();
            return Err(DiffExecError::Timeout(limit));
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let out = reader.join().unwrap_or_default();
    Ok(RunOutcome {
        stdout: String::from_utf8_lossy(&out).into_owned(),
        status: status.code(),
    })
}

/// Runs `snippet` once per input.
pub fn run(config: &DiffExecConfig, snippet: &CodeSnippet, inputs: &[&str]) -> Result<Vec<RunOutcome>, DiffExecError> {
    config.validate()?;
    let dir = tempfile::tempdir()?;
    let file = dir.path().join(source_name(config, snippet));
    std::fs::write(&file, render(snippet))?;
    let inputs: &[&str] = if inputs.is_empty() { &[""] } else { inputs };
    inputs.iter().map(|i| run_once(config, &file, i)).collect()
}

/// Compares stdout and exit status of host and mutant on each input.
pub fn differential(
    config: &DiffExecConfig,
    host: &CodeSnippet,
    mutant: &CodeSnippet,
    inputs: &[&str],
) -> Result<DiffReport, DiffExecError> {
    let a = run(config, host, inputs)?;
    let b = run(config, mutant, inputs)?;
    let mismatches = a
        .iter()
        .zip(&b)
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(i, _)| i)
        .collect();
    Ok(DiffReport {
        mismatches,
        runs: a.len(),
    })
}
