#![allow(dead_code)]

pub mod desk;
pub mod echo;
pub mod fake_server;
pub mod golden;
pub mod sweep;

use std::fs;
use std::path::{Path, PathBuf};

use dce_core::code_model::{split_lines, CodeSnippet, Language};
use dce_core::labels::DeadType;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Clean host files of one language, sorted by file name.
pub fn corpus(language: Language) -> Vec<(String, CodeSnippet)> {
    let dir = fixtures().join("corpus").join(language.as_str());
    let mut paths: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let text = fs::read_to_string(&p).unwrap();
            let snip = split_lines(&text, language).unwrap().with_origin(name.clone());
            (name, snip)
        })
        .collect()
}

/// The eleven-line `fill_str` example with an unused `s3` and a dead branch.
pub fn fill_str() -> CodeSnippet {
    let text = fs::read_to_string(fixtures().join("fill_str.py")).unwrap();
    split_lines(&text, Language::Python).unwrap()
}

/// File name, snippet and expected `(line, type)` marks.
pub type Annotated = (String, CodeSnippet, Vec<(usize, DeadType)>);

/// Snippets under `fixtures/oracle/<set>` with their `expect:` line marks.
pub fn annotated(set: &str) -> Vec<Annotated> {
    let dir = fixtures().join("oracle").join(set);
    let mut paths: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let lang = if name.ends_with(".java") {
                Language::Java
            } else {
                Language::Python
            };
            let text = fs::read_to_string(&p).unwrap();
            let snip = split_lines(&text, lang).unwrap().with_origin(name.clone());
            let marks = snip
                .lines()
                .iter()
                .filter_map(|l| {
                    let (_, mark) = l.text.split_once("expect: ")?;
                    let kind = match mark.trim() {
                        "unused" => DeadType::Unused,
                        "unreachable" => DeadType::Unreachable,
                        other => panic!("{name}: bad mark {other}"),
                    };
                    Some((l.index, kind))
                })
                .collect();
            (name, snip, marks)
        })
        .collect()
}
