use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::dataset::DatasetRecord;
use super::pipeline::AnalysisReport;
use super::HarnessError;
use crate::labels::{Class, DeadType};

/// Percentages in `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// Typed gold lines found in the candidate set, over all gold lines.
    /// Absent when no record has gold lines.
    pub line_recall: Option<f64>,
    /// Mean candidate-list length over (record, class) pairs with a
    /// nonempty list. Absent when nothing was flagged.
    pub mean_candidate_size: Option<f64>,
    pub gold_lines: usize,
    pub recalled_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub total: usize,
    pub accuracy: f64,
    pub normal: ClassMetrics,
    pub unused: ClassMetrics,
    pub unreachable: ClassMetrics,
    /// Rows are gold classes, columns predictions, both in `Class::ALL` order.
    pub confusion: [[usize; 3]; 3],
    pub localization: Localization,
}

impl Metrics {
    pub fn class(&self, c: Class) -> &ClassMetrics {
        match c {
            Class::Normal => &self.normal,
            Class::Unused => &self.unused,
            Class::Unreachable => &self.unreachable,
        }
    }
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Accuracy, per-class metrics in `Class::ALL` order, and the confusion matrix.
pub type Classification = (f64, [ClassMetrics; 3], [[usize; 3]; 3]);

/// Confusion matrix, per-class P/R/F1 and accuracy for aligned label lists.
pub fn classification(gold: &[Class], predicted: &[Class]) -> Result<Classification, HarnessError> {
    if gold.len() != predicted.len() {
        return Err(HarnessError::MisalignedInputs(format!(
            "{} gold labels vs {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    let mut confusion = [[0usize; 3]; 3];
    for (g, p) in gold.iter().zip(predicted) {
        confusion[g.position()][p.position()] += 1;
    }
    let per = Class::ALL.map(|c| {
        let k = c.position();
        let tp = confusion[k][k];
        let support: usize = confusion[k].iter().sum();
        let predicted: usize = confusion.iter().map(|row| row[k]).sum();
        let recall = pct(tp, support);
        let precision = pct(tp, predicted);
        ClassMetrics {
            recall,
            precision,
            f1: f1(precision, recall),
            support,
        }
    });
    let correct: usize = (0..3).map(|k| confusion[k][k]).sum();
    Ok((pct(correct, gold.len()), per, confusion))
}

/// Metrics over reports aligned to gold records by id.
pub fn compute_metrics(reports: &[AnalysisReport], golds: &[DatasetRecord]) -> Result<Metrics, HarnessError> {
    if reports.len() != golds.len() {
        return Err(HarnessError::MisalignedInputs(format!(
            "{} reports vs {} gold records",
            reports.len(),
            golds.len()
        )));
    }
    let by_id: HashMap<&str, &AnalysisReport> = reports.iter().map(|r| (r.record_id.as_str(), r)).collect();
    if by_id.len() != reports.len() {
        return Err(HarnessError::MisalignedInputs("duplicate report ids".into()));
    }
    let mut pairs = Vec::with_capacity(golds.len());
    for g in golds {
        let r = by_id
            .get(g.id.as_str())
            .ok_or_else(|| HarnessError::MisalignedInputs(format!("no report for record `{}`", g.id)))?;
        pairs.push((g, *r));
    }
    pairs.sort_by(|a, b| a.0.id.cmp(&b.0.id));

    let gold: Vec<Class> = pairs.iter().map(|(g, _)| g.class()).collect();
    let pred: Vec<Class> = pairs.iter().map(|(_, r)| r.predicted_label).collect();
    let (accuracy, [normal, unused, unreachable], confusion) = classification(&gold, &pred)?;

    let mut gold_lines = 0;
    let mut recalled_lines = 0;
    let mut flagged = 0usize;
    let mut flagged_size = 0usize;
    for (g, r) in &pairs {
        gold_lines += g.dead_lines.len();
        if let Some(c) = &r.candidates {
            recalled_lines += g
                .dead_lines
                .iter()
                .filter(|d| c.lines(d.kind).contains(&d.index))
                .count();
            for kind in DeadType::ALL {
                let n = c.lines(kind).len();
                if n > 0 {
                    flagged += 1;
                    flagged_size += n;
                }
            }
        }
    }
    Ok(Metrics {
        total: pairs.len(),
        accuracy,
        normal,
        unused,
        unreachable,
        confusion,
        localization: Localization {
            line_recall: (gold_lines > 0).then(|| recalled_lines as f64 / gold_lines as f64),
            mean_candidate_size: (flagged > 0).then(|| flagged_size as f64 / flagged as f64),
            gold_lines,
            recalled_lines,
        },
    })
}

/// One-row table: approach, then R/P/F1 for unused, unreachable and
/// normal, then accuracy.
pub fn metrics_csv(approach: &str, m: &Metrics) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["approach".to_string()];
    let mut row = vec![approach.to_string()];
    for c in [Class::Unused, Class::Unreachable, Class::Normal] {
        let cm = m.class(c);
        for (name, v) in [("r", cm.recall), ("p", cm.precision), ("f1", cm.f1)] {
            header.push(format!("{c}_{name}"));
            row.push(format!("{v:.2}"));
        }
    }
    header.push("accuracy".into());
    row.push(format!("{:.2}", m.accuracy));
    let err = |e: csv::Error| HarnessError::Format(e.to_string());
    w.write_record(&header).map_err(err)?;
    w.write_record(&row).map_err(err)?;
    let bytes = w.into_inner().map_err(|e| HarnessError::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
