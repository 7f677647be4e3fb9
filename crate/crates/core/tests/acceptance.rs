//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! fails. Runs without a network or a trained classifier.

mod common;

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashSet};
use std::hash::{Hash, Hasher};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::desk::{dataset, full_coverage, run, run_with};
use common::echo::EchoTransport;
use dce_core::attribution::{attribute, is_eligible, perturb, select_candidates, AttributionConfig, AttributionScore};
use dce_core::classifier::{ClassProbabilities, Classifier, ClassifierError, ClassifierKind, FixtureClassifier};
use dce_core::code_model::{CodeSnippet, Language};
use dce_core::forge::{catalog, injected_unused, insert, instantiate};
use dce_core::harness::{
    check_leakage, compute_metrics, metrics_csv, synth_dataset, AnalysisReport, DatasetRecord, HarnessError, Metrics,
    Mode, PatternSplit, Split, SynthOptions,
};
use dce_core::labels::{Class, DeadType, SnippetLabel};
use dce_core::oracle::{find_naive_unreachable, find_unused};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Up to 50 mutated corpus hosts of at most 30 lines, half with an
/// unreachable pattern and half with injected unused lines.
fn small_mutants() -> Vec<(CodeSnippet, Vec<usize>, Vec<usize>)> {
    let hosts: Vec<CodeSnippet> = common::desk::all_hosts();
    let specs = catalog();
    let mut out = Vec::new();
    for k in 0..10_000u64 {
        if out.len() == 50 {
            break;
        }
        let host = &hosts[k as usize % hosts.len()];
        let block = if k % 2 == 0 {
            match instantiate(specs[k as usize % specs.len()].id, host.language(), k) {
                Ok(b) => b,
                Err(_) => continue,
            }
        } else {
            injected_unused(host.language(), k)
        };
        let Ok(rec) = insert(host, &block, k) else {
            continue;
        };
        if rec.mutated.len() > 30 {
            continue;
        }
        let of = |t: DeadType| rec.gold_lines.iter().filter(|g| g.kind == t).map(|g| g.index).collect();
        out.push((rec.mutated.clone(), of(DeadType::Unused), of(DeadType::Unreachable)));
    }
    out
}

fn attribution_oracle() -> Result<String, String> {
    let start = Instant::now();
    let cases = small_mutants();
    ensure(cases.len() == 50, || {
        format!("only {} snippets of at most 30 lines", cases.len())
    })?;
    let cfg = AttributionConfig::default();
    let mut compared = 0;
    for (n, (snip, unused, unreachable)) in cases.iter().enumerate() {
        let clf = FixtureClassifier::from_indices(snip, unused, unreachable);
        let got = attribute(snip, &clf, &cfg).map_err(|e| e.to_string())?;
        let base = clf.classify(snip).map_err(|e| e.to_string())?;
        for line in snip.lines() {
            let want = match perturb(snip, line.index, &cfg.mask_token) {
                Ok(p) if is_eligible(line.kind) => {
                    let q = clf.classify(&p).map_err(|e| e.to_string())?;
                    (
                        (base.p_unused - q.p_unused).max(0.0),
                        (base.p_unreachable - q.p_unreachable).max(0.0),
                    )
                }
                _ => (0.0, 0.0),
            };
            let g = got[line.index - 1];
            ensure(
                g.index == line.index
                    && (g.a_unused - want.0).abs() <= 1e-9
                    && (g.a_unreachable - want.1).abs() <= 1e-9,
                || format!("snippet {n} line {}: {g:?} vs {want:?}", line.index),
            )?;
            compared += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1}s"))?;
    Ok(format!("50 snippets, {compared} lines within 1e-9 in {secs:.2}s"))
}

/// Pseudo-random classifier: each distinct snippet text gets its own raw
/// masses, including zeros, negatives and extreme magnitudes.
struct NoisyClassifier {
    seed: u64,
    outputs: Mutex<Vec<ClassProbabilities>>,
}

impl Classifier for NoisyClassifier {
    fn kind(&self) -> ClassifierKind {
        ClassifierKind::Fixture
    }

    fn classify(&self, snippet: &CodeSnippet) -> Result<ClassProbabilities, ClassifierError> {
        let mut h = DefaultHasher::new();
        self.seed.hash(&mut h);
        snippet.texts().hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let mut mass = || match rng.gen_range(0..8) {
            0 => 0.0,
            1 => -rng.gen::<f64>(),
            2 => rng.gen::<f64>() * 1e6,
            3 => rng.gen::<f64>() * 1e-300,
            _ => rng.gen::<f64>(),
        };
        let p = ClassProbabilities::normalized(mass(), mass(), mass());
        self.outputs.lock().unwrap().push(p);
        Ok(p)
    }
}

fn clamp_and_simplex() -> Result<String, String> {
    let snippets: Vec<CodeSnippet> = small_mutants().into_iter().map(|(s, _, _)| s).collect();
    let cfg = AttributionConfig::default();
    let mut outputs = 0;
    let mut runs = 0u64;
    while outputs < 10_000 {
        let snip = &snippets[runs as usize % snippets.len()];
        let clf = NoisyClassifier {
            seed: runs,
            outputs: Mutex::new(Vec::new()),
        };
        let scores = attribute(snip, &clf, &cfg).map_err(|e| e.to_string())?;
        let seen = clf.outputs.into_inner().unwrap();
        for p in &seen {
            ensure(p.is_simplex(), || format!("run {runs}: not on the simplex: {p:?}"))?;
        }
        let base = clf_probe(runs, snip);
        for s in &scores {
            for (a, b) in [(s.a_unused, base.p_unused), (s.a_unreachable, base.p_unreachable)] {
                ensure((0.0..=1.0).contains(&a) && a <= b + 1e-12, || {
                    format!("run {runs} line {}: score {a} outside [0, {b}]", s.index)
                })?;
            }
            let line = snip.line(s.index).unwrap();
            if let (true, Ok(p)) = (is_eligible(line.kind), perturb(snip, s.index, &cfg.mask_token)) {
                let q = clf_probe(runs, &p);
                let want = (
                    (base.p_unused - q.p_unused).max(0.0),
                    (base.p_unreachable - q.p_unreachable).max(0.0),
                );
                ensure(s.a_unused == want.0 && s.a_unreachable == want.1, || {
                    format!("run {runs} line {}: clamp mismatch", s.index)
                })?;
            }
        }
        outputs += seen.len();
        runs += 1;
    }
    Ok(format!(
        "{outputs} classifier outputs over {runs} attributions, zero violations"
    ))
}

fn clf_probe(seed: u64, snip: &CodeSnippet) -> ClassProbabilities {
    let c = NoisyClassifier {
        seed,
        outputs: Mutex::new(Vec::new()),
    };
    c.classify(snip).unwrap()
}

fn soft_threshold_laws() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let eps = 0.02;
    for trial in 0..1000 {
        let n = rng.gen_range(1..=64);
        // a coarse grid makes ties common
        let grid = rng.gen_bool(0.5);
        let scores: Vec<AttributionScore> = (1..=n)
            .map(|index| {
                let mut v = || {
                    if grid {
                        rng.gen_range(0..5) as f64 / 4.0
                    } else {
                        rng.gen::<f64>() * rng.gen::<f64>()
                    }
                };
                AttributionScore {
                    index,
                    a_unused: v(),
                    a_unreachable: v(),
                }
            })
            .collect();
        let t1 = rng.gen_range(1.0..4.0);
        let t2 = t1 + rng.gen_range(0.0..4.0);
        let s1 = select_candidates(&scores, t1, eps).map_err(|e| e.to_string())?;
        let s2 = select_candidates(&scores, t2, eps).map_err(|e| e.to_string())?;
        let one = select_candidates(&scores, 1.0, eps).map_err(|e| e.to_string())?;
        for kind in DeadType::ALL {
            let max = scores.iter().map(|s| s.get(kind)).fold(0.0, f64::max);
            let argmax: BTreeSet<usize> = scores.iter().filter(|s| s.get(kind) == max).map(|s| s.index).collect();
            let a: BTreeSet<usize> = s1.lines(kind).iter().copied().collect();
            let b: BTreeSet<usize> = s2.lines(kind).iter().copied().collect();
            let c: BTreeSet<usize> = one.lines(kind).iter().copied().collect();
            if max <= eps {
                ensure(a.is_empty() && b.is_empty() && c.is_empty(), || {
                    format!("trial {trial}: flagged below epsilon")
                })?;
                continue;
            }
            ensure(argmax.is_subset(&a), || {
                format!("trial {trial} {kind}: argmax not selected")
            })?;
            ensure(a.is_subset(&b), || {
                format!("trial {trial} {kind}: tau {t1} -> {t2} not monotone")
            })?;
            ensure(c == argmax, || {
                format!("trial {trial} {kind}: tau 1 kept {c:?}, argmax {argmax:?}")
            })?;
            let expected: BTreeSet<usize> = scores
                .iter()
                .filter(|s| s.get(kind) >= max / t1)
                .map(|s| s.index)
                .collect();
            ensure(a == expected, || format!("trial {trial} {kind}: {a:?} vs {expected:?}"))?;
        }
    }
    Ok("1000 trials, n <= 64, both classes".into())
}

fn pattern_sweep() -> Result<String, String> {
    let (checked, secs) = common::sweep::run();
    let want = catalog().len() * 50 * 2;
    ensure(checked == want, || format!("{checked} of {want} mutants"))?;
    ensure(secs < 30.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{} patterns x 50 seeds x 2 languages in {secs:.1}s",
        catalog().len()
    ))
}

fn test_split(variants: usize) -> Vec<DatasetRecord> {
    dataset(7, variants)
        .into_iter()
        .filter(|r| r.split == Split::Test)
        .collect()
}

fn fixture_recall(
    set: &str,
    detect: fn(&CodeSnippet) -> Vec<dce_core::oracle::LineFinding>,
) -> Result<(usize, usize), String> {
    let (mut want, mut hit) = (0, 0);
    for (name, snip, marks) in common::annotated(set) {
        let found: HashSet<(usize, DeadType)> = detect(&snip).iter().map(|f| (f.index, f.kind)).collect();
        want += marks.len();
        hit += marks.iter().filter(|m| found.contains(m)).count();
        ensure(found.len() == marks.len(), || {
            format!("{set}/{name}: {} findings for {} marks", found.len(), marks.len())
        })?;
    }
    Ok((hit, want))
}

fn tool_gap() -> Result<String, String> {
    let test = test_split(full_coverage());
    let reports = run(Mode::Oracle, ClassifierKind::Heuristic, &test);
    let m = compute_metrics(&reports, &test).map_err(|e| e.to_string())?;
    let (u_hit, u_all) = fixture_recall("unused", find_unused)?;
    let (n_hit, n_all) = fixture_recall("naive", find_naive_unreachable)?;
    ensure(u_hit == u_all, || format!("unused fixtures {u_hit}/{u_all}"))?;
    ensure(n_hit == n_all, || format!("naive fixtures {n_hit}/{n_all}"))?;
    ensure(m.unused.recall == 100.0, || {
        format!("test split unused recall {:.2}", m.unused.recall)
    })?;
    ensure(m.unreachable.recall <= 20.0, || {
        format!("test split unreachable recall {:.2}", m.unreachable.recall)
    })?;
    Ok(format!(
        "unused fixtures {u_hit}/{u_all}, naive fixtures {n_hit}/{n_all}, test split recall unused {:.1} unreachable {:.1}",
        m.unused.recall, m.unreachable.recall
    ))
}

fn localization() -> Result<String, String> {
    let test = test_split(full_coverage());
    let reports = run(Mode::NoLlm, ClassifierKind::Fixture, &test);
    let loc = compute_metrics(&reports, &test)
        .map_err(|e| e.to_string())?
        .localization;
    let recall = loc.line_recall.ok_or("no gold lines")?;
    let size = loc.mean_candidate_size.ok_or("nothing flagged")?;
    ensure(recall >= 0.95 && size <= 3.0, || {
        format!("recall {recall:.3}, mean size {size:.2}")
    })?;
    Ok(format!(
        "line recall {recall:.3}, mean candidate size {size:.2} over {} records",
        test.len()
    ))
}

/// Accuracy, confusion, and (recall, precision, F1) per class.
type Expected = (f64, [[usize; 3]; 3], [(f64, f64, f64); 3]);

fn brute_force(gold: &[Class], pred: &[Class]) -> Expected {
    let mut confusion = [[0usize; 3]; 3];
    for (gi, g) in Class::ALL.iter().enumerate() {
        for (pi, p) in Class::ALL.iter().enumerate() {
            confusion[gi][pi] = gold.iter().zip(pred).filter(|(a, b)| *a == g && *b == p).count();
        }
    }
    let ratio = |a: usize, b: usize| {
        if b == 0 {
            0.0
        } else {
            100.0 * a as f64 / b as f64
        }
    };
    let per = Class::ALL.map(|c| {
        let tp = gold.iter().zip(pred).filter(|(g, p)| **g == c && **p == c).count();
        let fp = gold.iter().zip(pred).filter(|(g, p)| **g != c && **p == c).count();
        let fn_ = gold.iter().zip(pred).filter(|(g, p)| **g == c && **p != c).count();
        let (p, r) = (ratio(tp, tp + fp), ratio(tp, tp + fn_));
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        (r, p, f)
    });
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count();
    (ratio(correct, gold.len()), confusion, per)
}

fn label_record(id: &str, c: Class) -> DatasetRecord {
    let label = match c {
        Class::Normal => SnippetLabel::Normal,
        Class::Unused => SnippetLabel::Unused,
        Class::Unreachable => SnippetLabel::Unreachable,
    };
    DatasetRecord {
        id: id.into(),
        language: Language::Python,
        code: "x = 1\n".into(),
        label,
        dead_lines: Vec::new(),
        pattern_id: None,
        split: Split::Test,
    }
}

fn metrics_correctness() -> Result<String, String> {
    let template = run(
        Mode::NoLlm,
        ClassifierKind::Heuristic,
        &[label_record("t", Class::Normal)],
    )
    .remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for v in 0..200 {
        let n = rng.gen_range(1..=120);
        // skewed draws leave some classes empty
        let pick = |rng: &mut ChaCha8Rng| {
            let classes = if rng.gen_bool(0.2) { 2 } else { 3 };
            Class::ALL[rng.gen_range(0..classes)]
        };
        let gold: Vec<Class> = (0..n).map(|_| pick(&mut rng)).collect();
        let pred: Vec<Class> = (0..n).map(|_| pick(&mut rng)).collect();
        let records: Vec<DatasetRecord> = gold
            .iter()
            .enumerate()
            .map(|(i, c)| label_record(&format!("r{i:03}"), *c))
            .collect();
        let mut reports: Vec<AnalysisReport> = pred
            .iter()
            .enumerate()
            .map(|(i, c)| AnalysisReport {
                record_id: format!("r{i:03}"),
                predicted_label: *c,
                ..template.clone()
            })
            .collect();
        reports.reverse();
        let m = compute_metrics(&reports, &records).map_err(|e| e.to_string())?;
        let (acc, confusion, per) = brute_force(&gold, &pred);
        ensure(m.confusion == confusion, || format!("vector {v}: confusion differs"))?;
        ensure((m.accuracy - acc).abs() <= 1e-9, || format!("vector {v}: accuracy"))?;
        for (c, (r, p, f)) in Class::ALL.iter().zip(per) {
            let got = m.class(*c);
            ensure(
                (got.recall - r).abs() <= 1e-9 && (got.precision - p).abs() <= 1e-9 && (got.f1 - f).abs() <= 1e-9,
                || format!("vector {v} {c}: {got:?} vs R {r} P {p} F1 {f}"),
            )?;
        }
    }
    Ok("200 random label vectors match the brute-force confusion".into())
}

fn hermetic_analyze() -> Result<String, String> {
    let n = common::golden::check()?;
    ensure(n == 12, || format!("{n} reports"))?;
    Ok("12 records, replay transport, byte-identical to committed reports".into())
}

fn schema_complete(m: &Metrics) -> Result<(), String> {
    let v = serde_json::to_value(m).map_err(|e| e.to_string())?;
    for key in ["total", "accuracy", "confusion", "localization"] {
        ensure(v.get(key).is_some(), || format!("metrics lack {key}"))?;
    }
    for c in Class::ALL {
        for key in ["recall", "precision", "f1", "support"] {
            ensure(v[c.as_str()].get(key).is_some(), || format!("metrics lack {c}.{key}"))?;
        }
    }
    let csv = metrics_csv("x", m).map_err(|e| e.to_string())?;
    let rows: Vec<&str> = csv.lines().collect();
    ensure(
        rows.len() == 2 && rows.iter().all(|r| r.split(',').count() == 11),
        || format!("bad csv: {csv}"),
    )
}

fn ablation() -> Result<String, String> {
    let records = dataset(7, 1);
    let mut recall = Vec::new();
    for mode in [Mode::Full, Mode::NoPivot, Mode::NoLlm, Mode::NoAttribution] {
        let transport: Option<Box<dyn dce_core::llm::Transport>> =
            mode.uses_llm().then(|| Box::new(EchoTransport::new(&records)) as _);
        let reports = run_with(mode, ClassifierKind::Fixture, &records, transport);
        let failed: Vec<&str> = reports
            .iter()
            .filter(|r| r.failed())
            .map(|r| r.record_id.as_str())
            .collect();
        ensure(failed.is_empty(), || format!("{mode}: failures on {failed:?}"))?;
        let m = compute_metrics(&reports, &records).map_err(|e| e.to_string())?;
        schema_complete(&m)?;
        if mode == Mode::NoLlm {
            ensure(
                reports
                    .iter()
                    .all(|r| r.verdict.is_none() && r.findings.iter().all(|f| f.explanation.is_none())),
                || "no_llm emitted an explanation".into(),
            )?;
        }
        recall.push((mode, m.localization.line_recall.unwrap_or(0.0)));
    }
    let full = recall[0].1;
    let no_attr = recall[3].1;
    ensure(full >= no_attr, || {
        format!("full {full:.3} < no_attribution {no_attr:.3}")
    })?;
    let shown: Vec<String> = recall.iter().map(|(m, r)| format!("{m} {r:.2}")).collect();
    Ok(format!(
        "{} records; localization recall {}",
        records.len(),
        shown.join(", ")
    ))
}

fn leakage_guard() -> Result<String, String> {
    let mut split = PatternSplit::from_catalog(7, 0.5);
    split.train.push(split.test[0].clone());
    match synth_dataset(&common::desk::all_hosts(), &SynthOptions::default(), &split) {
        Err(HarnessError::PatternLeakage(_)) => {}
        other => return Err(format!("overlapping split accepted: {:?}", other.map(|r| r.len()))),
    }
    let mut records = dataset(7, 1);
    let leaked = records
        .iter()
        .find(|r| r.split == Split::Test && r.pattern_id.is_some())
        .and_then(|r| r.pattern_id.clone())
        .ok_or("no test pattern")?;
    let victim = records
        .iter_mut()
        .find(|r| r.split == Split::Train && r.pattern_id.is_some())
        .ok_or("no train pattern")?;
    victim.pattern_id = Some(leaked);
    match check_leakage(&records, None) {
        Err(HarnessError::PatternLeakage(msg)) => Ok(format!("rejected: {msg}")),
        other => Err(format!("leaky records accepted: {other:?}")),
    }
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("attribution oracle equivalence", attribution_oracle),
        ("clamp and simplex invariants", clamp_and_simplex),
        ("soft-threshold laws", soft_threshold_laws),
        ("pattern safety sweep", pattern_sweep),
        ("tool-gap analog", tool_gap),
        ("localization quality", localization),
        ("metrics correctness", metrics_correctness),
        ("hermetic end-to-end analyze", hermetic_analyze),
        ("ablation harness parity", ablation),
        ("pattern-leakage guard", leakage_guard),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
