use std::collections::HashSet;
use std::time::Instant;

use dce_core::code_model::{render, Language};
use dce_core::forge::{catalog, insert, instantiate, prove_guard_false, BlockRole};
use dce_core::labels::DeadType;
use dce_core::lexer::{identifiers, scrub_lines};

/// Every pattern, 50 seeds, both languages, inserted into the fixture corpus:
/// the guard is provably false, fresh names avoid the host and stripping
/// the span restores it. Returns the number of mutants and the seconds taken.
pub fn run() -> (usize, f64) {
    let start = Instant::now();
    let mut checked = 0;
    for lang in Language::ALL {
        let hosts = super::corpus(lang);
        for spec in catalog() {
            for seed in 0..50u64 {
                let block = instantiate(spec.id, lang, seed).unwrap();
                assert!(prove_guard_false(&block), "{} {lang} {seed}", spec.id);
                let (name, host) = &hosts[(seed as usize + spec.id.len()) % hosts.len()];

                let host_idents: HashSet<String> = scrub_lines(host.texts(), lang)
                    .iter()
                    .flat_map(|l| identifiers(&l.code).into_iter().map(|(_, w)| w))
                    .collect();
                for fresh in &block.fresh_names {
                    assert!(!host_idents.contains(fresh), "{fresh} in {name}");
                }

                let rec = match insert(host, &block, seed) {
                    Ok(r) => r,
                    Err(e) => panic!("{} {lang} {seed} into {name}: {e}", spec.id),
                };
                let (s, e) = rec.inserted_span;
                assert_eq!(e - s + 1, block.lines.len());
                let stripped = rec.mutated.remove_span(s, e).unwrap();
                assert_eq!(render(&stripped), render(host));
                assert_eq!(stripped.texts(), host.texts());

                let expected: Vec<(usize, DeadType)> = block
                    .lines
                    .iter()
                    .enumerate()
                    .filter_map(|(k, l)| l.role.gold_type().map(|t| (s + k, t)))
                    .collect();
                let got: Vec<(usize, DeadType)> = rec.gold_lines.iter().map(|g| (g.index, g.kind)).collect();
                assert_eq!(got, expected);
                assert!(block.lines.iter().any(|l| l.role == BlockRole::Body));
                checked += 1;
            }
        }
    }
    (checked, start.elapsed().as_secs_f64())
}
