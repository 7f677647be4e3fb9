use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{catalog, Family};

/// Family-stratified split of `(id, family)` items into (train, test).
///
/// A family with `m >= 2` members puts `round(m * f)` of them in train,
/// clamped to `1..=m-1`, so it shows up on both sides. Singleton families
/// then top train up toward `round(n * f)`; the rest go to test. Both
/// outputs are sorted.
pub fn split_ids<F: Ord + Copy>(items: &[(String, F)], seed: u64, train_fraction: f64) -> (Vec<String>, Vec<String>) {
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train_fraction must lie strictly between 0 and 1"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_family: BTreeMap<F, Vec<String>> = BTreeMap::new();
    for (id, fam) in items {
        by_family.entry(*fam).or_default().push(id.clone());
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut singletons = Vec::new();
    for (_, mut ids) in by_family {
        ids.sort();
        if ids.len() == 1 {
            singletons.extend(ids);
            continue;
        }
        ids.shuffle(&mut rng);
        let m = ids.len();
        let k = ((m as f64 * train_fraction).round() as usize).clamp(1, m - 1);
        train.extend(ids[..k].iter().cloned());
        test.extend(ids[k..].iter().cloned());
    }
    singletons.sort();
    singletons.shuffle(&mut rng);
    let target = (items.len() as f64 * train_fraction).round() as usize;
    for id in singletons {
        if train.len() < target {
            train.push(id);
        } else {
            test.push(id);
        }
    }
    train.sort();
    test.sort();
    (train, test)
}

/// Splits the built-in catalog's pattern ids.
pub fn split_patterns(seed: u64, train_fraction: f64) -> (Vec<String>, Vec<String>) {
    let items: Vec<(String, Family)> = catalog::ENTRIES.iter().map(|e| (e.id.to_string(), e.family)).collect();
    split_ids(&items, seed, train_fraction)
}
