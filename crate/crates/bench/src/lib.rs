//! Shared builders for the criterion benchmarks.

use mergeset::{SetFamily, SetId};

/// Build one set from sorted keys through the public api.
pub fn build_set(family: &mut SetFamily, keys: &[i64]) -> SetId {
    let mut id = family.make_set(keys[0]);
    for &k in &keys[1..] {
        let s = family.make_set(k);
        id = family.merge(id, s).expect("fresh ids");
    }
    id
}

/// Two alternating sets of `n` keys each spanning roughly `2^universe_bits`:
/// merging them produces `n` segments.
pub fn interleaved_pair(family: &mut SetFamily, n: usize, universe_bits: u32) -> (SetId, SetId) {
    let gap = ((1i64 << universe_bits) / (2 * n as i64)).max(1);
    let evens: Vec<i64> = (0..n as i64).map(|i| 2 * i * gap).collect();
    let odds: Vec<i64> = (0..n as i64).map(|i| (2 * i + 1) * gap).collect();
    (build_set(family, &evens), build_set(family, &odds))
}
