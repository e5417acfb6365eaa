//! Property tests for the tree primitives, each checked against an
//! independent traversal oracle.

use mergeset::check::{validate_tree, ValidationMode};
use mergeset::{Forest, TreeHandle};
use proptest::prelude::*;

fn sorted_unique_keys() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(-100_000i64..100_000, 1..64).prop_map(|s| s.into_iter().collect())
}

/// Gap-weighted build; the weighting matches what a dictionary set carries.
fn build(f: &mut Forest, keys: &[i64]) -> TreeHandle {
    let mut t = TreeHandle::EMPTY;
    for (i, &k) in keys.iter().enumerate() {
        let left = if i == 0 { 1 } else { (k - keys[i - 1]) as u128 };
        let right = if i + 1 == keys.len() {
            1
        } else {
            (keys[i + 1] - k) as u128
        };
        let leaf = f.make_leaf(k, left + right, 1);
        t = f.join(t, leaf);
    }
    t
}

fn keys_of(f: &Forest, t: TreeHandle) -> Vec<i64> {
    f.collect_entries(t).into_iter().map(|(k, _)| k).collect()
}

proptest! {
    #[test]
    fn split_preserves_leaf_sequence(keys in sorted_unique_keys(), j in -110_000i64..110_000) {
        let mut f = Forest::new();
        let t = build(&mut f, &keys);
        let (l, r) = f.split_at_key(t, j);
        let mut got = keys_of(&f, l);
        let boundary = got.len();
        got.extend(keys_of(&f, r));
        prop_assert_eq!(got, keys.clone());
        prop_assert_eq!(boundary, keys.iter().filter(|&&k| k <= j).count());
        prop_assert!(validate_tree(&f, l, ValidationMode::Structural).all_passed());
        prop_assert!(validate_tree(&f, r, ValidationMode::Structural).all_passed());
    }

    #[test]
    fn split_then_join_round_trips(keys in sorted_unique_keys(), j in -110_000i64..110_000) {
        let mut f = Forest::new();
        let t = build(&mut f, &keys);
        let weight_before = t.weight(&f);
        let (l, r) = f.split_at_key(t, j);
        let rejoined = f.join(l, r);
        prop_assert_eq!(keys_of(&f, rejoined), keys);
        prop_assert_eq!(rejoined.weight(&f), weight_before);
        prop_assert!(validate_tree(&f, rejoined, ValidationMode::Structural).all_passed());
    }

    #[test]
    fn join_rank_stays_within_one_of_max(ka in sorted_unique_keys(), kb in sorted_unique_keys()) {
        // Separate the key ranges so the join precondition holds.
        let mut f = Forest::new();
        let offset = 1_000_000;
        let kb: Vec<i64> = kb.iter().map(|k| k + offset).collect();
        let a = build(&mut f, &ka);
        let b = build(&mut f, &kb);
        let (ra, rb) = (a.rank(&f).unwrap(), b.rank(&f).unwrap());
        let joined = f.join(a, b);
        let r = joined.rank(&f).unwrap();
        let top = ra.max(rb);
        prop_assert!(r == top || r == top + 1, "rank {} after joining {} and {}", r, ra, rb);
    }

    #[test]
    fn reweight_keeps_weight_sums(keys in sorted_unique_keys(), pick in any::<prop::sample::Index>(), w in 1u32..1000) {
        let mut f = Forest::new();
        let t = build(&mut f, &keys);
        let key = keys[pick.index(keys.len())];
        let t = f.reweight_leaf(t, key, w as u128).unwrap();
        // Independent bottom-up recomputation of the total weight.
        let total: u128 = keys.iter().enumerate().map(|(i, &k)| {
            if k == key {
                w as u128
            } else {
                let left = if i == 0 { 1 } else { (k - keys[i - 1]) as u128 };
                let right = if i + 1 == keys.len() { 1 } else { (keys[i + 1] - k) as u128 };
                left + right
            }
        }).sum();
        prop_assert_eq!(t.weight(&f), total);
        prop_assert_eq!(keys_of(&f, t), keys);
        prop_assert!(validate_tree(&f, t, ValidationMode::Structural).all_passed());
    }

    #[test]
    fn shift_commutes_with_search(keys in sorted_unique_keys(), j in -110_000i64..110_000, d in -100_000i64..100_000) {
        let mut f = Forest::new();
        let t = build(&mut f, &keys);
        let before = f.search_le(t, j).map(|(k, _)| k);
        let t = f.shift_tree(t, d);
        let after = f.search_le(t, j + d).map(|(k, _)| k);
        prop_assert_eq!(after, before.map(|k| k + d));
    }

    #[test]
    fn finger_pred_agrees_with_root_search(
        keys in sorted_unique_keys(),
        start in any::<prop::sample::Index>(),
        j in -110_000i64..110_000,
    ) {
        let mut f = Forest::new();
        let t = build(&mut f, &keys);
        let start_key = keys[start.index(keys.len())];
        // Reach the finger through root-originated walks so offsets along
        // its path are pushed.
        let leaf = {
            let mut cur = f.leftmost_leaf(t.root().unwrap());
            while f.node(cur).key() < start_key {
                cur = f.leaf_successor(cur).unwrap();
            }
            cur
        };
        let hit = f.finger_pred(leaf, j);
        if start_key > j {
            // Nothing at or right of the finger can be ≤ j.
            prop_assert!(hit.leaf.is_none());
        } else {
            // The start key itself is a candidate, so the global
            // predecessor sits at or right of the finger and both searches
            // must agree.
            let expected = f.search_le(t, j).map(|(k, _)| k).expect("start key qualifies");
            prop_assert_eq!(f.node(hit.leaf.expect("start key qualifies")).key(), expected);
        }
    }
}

/// Resolved keys are invariant under navigation-driven offset pushes.
#[test]
fn push_down_preserves_resolution() {
    let mut f = Forest::new();
    let keys: Vec<i64> = (0..100).map(|i| i * 7).collect();
    let t = build(&mut f, &keys);
    let t = f.shift_tree(t, 12345);
    let expected: Vec<i64> = keys.iter().map(|k| k + 12345).collect();
    // collect_entries resolves read-only, before any push.
    assert_eq!(keys_of(&f, t), expected);
    // Navigation pushes offsets down the searched paths.
    for probe in [-1, 0, 350, 12345, 700 * 7 + 12345] {
        let _ = f.search_le(t, probe);
    }
    assert_eq!(keys_of(&f, t), expected);
    assert!(validate_tree(&f, t, ValidationMode::Structural).all_passed());
}

/// Finger searches agree with root searches over a thousand random
/// (tree, start, target) triples.
#[test]
fn finger_pred_thousand_triples() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(271);
    for _ in 0..1000 {
        let mut f = Forest::new();
        let len = rng.random_range(1..80);
        let mut keys: Vec<i64> = (0..len)
            .map(|_| rng.random_range(-50_000..50_000))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let t = build(&mut f, &keys);
        let start_key = keys[rng.random_range(0..keys.len())];
        let mut leaf = f.leftmost_leaf(t.root().unwrap());
        while f.node(leaf).key() < start_key {
            leaf = f.leaf_successor(leaf).unwrap();
        }
        let j = rng.random_range(-60_000i64..60_000);
        let hit = f.finger_pred(leaf, j);
        if start_key > j {
            assert!(hit.leaf.is_none());
        } else {
            let expected = f.search_le(t, j).map(|(k, _)| k).unwrap();
            assert_eq!(f.node(hit.leaf.unwrap()).key(), expected);
        }
    }
}
