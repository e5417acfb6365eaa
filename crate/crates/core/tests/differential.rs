//! Differential fuzzing of the dictionary against the brute-force oracle,
//! with full invariant validation along the way.

use mergeset::check::ValidationMode;
use mergeset::oracle::OracleFamily;
use mergeset::{SetFamily, SetId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
enum OpSpec {
    MakeSet(i64),
    Search(usize, i64),
    Split(usize, i64),
    Merge(usize, usize),
    Shift(usize, i32),
}

fn op_strategy(universe: i64) -> impl Strategy<Value = OpSpec> {
    prop_oneof![
        3 => (-universe..universe).prop_map(OpSpec::MakeSet),
        2 => (any::<prop::sample::Index>(), -universe..universe)
            .prop_map(|(i, j)| OpSpec::Search(i.index(1 << 16), j)),
        2 => (any::<prop::sample::Index>(), -universe..universe)
            .prop_map(|(i, j)| OpSpec::Split(i.index(1 << 16), j)),
        3 => (any::<prop::sample::Index>(), any::<prop::sample::Index>())
            .prop_map(|(i, j)| OpSpec::Merge(i.index(1 << 16), j.index(1 << 16))),
        1 => (any::<prop::sample::Index>(), -1000i32..1000i32)
            .prop_map(|(i, d)| OpSpec::Shift(i.index(1 << 16), d)),
    ]
}

/// Apply one spec to both engines, panicking on any observable divergence.
fn apply_both(
    engine: &mut SetFamily,
    oracle: &mut OracleFamily,
    ids: &mut Vec<SetId>,
    op: &OpSpec,
) {
    match *op {
        OpSpec::MakeSet(key) => {
            let a = engine.make_set(key);
            let b = oracle.make_set(key);
            assert_eq!(a, b, "id policy divergence");
            ids.push(a);
        }
        OpSpec::Search(i, j) => {
            if ids.is_empty() {
                return;
            }
            let id = ids[i % ids.len()];
            assert_eq!(
                engine.search(id, j).unwrap(),
                oracle.search(id, j).unwrap(),
                "search({id}, {j}) diverged"
            );
        }
        OpSpec::Split(i, j) => {
            if ids.is_empty() {
                return;
            }
            let id = ids[i % ids.len()];
            let e = engine.split(id, j).unwrap();
            let o = oracle.split(id, j).unwrap();
            assert_eq!(e, o, "split id divergence");
            ids.retain(|&x| x != id);
            ids.push(e.0);
            ids.push(e.1);
        }
        OpSpec::Merge(i, j) => {
            if ids.len() < 2 {
                return;
            }
            let a = ids[i % ids.len()];
            let b = ids[j % ids.len()];
            if a == b {
                return;
            }
            let e = engine.merge(a, b).unwrap();
            let o = oracle.merge(a, b).unwrap();
            assert_eq!(e, o, "merge id divergence");
            ids.retain(|&x| x != a && x != b);
            ids.push(e);
        }
        OpSpec::Shift(i, d) => {
            if ids.is_empty() {
                return;
            }
            let id = ids[i % ids.len()];
            engine.shift(id, d as i64).unwrap();
            oracle.shift(id, d as i64).unwrap();
        }
    }
}

fn assert_families_equal(engine: &SetFamily, oracle: &OracleFamily) {
    let live = engine.live_ids();
    assert_eq!(live, oracle.live_ids(), "live id sets diverged");
    for id in live {
        assert_eq!(
            engine.entries(id).unwrap().as_slice(),
            oracle.entries(id).unwrap(),
            "content of {id} diverged"
        );
    }
}

fn validate_everything(engine: &SetFamily) {
    if let Err((id, report)) = engine.validate_all(ValidationMode::Full) {
        panic!("set {id} violates invariants:\n{report}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_oracle(specs in prop::collection::vec(op_strategy(2000), 1..120)) {
        let mut engine = SetFamily::new();
        let mut oracle = OracleFamily::new();
        let mut ids = Vec::new();
        for spec in &specs {
            apply_both(&mut engine, &mut oracle, &mut ids, spec);
        }
        assert_families_equal(&engine, &oracle);
        validate_everything(&engine);
    }
}

/// Longer seeded runs with validation after every operation.
#[test]
fn seeded_differential_with_per_op_validation() {
    for seed in 0..4u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut engine = SetFamily::new();
        let mut oracle = OracleFamily::new();
        let mut ids: Vec<SetId> = Vec::new();
        for step in 0..800 {
            let universe: i64 = 1 << rng.random_range(4..16);
            let spec = match rng.random_range(0..10) {
                0..=2 => OpSpec::MakeSet(rng.random_range(-universe..universe)),
                3..=4 => OpSpec::Search(
                    rng.random_range(0..1000),
                    rng.random_range(-universe..universe),
                ),
                5..=6 => OpSpec::Split(
                    rng.random_range(0..1000),
                    rng.random_range(-universe..universe),
                ),
                7..=8 => OpSpec::Merge(rng.random_range(0..1000), rng.random_range(0..1000)),
                _ => OpSpec::Shift(rng.random_range(0..1000), rng.random_range(-1000..1000)),
            };
            apply_both(&mut engine, &mut oracle, &mut ids, &spec);
            if let Err((id, report)) = engine.validate_all(ValidationMode::Full) {
                panic!("seed {seed} step {step}: set {id} violates invariants:\n{report}");
            }
        }
        assert_families_equal(&engine, &oracle);
    }
}

/// The work counter is deterministic: identical runs count identical steps.
#[test]
fn work_counter_is_deterministic() {
    let run = || {
        let mut engine = SetFamily::new();
        let mut ids = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            if ids.len() < 2 || rng.random_bool(0.4) {
                ids.push(engine.make_set(rng.random_range(-5000i64..5000)));
            } else {
                let a = ids.swap_remove(rng.random_range(0..ids.len()));
                let b = ids.swap_remove(rng.random_range(0..ids.len()));
                ids.push(engine.merge(a, b).unwrap());
            }
        }
        engine.work_steps()
    };
    assert_eq!(run(), run());
}

/// Families (and the trees they own) move between threads whole; there is
/// no shared-mutation support, so Send is all that is promised.
#[test]
fn families_are_send() {
    fn assert_send<T: Send>() {}
    assert_send::<SetFamily>();
    assert_send::<mergeset::oracle::OracleFamily>();
    assert_send::<mergeset::baseline::BaselineFamily>();

    let mut family = SetFamily::new();
    let a = family.make_set(1);
    let b = family.make_set(10);
    family.merge(a, b).unwrap();
    let handle = std::thread::spawn(move || {
        let id = family.live_ids()[0];
        family.search(id, 5).unwrap()
    });
    assert_eq!(handle.join().unwrap(), Some(1));
}

/// Merges dismantle the source trees completely: the arena holds only the
/// live leaves and their internal nodes, never leftover path skeletons.
#[test]
fn merge_frees_all_scaffolding() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut engine = SetFamily::new();
    let mut oracle = OracleFamily::new();
    let mut ids: Vec<SetId> = Vec::new();
    for _ in 0..1500 {
        let spec = match rng.random_range(0..8) {
            0..=2 => OpSpec::MakeSet(rng.random_range(-10_000..10_000)),
            3..=5 => OpSpec::Merge(rng.random_range(0..1000), rng.random_range(0..1000)),
            _ => OpSpec::Split(rng.random_range(0..1000), rng.random_range(-10_000..10_000)),
        };
        apply_both(&mut engine, &mut oracle, &mut ids, &spec);
    }
    let total_keys: usize = engine
        .live_ids()
        .iter()
        .map(|&id| engine.entries(id).unwrap().len())
        .sum();
    let live = engine.forest().live_nodes();
    assert!(
        live < 2 * total_keys.max(1),
        "{live} live nodes for {total_keys} keys: scaffolding leaked"
    );
}

/// Keys at the far ends of the i64 range: gaps near 2^64 must survive the
/// weight arithmetic, and shifts across the whole range must stay exact.
#[test]
fn extreme_key_ranges() {
    let mut engine = SetFamily::new();
    let a = engine.make_set(i64::MIN + 1);
    let b = engine.make_set(i64::MAX - 1);
    let c = engine.merge(a, b).unwrap();
    assert_eq!(
        engine.entries(c).unwrap(),
        vec![(i64::MIN + 1, 1), (i64::MAX - 1, 1)]
    );
    if let Err((id, report)) = engine.validate_all(ValidationMode::Full) {
        panic!("set {id} invalid:\n{report}");
    }
    let gap = (i64::MAX - 1) as i128 - (i64::MIN + 1) as i128;
    let stats = engine.set_stats(c).unwrap();
    assert_eq!(stats.weight, 2 * (gap as u128) + 2);
    assert_eq!(stats.universe, gap as u64);

    // Drag the whole set to each end of the range and back.
    engine.shift(c, 1).unwrap();
    assert_eq!(engine.search(c, i64::MAX).unwrap(), Some(i64::MAX));
    assert!(matches!(engine.shift(c, 1), Err(mergeset::Error::Overflow)));
    engine.shift(c, -2).unwrap();
    assert_eq!(
        engine.entries(c).unwrap(),
        vec![(i64::MIN, 1), (i64::MAX - 2, 1)]
    );
    let (lo, hi) = engine.split(c, 0).unwrap();
    assert_eq!(engine.entries(lo).unwrap(), vec![(i64::MIN, 1)]);
    assert_eq!(engine.entries(hi).unwrap(), vec![(i64::MAX - 2, 1)]);
    if let Err((id, report)) = engine.validate_all(ValidationMode::Full) {
        panic!("set {id} invalid after split:\n{report}");
    }
}
