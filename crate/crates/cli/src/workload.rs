//! Deterministic workload generators. Every generator tracks live sets
//! through the reference oracle while emitting, so the produced traces are
//! always valid (ids live, shifts in range) and reproducible from the seed.

use mergeset::oracle::OracleFamily;
use mergeset::trace::{format_trace, TraceOp};
use mergeset::SetId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum WorkloadKind {
    /// Scattered singletons merged into overlapping, interleaved sets.
    InterleaveMerge,
    /// Balanced mix of merge, split, and search over a stable population.
    UnionSplitFind,
    /// At least half of the operations translate whole sets.
    ShiftHeavy,
    /// Repeatedly halve a block by key, shift the upper half into the gaps
    /// of the lower, and merge back: every merge alternates maximally, so
    /// the segment count tracks the set size.
    AdversarialK,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 4] = [
        WorkloadKind::InterleaveMerge,
        WorkloadKind::UnionSplitFind,
        WorkloadKind::ShiftHeavy,
        WorkloadKind::AdversarialK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorkloadKind::InterleaveMerge => "interleave-merge",
            WorkloadKind::UnionSplitFind => "union-split-find",
            WorkloadKind::ShiftHeavy => "shift-heavy",
            WorkloadKind::AdversarialK => "adversarial-k",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WorkloadParams {
    /// Target number of live sets (adversarial-k: elements per block half).
    pub num_sets: usize,
    /// Keys are drawn from roughly `[0, 2^universe_bits)`.
    pub universe_bits: u32,
    /// Number of operations to emit.
    pub ops: usize,
}

struct Gen {
    rng: ChaCha8Rng,
    oracle: OracleFamily,
    ids: Vec<SetId>,
    ops: Vec<TraceOp>,
    target: usize,
    universe: i64,
    total_keys: usize,
}

impl Gen {
    fn new(seed: u64, params: &WorkloadParams) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            oracle: OracleFamily::new(),
            ids: Vec::new(),
            ops: Vec::new(),
            target: params.ops,
            universe: 1i64 << params.universe_bits.min(62),
            total_keys: 0,
        }
    }

    fn done(&self) -> bool {
        self.ops.len() >= self.target
    }

    fn make_set(&mut self, key: i64) -> SetId {
        self.ops.push(TraceOp::MakeSet { key });
        let id = self.oracle.make_set(key);
        self.ids.push(id);
        self.total_keys += 1;
        id
    }

    fn merge(&mut self, a: SetId, b: SetId) -> SetId {
        self.ops.push(TraceOp::Merge { a, b });
        let id = self.oracle.merge(a, b).expect("generator merges live sets");
        self.ids.retain(|&x| x != a && x != b);
        self.ids.push(id);
        id
    }

    fn split(&mut self, set: SetId, key: i64) -> (SetId, SetId) {
        self.ops.push(TraceOp::Split { set, key });
        let pair = self
            .oracle
            .split(set, key)
            .expect("generator splits live sets");
        self.ids.retain(|&x| x != set);
        self.ids.push(pair.0);
        self.ids.push(pair.1);
        pair
    }

    fn shift(&mut self, set: SetId, delta: i64) {
        self.ops.push(TraceOp::Shift { set, delta });
        self.oracle
            .shift(set, delta)
            .expect("generator shifts stay in range");
    }

    fn search(&mut self, set: SetId, key: i64) {
        self.ops.push(TraceOp::Search { set, key });
        self.oracle
            .search(set, key)
            .expect("generator searches live sets");
    }

    fn random_live(&mut self) -> SetId {
        self.ids[self.rng.random_range(0..self.ids.len())]
    }

    fn random_pair(&mut self) -> (SetId, SetId) {
        let i = self.rng.random_range(0..self.ids.len());
        let mut j = self.rng.random_range(0..self.ids.len() - 1);
        if j >= i {
            j += 1;
        }
        (self.ids[i], self.ids[j])
    }

    fn random_key(&mut self) -> i64 {
        self.rng.random_range(0..self.universe)
    }

    /// Query key near the set's range (or anywhere for an empty set).
    fn probe_key(&mut self, set: SetId) -> i64 {
        let entries = self.oracle.entries(set).expect("live set");
        match (entries.first(), entries.last()) {
            (Some(&(lo, _)), Some(&(hi, _))) => {
                let pad = ((hi - lo) / 4).max(4);
                self.rng
                    .random_range(lo.saturating_sub(pad)..=hi.saturating_add(pad))
            }
            _ => self.random_key(),
        }
    }

    fn finish(mut self, kind: WorkloadKind, seed: u64, params: &WorkloadParams) -> String {
        self.ops.truncate(self.target);
        let mut text = format!(
            "# kind={} seed={} sets={} universe_bits={} ops={}\n",
            kind.name(),
            seed,
            params.num_sets,
            params.universe_bits,
            self.ops.len(),
        );
        text.push_str(&format_trace(&self.ops));
        text
    }
}

/// Generate a trace; identical inputs produce identical text.
pub fn gen_workload(kind: WorkloadKind, seed: u64, params: &WorkloadParams) -> String {
    let mut g = Gen::new(seed, params);
    match kind {
        WorkloadKind::InterleaveMerge => mixed(&mut g, params, 0.20, 0.45, 0.20, 0.0),
        WorkloadKind::UnionSplitFind => mixed(&mut g, params, 0.05, 0.30, 0.30, 0.0),
        WorkloadKind::ShiftHeavy => mixed(&mut g, params, 0.05, 0.12, 0.10, 0.55),
        WorkloadKind::AdversarialK => adversarial(&mut g, params),
    }
    g.finish(kind, seed, params)
}

/// Shared driver for the three randomized mixes. Probabilities are for
/// make-set, merge, split, and shift; the rest searches. The key population
/// is capped so the brute-force oracle stays fast in differential runs;
/// once the cap is reached, merges that would starve the family fall
/// through to splits, so the live-set count random-walks with reflection
/// instead of forcing fresh keys.
fn mixed(
    g: &mut Gen,
    params: &WorkloadParams,
    p_make: f64,
    p_merge: f64,
    p_split: f64,
    p_shift: f64,
) {
    let cap = params.num_sets.saturating_mul(32).max(256);
    while !g.done() {
        if g.ids.is_empty()
            || (g.total_keys < cap && (g.ids.len() < 2 || g.rng.random_bool(p_make)))
        {
            let key = g.random_key();
            g.make_set(key);
            continue;
        }
        let roll = g.rng.random::<f64>();
        if roll < p_merge && g.ids.len() >= 2 {
            let (a, b) = g.random_pair();
            g.merge(a, b);
        } else if roll < p_merge + p_split {
            let id = g.random_live();
            let key = g.probe_key(id);
            g.split(id, key);
        } else if roll < p_merge + p_split + p_shift {
            let id = g.random_live();
            let delta = g.rng.random_range(-g.universe / 2..=g.universe / 2);
            g.shift(id, delta);
        } else {
            let id = g.random_live();
            let key = g.probe_key(id);
            g.search(id, key);
        }
    }
}

/// Blocks of maximally interleaving merges. Each block builds an
/// arithmetic progression of `2n` keys with a power-of-two step, then
/// repeatedly splits it in half by key, shifts the upper half down into
/// the gaps of the lower half, and merges the two back together. Every
/// round's merge alternates element-wise (`k = n` segments) and halves the
/// step, so a block of universe `2^b` sustains about `b - lg(2n)` such
/// merges before the gaps close.
fn adversarial(g: &mut Gen, params: &WorkloadParams) {
    let n = params.num_sets.max(2);
    let slots = (2 * n - 1) as i64;
    let limit = g.universe;
    let mut step: i64 = 1;
    while slots.saturating_mul(step * 2) < limit {
        step *= 2;
    }
    while !g.done() {
        let base = if step > 1 {
            g.rng.random_range(0..step)
        } else {
            0
        };
        let mut cur = g.make_set(base);
        for i in 1..2 * n {
            if g.done() {
                return;
            }
            let single = g.make_set(base + i as i64 * step);
            cur = g.merge(cur, single);
        }
        let mut s = step;
        while s >= 2 && !g.done() {
            let half = s / 2;
            let (lo, hi) = g.split(cur, base + (n as i64 - 1) * s);
            let delta = half - n as i64 * s;
            g.shift(hi, delta);
            cur = g.merge(lo, hi);
            s = half;
        }
    }
}
