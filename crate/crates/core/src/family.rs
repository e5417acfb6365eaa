//! The dictionary itself: a registry of integer sets supporting search,
//! split, merge of arbitrarily interleaved sets, make-set, and shift.
//!
//! Every registered tree keeps the gap weighting scheme: each leaf weighs
//! `g⁻ + g⁺`, the distances to its neighbors within its own set (1 at the
//! extremes). That weighting is what makes segment merging cheap, because
//! segment endpoint leaves are heavy in proportion to the gaps the merge
//! will cut into.

use crate::arena::Forest;
use crate::check::{self, ValidationMode, ValidationReport};
use crate::merge::{self, Extreme, MergeStats};
use crate::tree::TreeHandle;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Identifier of a live set. Ids are assigned 1, 2, 3, … in creation order
/// and never reused: make-set mints one id, split mints two (the `≤` part
/// gets the lower), merge mints one fresh id for the union.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SetId(pub u64);

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Error)]
pub enum Error {
    #[error("unknown set id {0}")]
    UnknownSet(SetId),
    #[error("merge needs two distinct sets, got {0} twice")]
    SameSet(SetId),
    #[error("shift would move keys outside the representable range")]
    Overflow,
    #[error("key {0} is not present in the set")]
    KeyNotFound(i64),
}

/// Snapshot of one set for the harness.
#[derive(Clone, Debug)]
pub struct SetStats {
    /// Number of distinct keys.
    pub keys: usize,
    /// Sum of multiplicities.
    pub total_multiplicity: u64,
    pub min: Option<i64>,
    pub max: Option<i64>,
    /// `max - min`, the local universe governing operation cost; 0 when the
    /// set has fewer than two keys.
    pub universe: u64,
    /// Gap potential of the set.
    pub potential: f64,
    /// Total tree weight.
    pub weight: u128,
}

/// A family of mergeable sets over one shared node arena.
pub struct SetFamily {
    forest: Forest,
    sets: BTreeMap<SetId, TreeHandle>,
    next_id: u64,
    last_merge: Option<MergeStats>,
}

impl Default for SetFamily {
    fn default() -> Self {
        Self::new()
    }
}

impl SetFamily {
    pub fn new() -> Self {
        SetFamily {
            forest: Forest::new(),
            sets: BTreeMap::new(),
            next_id: 1,
            last_merge: None,
        }
    }

    /// Monotone count of primitive structural steps performed so far.
    pub fn work_steps(&self) -> u64 {
        self.forest.work_steps()
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn live_ids(&self) -> Vec<SetId> {
        self.sets.keys().copied().collect()
    }

    pub fn contains(&self, id: SetId) -> bool {
        self.sets.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Instrumentation record of the most recent merge.
    pub fn last_merge(&self) -> Option<&MergeStats> {
        self.last_merge.as_ref()
    }

    fn fresh_id(&mut self) -> SetId {
        let id = SetId(self.next_id);
        self.next_id += 1;
        id
    }

    fn register(&mut self, tree: TreeHandle) -> SetId {
        let id = self.fresh_id();
        self.sets.insert(id, tree);
        id
    }

    fn tree(&self, id: SetId) -> Result<TreeHandle, Error> {
        self.sets.get(&id).copied().ok_or(Error::UnknownSet(id))
    }

    /// Insert a new singleton set `{key}`. The lone element is both minimum
    /// and maximum, so its weight is `1 + 1 = 2`. O(1).
    pub fn make_set(&mut self, key: i64) -> SetId {
        let tree = self.forest.make_leaf(key, 2, 1);
        self.register(tree)
    }

    /// Largest element at most `j`, if any.
    pub fn search(&mut self, id: SetId, j: i64) -> Result<Option<i64>, Error> {
        let tree = self.tree(id)?;
        Ok(self.forest.search_le(tree, j).map(|(k, _)| k))
    }

    /// Replace the set with `{x ≤ j}` and `{x > j}`. Either part may be
    /// empty. The part holding `≤ j` receives the lower of the two fresh
    /// ids. The leaves facing the cut are reweighted: the new maximum of the
    /// left part gets `g⁺ = 1` and the new minimum of the right part gets
    /// `g⁻ = 1`; no other weight changes.
    pub fn split(&mut self, id: SetId, j: i64) -> Result<(SetId, SetId), Error> {
        let tree = self.tree(id)?;
        self.sets.remove(&id);
        let (mut low, mut high) = self.forest.split_at_key(tree, j);
        if !low.is_empty() && !high.is_empty() {
            low = merge::fix_extreme(&mut self.forest, low, Extreme::Max, 1);
            high = merge::fix_extreme(&mut self.forest, high, Extreme::Min, 1);
        }
        let low_id = self.register(low);
        let high_id = self.register(high);
        Ok((low_id, high_id))
    }

    /// Translate every element of the set by `delta` in O(1) structural
    /// work. Gap weights are differences, so no reweighting is needed.
    pub fn shift(&mut self, id: SetId, delta: i64) -> Result<(), Error> {
        let tree = self.tree(id)?;
        if let Some((lo, hi)) = tree.resolved_span(&self.forest) {
            if lo.checked_add(delta).is_none() || hi.checked_add(delta).is_none() {
                return Err(Error::Overflow);
            }
        }
        let shifted = self.forest.shift_tree(tree, delta);
        self.sets.insert(id, shifted);
        Ok(())
    }

    /// Merge two sets into `A ∪ B` under a fresh id, removing both inputs.
    /// The inputs may interleave arbitrarily and may intersect; equal keys
    /// collapse into one element whose multiplicity is the sum.
    pub fn merge(&mut self, a: SetId, b: SetId) -> Result<SetId, Error> {
        if a == b {
            return Err(Error::SameSet(a));
        }
        if !self.sets.contains_key(&a) {
            return Err(Error::UnknownSet(a));
        }
        if !self.sets.contains_key(&b) {
            return Err(Error::UnknownSet(b));
        }
        let ta = self.sets.remove(&a).expect("checked above");
        let tb = self.sets.remove(&b).expect("checked above");
        let (tc, stats) = merge::merge_trees(&mut self.forest, ta, tb);
        self.last_merge = Some(stats);
        Ok(self.register(tc))
    }

    /// Resolved `(key, multiplicity)` pairs in order. Read-only.
    pub fn entries(&self, id: SetId) -> Result<Vec<(i64, u64)>, Error> {
        let tree = self.tree(id)?;
        Ok(self.forest.collect_entries(tree))
    }

    /// Resolved `(key, leaf weight)` pairs in order. Read-only.
    pub fn entries_with_weights(&self, id: SetId) -> Result<Vec<(i64, u128)>, Error> {
        let tree = self.tree(id)?;
        let Some(root) = tree.root() else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        collect_weights(&self.forest, root, 0, &mut out);
        Ok(out)
    }

    pub fn set_stats(&self, id: SetId) -> Result<SetStats, Error> {
        let tree = self.tree(id)?;
        let entries = self.forest.collect_entries(tree);
        let (min, max) = match (entries.first(), entries.last()) {
            (Some(&(lo, _)), Some(&(hi, _))) => (Some(lo), Some(hi)),
            _ => (None, None),
        };
        Ok(SetStats {
            keys: entries.len(),
            total_multiplicity: entries.iter().map(|&(_, m)| m).sum(),
            min,
            max,
            universe: match (min, max) {
                (Some(lo), Some(hi)) => (hi as i128 - lo as i128) as u64,
                _ => 0,
            },
            potential: check::potential(&self.forest, tree),
            weight: tree.weight(&self.forest),
        })
    }

    /// Gap potential of one set. Read-only.
    pub fn potential_of(&self, id: SetId) -> Result<f64, Error> {
        let tree = self.tree(id)?;
        Ok(check::potential(&self.forest, tree))
    }

    /// Resolved key range of one set in O(1); `None` when empty.
    pub fn span_of(&self, id: SetId) -> Result<Option<(i64, i64)>, Error> {
        let tree = self.tree(id)?;
        Ok(tree.resolved_span(&self.forest))
    }

    pub fn validate(&self, id: SetId, mode: ValidationMode) -> Result<ValidationReport, Error> {
        let tree = self.tree(id)?;
        Ok(check::validate_tree(&self.forest, tree, mode))
    }

    /// Validate every live set; returns the first failing report.
    pub fn validate_all(&self, mode: ValidationMode) -> Result<(), (SetId, ValidationReport)> {
        for (&id, &tree) in &self.sets {
            let report = check::validate_tree(&self.forest, tree, mode);
            if !report.all_passed() {
                return Err((id, report));
            }
        }
        Ok(())
    }
}

fn collect_weights(
    forest: &Forest,
    id: crate::arena::NodeId,
    acc: i128,
    out: &mut Vec<(i64, u128)>,
) {
    let n = forest.node(id);
    let acc = acc + n.shift;
    if n.is_leaf() {
        out.push((
            i64::try_from(n.key() as i128 + acc).expect("resolved key out of i64 range"),
            n.weight,
        ));
    } else {
        for &c in n.children() {
            collect_weights(forest, c, acc, out);
        }
    }
}
