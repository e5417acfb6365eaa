//! Comparison baseline: the same dictionary semantics implemented with the
//! sequential segment merge loop on uniformly weighted trees (every leaf
//! weighs 1, so the trees behave like ordinary balanced 2,3-trees and each
//! split or join costs a logarithm of the set size). The benchmark harness
//! replays traces against this engine to measure how much the gap weighting
//! saves; it is not a production path.

use crate::arena::Forest;
use crate::family::{Error, SetId};
use crate::tree::TreeHandle;
use std::collections::BTreeMap;

pub struct BaselineFamily {
    forest: Forest,
    sets: BTreeMap<SetId, TreeHandle>,
    next_id: u64,
}

impl Default for BaselineFamily {
    fn default() -> Self {
        Self::new()
    }
}

impl BaselineFamily {
    pub fn new() -> Self {
        BaselineFamily {
            forest: Forest::new(),
            sets: BTreeMap::new(),
            next_id: 1,
        }
    }

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

    pub fn make_set(&mut self, key: i64) -> SetId {
        let tree = self.forest.make_leaf(key, 1, 1);
        self.register(tree)
    }

    pub fn search(&mut self, id: SetId, j: i64) -> Result<Option<i64>, Error> {
        let tree = self.tree(id)?;
        Ok(self.forest.search_le(tree, j).map(|(k, _)| k))
    }

    pub fn split(&mut self, id: SetId, j: i64) -> Result<(SetId, SetId), Error> {
        let tree = self.tree(id)?;
        self.sets.remove(&id);
        let (low, high) = self.forest.split_at_key(tree, j);
        let low_id = self.register(low);
        let high_id = self.register(high);
        Ok((low_id, high_id))
    }

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

    /// Sequential segment merge: repeatedly split the run below the other
    /// set's minimum off the set holding the global minimum and append it.
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
        let mut x = self.sets.remove(&a).expect("checked");
        let mut y = self.sets.remove(&b).expect("checked");
        let f = &mut self.forest;
        let mut acc = TreeHandle::EMPTY;
        loop {
            if x.is_empty() {
                acc = f.join(acc, y);
                break;
            }
            if y.is_empty() {
                acc = f.join(acc, x);
                break;
            }
            let (xlo, _) = x.resolved_span(f).expect("nonempty");
            let (ylo, _) = y.resolved_span(f).expect("nonempty");
            if xlo > ylo {
                std::mem::swap(&mut x, &mut y);
                continue;
            }
            if xlo == ylo {
                // Duplicate minimum: fold x's copy into y's and drop it.
                let (dup, rest) = f.split_at_key(x, xlo);
                x = rest;
                let dup_root = dup.root().expect("minimum splits off");
                debug_assert!(f.node(dup_root).is_leaf());
                let mult = f.node(dup_root).multiplicity();
                let y_min = f.leftmost_leaf(y.root().expect("nonempty"));
                f.bump_multiplicity(y_min, mult);
                f.free(dup_root);
                continue;
            }
            // Keys of x strictly below min(y) form the next run.
            let (run, rest) = f.split_at_key(x, ylo - 1);
            debug_assert!(!run.is_empty());
            x = rest;
            acc = f.join(acc, run);
        }
        Ok(self.register(acc))
    }

    pub fn entries(&self, id: SetId) -> Result<Vec<(i64, u64)>, Error> {
        let tree = self.tree(id)?;
        Ok(self.forest.collect_entries(tree))
    }

    /// Structural validation (the gap weighting scheme does not apply to
    /// the uniform-weight baseline).
    pub fn validate_all(&self) -> Result<(), (SetId, crate::check::ValidationReport)> {
        for (&id, &tree) in &self.sets {
            let report = crate::check::validate_tree(
                &self.forest,
                tree,
                crate::check::ValidationMode::Structural,
            );
            if !report.all_passed() {
                return Err((id, report));
            }
        }
        Ok(())
    }

    pub fn potential_of(&self, id: SetId) -> Result<f64, Error> {
        let tree = self.tree(id)?;
        Ok(crate::check::potential(&self.forest, tree))
    }

    /// Resolved key range of one set in O(1); `None` when empty.
    pub fn span_of(&self, id: SetId) -> Result<Option<(i64, i64)>, Error> {
        let tree = self.tree(id)?;
        Ok(tree.resolved_span(&self.forest))
    }
}
