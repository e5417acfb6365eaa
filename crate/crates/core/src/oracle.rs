//! Trivially correct reference dictionary over sorted key/multiplicity
//! vectors, used for differential testing. It mirrors the engine's id
//! policy exactly and carries no weights or ranks: it validates semantics,
//! never costs.

use crate::family::{Error, SetId};
use crate::trace::TraceOp;
use std::collections::BTreeMap;

/// One applied operation's observable outcome.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OpOutcome {
    Created(SetId),
    Found(Option<i64>),
    SplitInto(SetId, SetId),
    Merged(SetId),
    Shifted,
}

#[derive(Default)]
pub struct OracleFamily {
    sets: BTreeMap<SetId, Vec<(i64, u64)>>,
    next_id: u64,
}

impl OracleFamily {
    pub fn new() -> Self {
        OracleFamily {
            sets: BTreeMap::new(),
            next_id: 1,
        }
    }

    fn fresh_id(&mut self) -> SetId {
        let id = SetId(self.next_id);
        self.next_id += 1;
        id
    }

    pub fn live_ids(&self) -> Vec<SetId> {
        self.sets.keys().copied().collect()
    }

    pub fn entries(&self, id: SetId) -> Result<&[(i64, u64)], Error> {
        self.sets
            .get(&id)
            .map(|v| v.as_slice())
            .ok_or(Error::UnknownSet(id))
    }

    pub fn make_set(&mut self, key: i64) -> SetId {
        let id = self.fresh_id();
        self.sets.insert(id, vec![(key, 1)]);
        id
    }

    pub fn search(&self, id: SetId, j: i64) -> Result<Option<i64>, Error> {
        let set = self.sets.get(&id).ok_or(Error::UnknownSet(id))?;
        let idx = set.partition_point(|&(k, _)| k <= j);
        Ok(idx.checked_sub(1).map(|i| set[i].0))
    }

    pub fn split(&mut self, id: SetId, j: i64) -> Result<(SetId, SetId), Error> {
        let set = self.sets.remove(&id).ok_or(Error::UnknownSet(id))?;
        let idx = set.partition_point(|&(k, _)| k <= j);
        let (low, high) = (set[..idx].to_vec(), set[idx..].to_vec());
        let low_id = self.fresh_id();
        self.sets.insert(low_id, low);
        let high_id = self.fresh_id();
        self.sets.insert(high_id, high);
        Ok((low_id, high_id))
    }

    pub fn shift(&mut self, id: SetId, delta: i64) -> Result<(), Error> {
        let set = self.sets.get_mut(&id).ok_or(Error::UnknownSet(id))?;
        if set.iter().any(|&(k, _)| k.checked_add(delta).is_none()) {
            return Err(Error::Overflow);
        }
        for (k, _) in set.iter_mut() {
            *k += delta;
        }
        Ok(())
    }

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
        let sa = self.sets.remove(&a).expect("checked");
        let sb = self.sets.remove(&b).expect("checked");
        let mut out = Vec::with_capacity(sa.len() + sb.len());
        let (mut i, mut j) = (0, 0);
        while i < sa.len() && j < sb.len() {
            match sa[i].0.cmp(&sb[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(sa[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(sb[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((sa[i].0, sa[i].1 + sb[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&sa[i..]);
        out.extend_from_slice(&sb[j..]);
        let id = self.fresh_id();
        self.sets.insert(id, out);
        Ok(id)
    }

    /// Apply one trace operation.
    pub fn apply(&mut self, op: &TraceOp) -> Result<OpOutcome, Error> {
        match *op {
            TraceOp::MakeSet { key } => Ok(OpOutcome::Created(self.make_set(key))),
            TraceOp::Search { set, key } => self.search(set, key).map(OpOutcome::Found),
            TraceOp::Split { set, key } => self
                .split(set, key)
                .map(|(a, b)| OpOutcome::SplitInto(a, b)),
            TraceOp::Merge { a, b } => self.merge(a, b).map(OpOutcome::Merged),
            TraceOp::Shift { set, delta } => self.shift(set, delta).map(|()| OpOutcome::Shifted),
        }
    }
}
