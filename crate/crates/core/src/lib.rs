//! Mergeable integer dictionaries with shift.
//!
//! A [`SetFamily`] maintains a collection of integer sets under five
//! operations: `search` (largest element at most a query), `split` at a
//! key, `merge` of two arbitrarily interleaved (possibly intersecting)
//! sets, `make_set`, and `shift` of a whole set by a delta. All five run in
//! O(lg U) amortized structural steps, where U is the key span of the sets
//! an operation touches, independent of how many elements they hold.
//!
//! Sets are stored as weighted 2,3-trees whose leaf weights equal the sum
//! of the two gaps to the neighboring elements. Merges decompose both trees
//! into segments, rebuild one tree per segment, reweight the endpoint
//! leaves against the new neighbors, and join segments by rank. A lazy
//! per-subtree offset makes `shift` a single root update.
//!
//! The crate also ships the supporting cast for testing and measurement:
//! a brute-force [`oracle::OracleFamily`] for differential checks, an
//! exhaustive invariant validator and gap potential in [`check`], the
//! uniformly weighted [`baseline::BaselineFamily`] for cost comparisons,
//! and the replayable [`trace`] format understood by all engines.
//!
//! ```
//! use mergeset::SetFamily;
//!
//! let mut family = SetFamily::new();
//! let a = family.make_set(1);
//! let b = family.make_set(9);
//! let ab = family.merge(a, b).unwrap();
//! let c = family.make_set(4);
//! let all = family.merge(ab, c).unwrap(); // {1, 4, 9}
//! assert_eq!(family.search(all, 7).unwrap(), Some(4));
//!
//! family.shift(all, 100).unwrap(); // {101, 104, 109}
//! let (lo, hi) = family.split(all, 104).unwrap();
//! assert_eq!(family.search(lo, i64::MAX).unwrap(), Some(104));
//! assert_eq!(family.search(hi, i64::MAX).unwrap(), Some(109));
//! ```

mod arena;
pub mod baseline;
pub mod check;
mod family;
mod merge;
pub mod oracle;
pub mod trace;
mod tree;

pub use arena::{rank_of_weight, Forest, Node, NodeId, NodeKind, WorkCounter};
pub use family::{Error, SetFamily, SetId, SetStats};
pub use merge::MergeStats;
pub use tree::{FingerSearch, TreeHandle};
