//! Node arena backing every tree in a set family.
//!
//! Trees are built from 2,3-nodes referenced by [`NodeId`] indices into a
//! [`Forest`]. Keys live in the leaves; every node carries a weight, a rank
//! derived from weights, and a lazy shift offset that translates the keys of
//! its whole subtree. The arena also owns the [`WorkCounter`] that tallies
//! primitive structural steps for amortized-cost measurements.

use arrayvec::ArrayVec;
use std::num::NonZeroU32;

/// Maximum stored fanout. Valid internal nodes have 2 or 3 children; a
/// fourth slot exists only transiently inside join before the node is split.
pub const MAX_FANOUT: usize = 4;

/// Handle to a node in a [`Forest`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct NodeId(NonZeroU32);

impl NodeId {
    fn new(index: u32) -> Self {
        NodeId(NonZeroU32::new(index).expect("node slot 0 is reserved"))
    }

    fn index(self) -> usize {
        self.0.get() as usize
    }
}

/// Leaf payload or internal-node structure.
#[derive(Clone, Debug)]
pub enum NodeKind {
    Leaf {
        /// Stored key. The key a leaf represents is this value plus the sum
        /// of the shift offsets on the path from the root down to the leaf.
        key: i64,
        /// Number of times the key occurs (duplicates collapse on merge).
        multiplicity: u64,
    },
    Internal {
        children: ArrayVec<NodeId, MAX_FANOUT>,
        /// Smallest key in the subtree, resolved through all offsets strictly
        /// below this node (the node's own shift is excluded).
        min_key: i64,
        /// Largest key in the subtree, same convention as `min_key`.
        max_key: i64,
    },
}

/// One 2,3-tree node.
#[derive(Clone, Debug)]
pub struct Node {
    /// Leaf weights are assigned by the caller; an internal weight is the sum
    /// of its children's weights.
    pub weight: u128,
    /// `⌊lg weight⌋` for leaves, `1 + max(child rank)` for internal nodes.
    pub rank: u32,
    /// Lazy translation applied to every key in the subtree. Kept wide so
    /// that accumulated offsets never overflow even when resolved keys sit
    /// near the ends of the `i64` range.
    pub shift: i128,
    pub parent: Option<NodeId>,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    /// Stored key of a leaf. Panics on internal nodes.
    pub fn key(&self) -> i64 {
        match self.kind {
            NodeKind::Leaf { key, .. } => key,
            NodeKind::Internal { .. } => panic!("key() called on internal node"),
        }
    }

    pub fn multiplicity(&self) -> u64 {
        match self.kind {
            NodeKind::Leaf { multiplicity, .. } => multiplicity,
            NodeKind::Internal { .. } => panic!("multiplicity() called on internal node"),
        }
    }

    pub fn children(&self) -> &[NodeId] {
        match &self.kind {
            NodeKind::Leaf { .. } => &[],
            NodeKind::Internal { children, .. } => children,
        }
    }

    /// Key range of the subtree before applying this node's own shift.
    pub fn inner_span(&self) -> (i64, i64) {
        match self.kind {
            NodeKind::Leaf { key, .. } => (key, key),
            NodeKind::Internal {
                min_key, max_key, ..
            } => (min_key, max_key),
        }
    }
}

/// Monotone tally of primitive structural steps: node visits, allocations,
/// destructions, and child-link mutations. This is the machine-independent
/// proxy for running time used by the benchmark harness.
#[derive(Clone, Copy, Debug, Default)]
pub struct WorkCounter {
    steps: u64,
}

impl WorkCounter {
    pub fn steps(&self) -> u64 {
        self.steps
    }

    #[inline]
    fn bump(&mut self) {
        self.steps += 1;
    }
}

/// `⌊lg w⌋` via integer bit length; exact, no floating point.
pub fn rank_of_weight(weight: u128) -> u32 {
    debug_assert!(weight >= 1, "weights are positive");
    127 - weight.leading_zeros()
}

/// Slab of nodes plus the work counter. All tree operations go through a
/// forest; distinct forests are fully independent.
pub struct Forest {
    slots: Vec<Option<Node>>,
    free: Vec<u32>,
    work: WorkCounter,
}

impl Default for Forest {
    fn default() -> Self {
        Self::new()
    }
}

impl Forest {
    pub fn new() -> Self {
        Forest {
            // Slot 0 is a permanent hole so NodeId can be niche-optimized.
            slots: vec![None],
            free: Vec::new(),
            work: WorkCounter::default(),
        }
    }

    pub fn work_steps(&self) -> u64 {
        self.work.steps()
    }

    /// Count one primitive step against the work tally.
    #[inline]
    pub(crate) fn tick(&mut self) {
        self.work.bump();
    }

    /// Count a node visit during navigation.
    #[inline]
    pub(crate) fn visit(&mut self, _id: NodeId) {
        self.work.bump();
    }

    pub fn node(&self, id: NodeId) -> &Node {
        self.slots[id.index()]
            .as_ref()
            .expect("use of freed node id")
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        self.slots[id.index()]
            .as_mut()
            .expect("use of freed node id")
    }

    /// Number of live nodes (diagnostics / leak checks in tests).
    pub fn live_nodes(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub(crate) fn alloc(&mut self, node: Node) -> NodeId {
        self.work.bump();
        if let Some(slot) = self.free.pop() {
            let id = NodeId::new(slot);
            self.slots[id.index()] = Some(node);
            id
        } else {
            let id = NodeId::new(self.slots.len() as u32);
            self.slots.push(Some(node));
            id
        }
    }

    pub(crate) fn alloc_leaf(&mut self, key: i64, weight: u128, multiplicity: u64) -> NodeId {
        debug_assert!(weight >= 1 && multiplicity >= 1);
        self.alloc(Node {
            weight,
            rank: rank_of_weight(weight),
            shift: 0,
            parent: None,
            kind: NodeKind::Leaf { key, multiplicity },
        })
    }

    pub(crate) fn free(&mut self, id: NodeId) {
        self.work.bump();
        let slot = self.slots[id.index()].take();
        debug_assert!(slot.is_some(), "double free of node id");
        self.free.push(id.index() as u32);
    }

    /// Key range of the subtree as seen from the node's parent frame, i.e.
    /// with the node's own shift applied. For a detached node (or a root)
    /// this is the true resolved range.
    pub fn span(&self, id: NodeId) -> (i128, i128) {
        let n = self.node(id);
        let (lo, hi) = n.inner_span();
        (lo as i128 + n.shift, hi as i128 + n.shift)
    }

    /// Recompute weight, rank, and the min/max key cache from the children.
    pub(crate) fn pull_up(&mut self, id: NodeId) {
        let kids: ArrayVec<NodeId, MAX_FANOUT> = self.node(id).children().iter().copied().collect();
        debug_assert!(kids.len() >= 2, "internal nodes keep at least 2 children");
        let mut weight = 0u128;
        let mut rank = 0u32;
        let mut lo = i128::MAX;
        let mut hi = i128::MIN;
        for &c in &kids {
            let child = self.node(c);
            weight += child.weight;
            rank = rank.max(child.rank);
            let (clo, chi) = self.span(c);
            lo = lo.min(clo);
            hi = hi.max(chi);
        }
        let node = self.node_mut(id);
        node.weight = weight;
        node.rank = rank + 1;
        match &mut node.kind {
            NodeKind::Internal {
                min_key, max_key, ..
            } => {
                *min_key = i64::try_from(lo).expect("resolved key out of i64 range");
                *max_key = i64::try_from(hi).expect("resolved key out of i64 range");
            }
            NodeKind::Leaf { .. } => unreachable!("pull_up on a leaf"),
        }
    }

    /// Move this node's pending shift onto its children so that the
    /// children's spans can be read directly. Resolved keys are unchanged.
    pub(crate) fn push_down(&mut self, id: NodeId) {
        let s = self.node(id).shift;
        if s == 0 {
            return;
        }
        let kids: ArrayVec<NodeId, MAX_FANOUT> = self.node(id).children().iter().copied().collect();
        debug_assert!(!kids.is_empty(), "push_down on a leaf");
        for c in kids {
            let child = self.node_mut(c);
            match &mut child.kind {
                // Leaves absorb offsets straight into the stored key, which
                // is exact here because every ancestor offset above has
                // already been pushed when we reach this node.
                NodeKind::Leaf { key, .. } => {
                    debug_assert_eq!(child.shift, 0, "leaves never hold a pending shift");
                    *key = i64::try_from(*key as i128 + s).expect("resolved key out of i64 range");
                }
                NodeKind::Internal { .. } => {
                    child.shift += s;
                }
            }
        }
        let node = self.node_mut(id);
        match &mut node.kind {
            NodeKind::Internal {
                min_key, max_key, ..
            } => {
                *min_key =
                    i64::try_from(*min_key as i128 + s).expect("resolved key out of i64 range");
                *max_key =
                    i64::try_from(*max_key as i128 + s).expect("resolved key out of i64 range");
            }
            NodeKind::Leaf { .. } => unreachable!(),
        }
        node.shift = 0;
    }

    /// Remove the child at `idx`, clearing its parent link. Aggregates of
    /// `parent` are left stale; callers pull up or dismantle afterwards.
    pub(crate) fn detach_child_at(&mut self, parent: NodeId, idx: usize) -> NodeId {
        self.work.bump();
        let child = match &mut self.node_mut(parent).kind {
            NodeKind::Internal { children, .. } => children.remove(idx),
            NodeKind::Leaf { .. } => panic!("detach from a leaf"),
        };
        self.node_mut(child).parent = None;
        child
    }

    /// Insert `child` at position `idx` and set its parent link. Aggregates
    /// are left stale until `pull_up`.
    pub(crate) fn insert_child(&mut self, parent: NodeId, idx: usize, child: NodeId) {
        self.work.bump();
        match &mut self.node_mut(parent).kind {
            NodeKind::Internal { children, .. } => children.insert(idx, child),
            NodeKind::Leaf { .. } => panic!("attach to a leaf"),
        }
        self.node_mut(child).parent = Some(parent);
    }

    pub(crate) fn child_count(&self, id: NodeId) -> usize {
        self.node(id).children().len()
    }

    pub(crate) fn child_position(&self, parent: NodeId, child: NodeId) -> usize {
        self.node(parent)
            .children()
            .iter()
            .position(|&c| c == child)
            .expect("node is not a child of the given parent")
    }

    /// Fresh internal node over two already-ordered siblings.
    pub(crate) fn new_parent(&mut self, left: NodeId, right: NodeId) -> NodeId {
        let id = self.alloc(Node {
            weight: 0,
            rank: 0,
            shift: 0,
            parent: None,
            kind: NodeKind::Internal {
                children: ArrayVec::new(),
                min_key: 0,
                max_key: 0,
            },
        });
        self.insert_child(id, 0, left);
        self.insert_child(id, 1, right);
        self.pull_up(id);
        id
    }
}
