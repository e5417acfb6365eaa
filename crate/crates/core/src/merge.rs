//! The segment merge engine.
//!
//! Merging two interleaved sets runs as a pipeline: normalize the argument
//! order, find all segment endpoints with finger walks, detach each
//! segment's profile of subtrees, build one tree per segment, prune
//! duplicated boundary keys, reweight the segment endpoint leaves to the
//! gaps of the merged set, and finally join the segment trees by repeatedly
//! joining the minimal-rank tree with its minimal-rank neighbor.
//!
//! Endpoint leaves are heavy (their weight carries the gap to the
//! neighboring segment), so the rank differences paid by the joins telescope
//! into the potential released by cutting those gaps. That is what keeps a
//! merge within O(lg U) amortized, with U the span of the output set.

use crate::arena::{rank_of_weight, Forest, NodeId, MAX_FANOUT};
use crate::tree::TreeHandle;
use arrayvec::ArrayVec;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Instrumentation record of one merge, kept for the harness and the
/// property tests. Weight snapshots are taken right after segment trees are
/// constructed, before pruning and reweighting.
#[derive(Clone, Debug, Default)]
pub struct MergeStats {
    /// Number of segments per side in the core pipeline; 0 when an input
    /// was empty and the merge degenerated to a rename.
    pub segments: usize,
    /// Arguments were swapped so the first owns the global minimum.
    pub swapped: bool,
    /// The (possibly swapped) first argument overhung the second's maximum
    /// and its tail was split off and rejoined after the core merge.
    pub suffix_split: bool,
    pub input_weight_a: u128,
    pub input_weight_b: u128,
    pub input_keys_a: usize,
    pub input_keys_b: usize,
    /// Gap between consecutive first-side segments, from the frozen
    /// endpoint keys: `gaps_a[i]` separates segment `i` from `i + 1`.
    pub gaps_a: Vec<u64>,
    /// Same for the second side.
    pub gaps_b: Vec<u64>,
    /// Segment tree weights after construction, first side.
    pub seg_weights_a: Vec<u128>,
    /// Segment tree weights after construction, second side.
    pub seg_weights_b: Vec<u128>,
}

/// Which end of a tree a boundary reweight targets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Extreme {
    Min,
    Max,
}

/// Set an extreme leaf's weight to `inner gap + outer`, where the inner gap
/// is the distance to its neighbor within the tree (1 for a singleton).
/// Skips the rebuild when the weight is already correct.
pub(crate) fn fix_extreme(
    f: &mut Forest,
    t: TreeHandle,
    which: Extreme,
    outer: u128,
) -> TreeHandle {
    let root = t.root().expect("fix_extreme needs a nonempty tree");
    let (lo, hi) = t.resolved_span(f).expect("nonempty");
    let (key, inner, leaf) = match which {
        Extreme::Max => {
            let leaf = f.rightmost_leaf(root);
            let inner = if lo == hi {
                1u128
            } else {
                let (pred, _) = f
                    .search_le(t, hi - 1)
                    .expect("non-singleton tree has a predecessor below its maximum");
                (hi as i128 - pred as i128) as u128
            };
            (hi, inner, leaf)
        }
        Extreme::Min => {
            let leaf = f.leftmost_leaf(root);
            let inner = if lo == hi {
                1u128
            } else {
                let succ = f
                    .leaf_successor(leaf)
                    .expect("non-singleton tree has a successor above its minimum");
                (f.node(succ).key() as i128 - lo as i128) as u128
            };
            (lo, inner, leaf)
        }
    };
    let target = inner + outer;
    if f.node(leaf).weight == target {
        return t;
    }
    if leaf == root {
        f.tick();
        let node = f.node_mut(leaf);
        node.weight = target;
        node.rank = rank_of_weight(target);
        return t;
    }
    f.reweight_leaf(t, key, target)
        .expect("extreme key is present")
}

/// Merge two trees that follow the gap weighting scheme into one tree of
/// their union that follows it again. Duplicate keys collapse, summing
/// multiplicities.
pub(crate) fn merge_trees(
    f: &mut Forest,
    a: TreeHandle,
    b: TreeHandle,
) -> (TreeHandle, MergeStats) {
    let mut stats = MergeStats {
        input_weight_a: a.weight(f),
        input_weight_b: b.weight(f),
        input_keys_a: f.count_leaves(a),
        input_keys_b: f.count_leaves(b),
        ..MergeStats::default()
    };
    if a.is_empty() {
        return (b, stats);
    }
    if b.is_empty() {
        return (a, stats);
    }

    // Normalize: the first argument owns the global minimum.
    let (alo, _) = a.resolved_span(f).expect("nonempty");
    let (blo, _) = b.resolved_span(f).expect("nonempty");
    let (mut first, second) = if blo < alo {
        stats.swapped = true;
        (b, a)
    } else {
        (a, b)
    };

    // Normalize: the second argument owns the global maximum. An overhang
    // of the first argument is split off here and rejoined afterwards with
    // the two leaves facing the seam reweighted.
    let (_, first_hi) = first.resolved_span(f).expect("nonempty");
    let (_, second_hi) = second.resolved_span(f).expect("nonempty");
    let mut suffix = TreeHandle::EMPTY;
    if first_hi > second_hi {
        let (head, tail) = f.split_at_key(first, second_hi);
        debug_assert!(!head.is_empty() && !tail.is_empty());
        // The cut leaves the head's new maximum with its old oversized
        // right-gap weight; restore the weighting scheme before the head
        // enters the pipeline, as a dictionary split would. The tail's
        // minimum keeps its stale weight only until the seam reweight below.
        first = fix_extreme(f, head, Extreme::Max, 1);
        suffix = tail;
        stats.suffix_split = true;
    }

    let core = merge_core(f, first, second, &mut stats);

    let result = if suffix.is_empty() {
        core
    } else {
        let (_, core_hi) = core.resolved_span(f).expect("nonempty");
        let (suffix_lo, _) = suffix.resolved_span(f).expect("nonempty");
        let gap = (suffix_lo as i128 - core_hi as i128) as u128;
        debug_assert!(gap >= 1);
        let core = fix_extreme(f, core, Extreme::Max, gap);
        let suffix = fix_extreme(f, suffix, Extreme::Min, gap);
        f.join(core, suffix)
    };
    (result, stats)
}

struct SegmentEndpoints {
    al: NodeId,
    ar: NodeId,
    bl: NodeId,
    br: NodeId,
}

/// Core pipeline for normalized inputs: `min(a) ≤ min(b)`, `max(a) ≤ max(b)`.
fn merge_core(f: &mut Forest, a: TreeHandle, b: TreeHandle, stats: &mut MergeStats) -> TreeHandle {
    let a_root = a.root().expect("core inputs are nonempty");
    let b_root = b.root().expect("core inputs are nonempty");

    // Find all segment endpoints before touching any structure. Only the
    // two initial descents start from a root; every later search walks from
    // the leaf where the previous one ended.
    let mut segs: Vec<SegmentEndpoints> = Vec::new();
    let mut al = f.leftmost_leaf(a_root);
    let mut bl = f.leftmost_leaf(b_root);
    loop {
        let bl_key = f.node(bl).key();
        let ar = f
            .finger_pred(al, bl_key)
            .leaf
            .expect("the first argument owns the global minimum");
        match f.leaf_successor(ar) {
            None => {
                // Last segment pair: both sides run to their maxima.
                let br = f
                    .finger_pred(bl, i64::MAX)
                    .leaf
                    .expect("nonempty tree has a rightmost leaf");
                segs.push(SegmentEndpoints { al, ar, bl, br });
                break;
            }
            Some(next_al) => {
                let next_al_key = f.node(next_al).key();
                let mut br = f
                    .finger_pred(bl, next_al_key)
                    .leaf
                    .expect("segment contains its own left endpoint");
                let mut next_bl = f.leaf_successor(br);
                if next_bl.is_none() && f.node(br).key() == next_al_key {
                    // Shared global maximum. Its second-side copy must close
                    // the alternation as the final segment, so this segment
                    // ends one leaf earlier.
                    next_bl = Some(br);
                    br = f
                        .leaf_predecessor(br)
                        .expect("shared maximum is not the segment's left endpoint");
                }
                segs.push(SegmentEndpoints { al, ar, bl, br });
                al = next_al;
                bl = next_bl.expect("the second argument owns the global maximum");
            }
        }
    }

    let k = segs.len();
    stats.segments = k;
    let ka: Vec<(i64, i64)> = segs
        .iter()
        .map(|s| (f.node(s.al).key(), f.node(s.ar).key()))
        .collect();
    let kb: Vec<(i64, i64)> = segs
        .iter()
        .map(|s| (f.node(s.bl).key(), f.node(s.br).key()))
        .collect();
    stats.gaps_a = (0..k.saturating_sub(1))
        .map(|i| (ka[i + 1].0 as i128 - ka[i].1 as i128) as u64)
        .collect();
    stats.gaps_b = (0..k.saturating_sub(1))
        .map(|i| (kb[i + 1].0 as i128 - kb[i].1 as i128) as u64)
        .collect();

    let mut items: Vec<TreeHandle> = Vec::with_capacity(2 * k);
    if k == 1 {
        // Fast path: the inputs already are the two segment trees.
        stats.seg_weights_a.push(a.weight(f));
        stats.seg_weights_b.push(b.weight(f));
        items.push(a);
        items.push(b);
    } else {
        let mut trees_a = Vec::with_capacity(k);
        for s in &segs {
            let prof = extract_profile(f, s.al, s.ar);
            trees_a.push(construct_segment_tree(f, prof));
        }
        sweep_skeleton(f, a_root);
        let mut trees_b = Vec::with_capacity(k);
        for s in &segs {
            let prof = extract_profile(f, s.bl, s.br);
            trees_b.push(construct_segment_tree(f, prof));
        }
        sweep_skeleton(f, b_root);
        stats.seg_weights_a = trees_a.iter().map(|t| t.weight(f)).collect();
        stats.seg_weights_b = trees_b.iter().map(|t| t.weight(f)).collect();
        for i in 0..k {
            items.push(trees_a[i]);
            items.push(trees_b[i]);
        }
    }

    prune(f, &mut items);
    reweight_boundaries(f, &mut items);
    join_segments(f, items)
}

/// Profile of one segment: the endpoint leaves plus the sibling subtrees
/// hanging inside the path between them, detached from the source tree.
struct SideProfile {
    lo_leaf: NodeId,
    hi_leaf: Option<NodeId>,
    /// Per upward step on the left leg, bottom to top, the subtrees that
    /// hung right of the path; the final entry holds the children strictly
    /// between the two legs at the meeting node.
    left_steps: Vec<ArrayVec<NodeId, 2>>,
    /// Per node of the right leg, deepest first, the subtrees that hung
    /// left of the path.
    right_steps: Vec<ArrayVec<NodeId, 2>>,
}

fn ancestor_chain(f: &Forest, leaf: NodeId) -> Vec<NodeId> {
    let mut chain = vec![leaf];
    let mut cur = leaf;
    while let Some(p) = f.node(cur).parent {
        chain.push(p);
        cur = p;
    }
    chain
}

/// Detach the profile of the segment whose endpoint leaves are `lo` and
/// `hi`. Path nodes stay linked as a skeleton (their cached aggregates go
/// stale) so that later segments can still climb through them; the skeleton
/// is freed afterwards by `sweep_skeleton`.
fn extract_profile(f: &mut Forest, lo: NodeId, hi: NodeId) -> SideProfile {
    if lo == hi {
        if let Some(p) = f.node(lo).parent {
            let pos = f.child_position(p, lo);
            f.detach_child_at(p, pos);
        }
        return SideProfile {
            lo_leaf: lo,
            hi_leaf: None,
            left_steps: Vec::new(),
            right_steps: Vec::new(),
        };
    }
    let chain_lo = ancestor_chain(f, lo);
    let chain_hi = ancestor_chain(f, hi);
    let mut i = chain_lo.len();
    let mut j = chain_hi.len();
    while i > 0 && j > 0 && chain_lo[i - 1] == chain_hi[j - 1] {
        i -= 1;
        j -= 1;
    }
    debug_assert!(i >= 1 && j >= 1, "distinct leaves diverge below their LCA");
    let lca = chain_lo[i];

    let mut left_steps = Vec::with_capacity(i);
    for m in 0..i - 1 {
        let p = chain_lo[m + 1];
        let c = chain_lo[m];
        f.visit(p);
        let pos = f.child_position(p, c);
        let mut sibs: ArrayVec<NodeId, 2> = ArrayVec::new();
        while f.child_count(p) > pos + 1 {
            sibs.push(f.detach_child_at(p, pos + 1));
        }
        left_steps.push(sibs);
    }
    {
        f.visit(lca);
        let cpos = f.child_position(lca, chain_lo[i - 1]);
        let dpos = f.child_position(lca, chain_hi[j - 1]);
        debug_assert!(cpos < dpos, "legs are ordered at the meeting node");
        let mut mids: ArrayVec<NodeId, 2> = ArrayVec::new();
        for _ in cpos + 1..dpos {
            mids.push(f.detach_child_at(lca, cpos + 1));
        }
        left_steps.push(mids);
    }
    let mut right_steps = Vec::with_capacity(j);
    for m in 0..j - 1 {
        let p = chain_hi[m + 1];
        let c = chain_hi[m];
        f.visit(p);
        let pos = f.child_position(p, c);
        let mut sibs: ArrayVec<NodeId, 2> = ArrayVec::new();
        for _ in 0..pos {
            sibs.push(f.detach_child_at(p, 0));
        }
        right_steps.push(sibs);
    }
    let p = chain_lo[1];
    let pos = f.child_position(p, lo);
    f.detach_child_at(p, pos);
    let p = chain_hi[1];
    let pos = f.child_position(p, hi);
    f.detach_child_at(p, pos);
    SideProfile {
        lo_leaf: lo,
        hi_leaf: Some(hi),
        left_steps,
        right_steps,
    }
}

/// Free what remains of a source tree once every profile has been detached:
/// path nodes and emptied ancestors only, since all leaves left with their
/// segments.
fn sweep_skeleton(f: &mut Forest, root: NodeId) {
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        let kids: ArrayVec<NodeId, MAX_FANOUT> = f.node(id).children().iter().copied().collect();
        stack.extend(kids);
        f.free(id);
    }
}

/// Join a profile into a single tree for its segment. The left leg is
/// folded bottom-up into an accumulator growing rightwards; pairs of
/// siblings first become children of a fresh node (whose rank lands one
/// above the larger child, keeping it biased because detached siblings were
/// adjacent in the source tree). The right leg folds symmetrically and the
/// two accumulators join.
fn construct_segment_tree(f: &mut Forest, prof: SideProfile) -> TreeHandle {
    let mut left = TreeHandle::from_root(prof.lo_leaf);
    for sibs in prof.left_steps {
        match sibs.as_slice() {
            [] => {}
            [x] => left = f.join(left, TreeHandle::from_root(*x)),
            [x, y] => {
                let q = f.new_parent(*x, *y);
                left = f.join(left, TreeHandle::from_root(q));
            }
            _ => unreachable!("at most two siblings beside a path child"),
        }
    }
    let Some(hi) = prof.hi_leaf else {
        return left;
    };
    let mut right = TreeHandle::from_root(hi);
    for sibs in prof.right_steps {
        match sibs.as_slice() {
            [] => {}
            [x] => right = f.join(TreeHandle::from_root(*x), right),
            [x, y] => {
                let q = f.new_parent(*x, *y);
                right = f.join(TreeHandle::from_root(q), right);
            }
            _ => unreachable!("at most two siblings beside a path child"),
        }
    }
    f.join(left, right)
}

/// Remove duplicated boundary keys between adjacent segment trees. The
/// duplicate with interior keys behind it survives; singletons are dropped
/// whole, otherwise the left tree's maximum is split off and dropped. The
/// survivor's multiplicity absorbs the deleted leaf's count.
fn prune(f: &mut Forest, items: &mut Vec<TreeHandle>) {
    let mut i = 0;
    while i + 1 < items.len() {
        let left = items[i];
        let right = items[i + 1];
        let (_, lhi) = left.resolved_span(f).expect("segments are nonempty");
        let (rlo, _) = right.resolved_span(f).expect("segments are nonempty");
        if lhi != rlo {
            i += 1;
            continue;
        }
        let l_root = left.root().expect("nonempty");
        let r_root = right.root().expect("nonempty");
        let l_single = f.node(l_root).is_leaf();
        let r_single = f.node(r_root).is_leaf();
        if l_single && !r_single {
            let mult = f.node(l_root).multiplicity();
            let survivor = f.leftmost_leaf(r_root);
            f.bump_multiplicity(survivor, mult);
            f.free(l_root);
            items.remove(i);
        } else if r_single {
            let mult = f.node(r_root).multiplicity();
            let survivor = f.rightmost_leaf(l_root);
            f.bump_multiplicity(survivor, mult);
            f.free(r_root);
            items.remove(i + 1);
        } else {
            let (head, single) = f.split_at_key(left, lhi - 1);
            let dup = single.root().expect("maximum splits off as a leaf");
            debug_assert!(f.node(dup).is_leaf());
            let mult = f.node(dup).multiplicity();
            let survivor = f.leftmost_leaf(r_root);
            f.bump_multiplicity(survivor, mult);
            f.free(dup);
            items[i] = head;
        }
        // Any adjacency a deletion creates is strict, so re-checking the
        // same index simply advances on the next pass.
    }
}

/// Restore the gap weighting at every surviving boundary: each tree's
/// extreme leaves weigh their inner gap plus the live gap to the adjacent
/// tree (1 at the global ends). Leaves whose weight is already right, e.g.
/// the new maxima exposed by pruning, are skipped inside `fix_extreme`.
fn reweight_boundaries(f: &mut Forest, items: &mut [TreeHandle]) {
    let n = items.len();
    debug_assert!(n >= 1, "pruning keeps at least one survivor");
    let spans: Vec<(i64, i64)> = items
        .iter()
        .map(|t| t.resolved_span(f).expect("nonempty"))
        .collect();
    for i in 0..n {
        let outer_left = if i == 0 {
            1u128
        } else {
            (spans[i].0 as i128 - spans[i - 1].1 as i128) as u128
        };
        let outer_right = if i + 1 == n {
            1u128
        } else {
            (spans[i + 1].0 as i128 - spans[i].1 as i128) as u128
        };
        let root = items[i].root().expect("nonempty");
        if f.node(root).is_leaf() {
            let target = outer_left + outer_right;
            if f.node(root).weight != target {
                f.tick();
                let node = f.node_mut(root);
                node.weight = target;
                node.rank = rank_of_weight(target);
            }
        } else {
            items[i] = fix_extreme(f, items[i], Extreme::Min, outer_left);
            items[i] = fix_extreme(f, items[i], Extreme::Max, outer_right);
        }
    }
}

/// Join the ordered segment trees into one: repeatedly take the tree of
/// minimal rank (leftmost on ties) and join it with its smaller-rank
/// neighbor (left neighbor on ties). A lazy heap over (rank, position)
/// drives the selection; slot ranks only grow, so outdated entries are
/// recognized and dropped.
fn join_segments(f: &mut Forest, items: Vec<TreeHandle>) -> TreeHandle {
    let n = items.len();
    debug_assert!(n >= 1);
    if n == 1 {
        return items[0];
    }
    let mut trees = items;
    let mut rank: Vec<u32> = trees
        .iter()
        .map(|t| t.rank(f).expect("segments are nonempty"))
        .collect();
    let mut next: Vec<Option<usize>> = (0..n)
        .map(|i| if i + 1 < n { Some(i + 1) } else { None })
        .collect();
    let mut prev: Vec<Option<usize>> = (0..n).map(|i| i.checked_sub(1)).collect();
    let mut alive = vec![true; n];
    let mut heap: BinaryHeap<Reverse<(u32, usize)>> =
        (0..n).map(|i| Reverse((rank[i], i))).collect();
    let mut remaining = n;
    let mut last = 0;
    while remaining > 1 {
        let Reverse((r, p)) = heap.pop().expect("alive slots keep heap entries");
        if !alive[p] || rank[p] != r {
            continue;
        }
        f.tick();
        let q = match (prev[p], next[p]) {
            (Some(l), Some(rt)) => {
                if rank[l] <= rank[rt] {
                    l
                } else {
                    rt
                }
            }
            (Some(l), None) => l,
            (None, Some(rt)) => rt,
            (None, None) => unreachable!("more than one tree remains"),
        };
        let (a, b) = if q < p { (q, p) } else { (p, q) };
        debug_assert_eq!(next[a], Some(b));
        let joined = f.join(trees[a], trees[b]);
        trees[a] = joined;
        rank[a] = joined.rank(f).expect("join of nonempty trees");
        alive[b] = false;
        next[a] = next[b];
        if let Some(x) = next[b] {
            prev[x] = Some(a);
        }
        heap.push(Reverse((rank[a], a)));
        remaining -= 1;
        last = a;
    }
    trees[last]
}
