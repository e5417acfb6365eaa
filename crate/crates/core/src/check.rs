//! Exhaustive structural validators and the gap potential.
//!
//! `validate_tree` runs every check in one read-only traversal and reports
//! each one separately with the path of the first violating node, so a
//! corrupted tree pinpoints exactly which invariant broke. `potential`
//! computes the accounting quantity used by the amortized-cost harness.

use crate::arena::{rank_of_weight, Forest, NodeId};
use crate::tree::TreeHandle;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

/// The individual validator checks, in reporting order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Check {
    /// Internal nodes have exactly 2 or 3 children.
    Arity,
    /// Internal weight equals the sum of its children's weights.
    WeightSum,
    /// Leaf rank is `⌊lg w⌋`; internal rank is `1 + max(child rank)`.
    RankDef,
    /// `2^(r-1) ≤ w` everywhere and `2^r ≤ w < 2^(r+1)` at leaves.
    RankWeightBounds,
    /// Every neighboring sibling of a minor child is a major leaf.
    Bias,
    /// Resolved leaf keys strictly increase left to right.
    KeyOrder,
    /// Stored min/max caches match the children's resolved extremes.
    MinMaxCache,
    /// Offset sums reproduce each subtree's true key range.
    ShiftResolution,
    /// Every leaf sits at depth `d` with `w · 2^(d-2) < W`.
    DepthBound,
    /// Leaf weight equals left gap plus right gap (full mode only).
    GapWeighting,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Arity => "arity",
            Check::WeightSum => "weight-sum",
            Check::RankDef => "rank-def",
            Check::RankWeightBounds => "rank-weight-bounds",
            Check::Bias => "bias",
            Check::KeyOrder => "key-order",
            Check::MinMaxCache => "minmax-cache",
            Check::ShiftResolution => "shift-resolution",
            Check::DepthBound => "depth-bound",
            Check::GapWeighting => "gap-weighting",
        }
    }
}

const STRUCTURAL_CHECKS: [Check; 9] = [
    Check::Arity,
    Check::WeightSum,
    Check::RankDef,
    Check::RankWeightBounds,
    Check::Bias,
    Check::KeyOrder,
    Check::MinMaxCache,
    Check::ShiftResolution,
    Check::DepthBound,
];

/// Validate structure only, or structure plus the dictionary weighting
/// scheme (every leaf weight equals the sum of its two gaps).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ValidationMode {
    Structural,
    Full,
}

/// First violation found for one check.
#[derive(Clone, Debug)]
pub struct Violation {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub message: String,
}

/// Outcome of every executed check.
#[derive(Debug)]
pub struct ValidationReport {
    results: Vec<(Check, Option<Violation>)>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|(_, v)| v.is_none())
    }

    pub fn passed(&self, check: Check) -> bool {
        self.results
            .iter()
            .find(|(c, _)| *c == check)
            .map(|(_, v)| v.is_none())
            .unwrap_or(false)
    }

    pub fn violations(&self) -> impl Iterator<Item = (Check, &Violation)> {
        self.results
            .iter()
            .filter_map(|(c, v)| v.as_ref().map(|v| (*c, v)))
    }

    pub fn checks_run(&self) -> usize {
        self.results.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (check, violation) in &self.results {
            match violation {
                None => writeln!(f, "{}: ok", check.name())?,
                Some(v) => writeln!(f, "{}: FAIL at {:?}: {}", check.name(), v.path, v.message)?,
            }
        }
        Ok(())
    }
}

struct Checker<'a> {
    forest: &'a Forest,
    results: Vec<(Check, Option<Violation>)>,
    path: Vec<usize>,
    /// Resolved key and weight of every leaf, in tree order.
    leaves: Vec<(i64, u128)>,
    root_weight: u128,
}

impl<'a> Checker<'a> {
    fn fail(&mut self, check: Check, message: String) {
        if let Some(slot) = self.results.iter_mut().find(|(c, _)| *c == check) {
            if slot.1.is_none() {
                slot.1 = Some(Violation {
                    path: self.path.clone(),
                    message,
                });
            }
        }
    }

    /// Returns the subtree's true resolved key range, recomputed from the
    /// leaves; `acc` is the offset sum strictly above `id`.
    fn walk(&mut self, id: NodeId, acc: i128, depth: u32) -> (i128, i128) {
        let node = self.forest.node(id);
        let acc_here = acc + node.shift;

        if node.is_leaf() {
            let resolved = node.key() as i128 + acc_here;
            if rank_of_weight(node.weight) != node.rank {
                self.fail(
                    Check::RankDef,
                    format!("leaf rank {} but weight {}", node.rank, node.weight),
                );
                // Bounds are the same statement for leaves.
                self.fail(
                    Check::RankWeightBounds,
                    format!("leaf weight {} outside [2^r, 2^(r+1))", node.weight),
                );
            }
            self.check_depth(node.weight, depth);
            let key = match i64::try_from(resolved) {
                Ok(k) => k,
                Err(_) => {
                    // Out-of-range resolution is a shift failure; clamp for
                    // the key-order pass.
                    self.fail(
                        Check::ShiftResolution,
                        format!("leaf resolves outside i64: {resolved}"),
                    );
                    0
                }
            };
            self.leaves.push((key, node.weight));
            return (resolved, resolved);
        }

        let kids = node.children();
        if kids.len() < 2 || kids.len() > 3 {
            self.fail(Check::Arity, format!("{} children", kids.len()));
        }

        let mut weight_sum = 0u128;
        let mut max_child_rank = 0u32;
        let mut cache_lo = i128::MAX;
        let mut cache_hi = i128::MIN;
        let mut true_lo = i128::MAX;
        let mut true_hi = i128::MIN;
        let mut prev_hi: Option<i128> = None;

        for (idx, &c) in kids.iter().enumerate() {
            let child = self.forest.node(c);
            weight_sum += child.weight;
            max_child_rank = max_child_rank.max(child.rank);
            let (clo, chi) = self.forest.span(c);
            cache_lo = cache_lo.min(clo);
            cache_hi = cache_hi.max(chi);
            if let Some(p) = prev_hi {
                if clo <= p {
                    self.fail(
                        Check::KeyOrder,
                        format!("child {idx} range starts at {clo}, not after {p}"),
                    );
                }
            }
            prev_hi = Some(chi);
            if child.parent != Some(id) {
                self.fail(
                    Check::ShiftResolution,
                    format!("child {idx} has a stale parent link"),
                );
            }

            self.path.push(idx);
            let (tlo, thi) = self.walk(c, acc_here, depth + 1);
            self.path.pop();
            true_lo = true_lo.min(tlo);
            true_hi = true_hi.max(thi);
        }

        if weight_sum != node.weight {
            self.fail(
                Check::WeightSum,
                format!("stored {} vs sum {}", node.weight, weight_sum),
            );
        }
        if node.rank != max_child_rank + 1 {
            self.fail(
                Check::RankDef,
                format!("rank {} vs 1 + max child {}", node.rank, max_child_rank),
            );
        }
        // 2^(r-1) ≤ w for internal nodes (trivial at rank 0).
        if node.rank >= 1 {
            let lower = if node.rank > 128 {
                None
            } else {
                Some(1u128 << (node.rank - 1))
            };
            if lower.is_none_or(|l| node.weight < l) {
                self.fail(
                    Check::RankWeightBounds,
                    format!("weight {} below 2^{}", node.weight, node.rank - 1),
                );
            }
        }
        self.check_bias(id);
        let (stored_lo, stored_hi) = node.inner_span();
        if (stored_lo as i128, stored_hi as i128) != (cache_lo, cache_hi) {
            self.fail(
                Check::MinMaxCache,
                format!("cached ({stored_lo}, {stored_hi}) vs children ({cache_lo}, {cache_hi})"),
            );
        }
        if (stored_lo as i128 + acc_here, stored_hi as i128 + acc_here) != (true_lo, true_hi) {
            self.fail(
                Check::ShiftResolution,
                format!(
                    "resolved range ({}, {}) vs leaves ({true_lo}, {true_hi})",
                    stored_lo as i128 + acc_here,
                    stored_hi as i128 + acc_here
                ),
            );
        }
        (true_lo, true_hi)
    }

    fn check_depth(&mut self, weight: u128, depth: u32) {
        // d < lg(W/w) + 2 rewritten exactly over integers: w · 2^(d-2) < W.
        if depth < 2 {
            return;
        }
        let shifted = if depth - 2 > 127 {
            None
        } else {
            weight.checked_mul(1u128 << (depth - 2))
        };
        if shifted.is_none_or(|v| v >= self.root_weight) {
            self.fail(
                Check::DepthBound,
                format!(
                    "leaf weight {weight} at depth {depth} in tree of weight {}",
                    self.root_weight
                ),
            );
        }
    }

    fn check_bias(&mut self, id: NodeId) {
        let node = self.forest.node(id);
        let kids = node.children();
        if node.rank == 0 {
            return;
        }
        let major = node.rank - 1;
        for (idx, &c) in kids.iter().enumerate() {
            if self.forest.node(c).rank >= major {
                continue;
            }
            // c is minor: every adjacent sibling must be a major leaf.
            for n_idx in [idx.wrapping_sub(1), idx + 1] {
                if n_idx >= kids.len() {
                    continue;
                }
                let nb = self.forest.node(kids[n_idx]);
                if !(nb.is_leaf() && nb.rank == major) {
                    self.fail(
                        Check::Bias,
                        format!("minor child {idx} next to non-major-leaf sibling {n_idx}"),
                    );
                }
            }
        }
    }

    fn finish(mut self, mode: ValidationMode) -> ValidationReport {
        // Key order across the whole leaf sequence.
        for w in self.leaves.windows(2) {
            if w[0].0 >= w[1].0 {
                self.path.clear();
                self.fail(
                    Check::KeyOrder,
                    format!("leaf keys {} and {} out of order", w[0].0, w[1].0),
                );
                break;
            }
        }
        if mode == ValidationMode::Full {
            for i in 0..self.leaves.len() {
                let (key, weight) = self.leaves[i];
                let left = if i == 0 {
                    1u128
                } else {
                    (key as i128 - self.leaves[i - 1].0 as i128) as u128
                };
                let right = if i + 1 == self.leaves.len() {
                    1u128
                } else {
                    (self.leaves[i + 1].0 as i128 - key as i128) as u128
                };
                if weight != left + right {
                    self.path.clear();
                    self.fail(
                        Check::GapWeighting,
                        format!("leaf {key} weighs {weight}, gaps give {}", left + right),
                    );
                    break;
                }
            }
        }
        ValidationReport {
            results: self.results,
        }
    }
}

/// Run the validator. Read-only: offsets are accumulated, never pushed, and
/// no work is counted. An empty tree passes everything.
pub fn validate_tree(forest: &Forest, tree: TreeHandle, mode: ValidationMode) -> ValidationReport {
    let mut results: Vec<(Check, Option<Violation>)> =
        STRUCTURAL_CHECKS.iter().map(|&c| (c, None)).collect();
    if mode == ValidationMode::Full {
        results.push((Check::GapWeighting, None));
    }
    let Some(root) = tree.root() else {
        return ValidationReport { results };
    };
    let mut checker = Checker {
        forest,
        results,
        path: Vec::new(),
        leaves: Vec::new(),
        root_weight: forest.node(root).weight,
    };
    checker.walk(root, 0, 0);
    checker.finish(mode)
}

/// Gap potential of a set: the sum over elements of `lg g⁺ + lg g⁻`, where
/// extremes use gap 1. Computed from resolved keys, summed left to right,
/// per leaf taking the left term before the right term. Translation
/// invariant and non-negative; a singleton contributes 0.
pub fn potential(forest: &Forest, tree: TreeHandle) -> f64 {
    let entries = forest.collect_entries(tree);
    let mut phi = 0.0f64;
    for i in 0..entries.len() {
        let key = entries[i].0;
        let left = if i == 0 {
            1u64
        } else {
            (key as i128 - entries[i - 1].0 as i128) as u64
        };
        let right = if i + 1 == entries.len() {
            1u64
        } else {
            (entries[i + 1].0 as i128 - key as i128) as u64
        };
        phi += (left as f64).log2();
        phi += (right as f64).log2();
    }
    phi
}

/// Structural fingerprint covering kinds, keys, multiplicities, weights,
/// ranks, offsets, and shape. Used to confirm that validation mutates
/// nothing.
pub fn fingerprint(forest: &Forest, tree: TreeHandle) -> u64 {
    fn rec(forest: &Forest, id: NodeId, h: &mut DefaultHasher) {
        let n = forest.node(id);
        n.weight.hash(h);
        n.rank.hash(h);
        n.shift.hash(h);
        match n.is_leaf() {
            true => {
                0u8.hash(h);
                n.key().hash(h);
                n.multiplicity().hash(h);
            }
            false => {
                1u8.hash(h);
                n.children().len().hash(h);
                for &c in n.children() {
                    rec(forest, c, h);
                }
            }
        }
    }
    let mut h = DefaultHasher::new();
    if let Some(root) = tree.root() {
        rec(forest, root, &mut h);
    }
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build_weighted(f: &mut Forest, keys: &[i64]) -> TreeHandle {
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

    #[test]
    fn valid_tree_passes_all_checks() {
        let mut f = Forest::new();
        let keys: Vec<i64> = (0..200).map(|i| i * 5 + (i % 3)).collect();
        let t = build_weighted(&mut f, &keys);
        let report = validate_tree(&f, t, ValidationMode::Full);
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.checks_run(), 10);
    }

    #[test]
    fn corrupted_rank_is_detected() {
        let mut f = Forest::new();
        let t = build_weighted(&mut f, &[1, 5, 9, 22]);
        let root = t.root().unwrap();
        f.node_mut(root).rank += 3;
        let report = validate_tree(&f, t, ValidationMode::Structural);
        assert!(!report.passed(Check::RankDef));
    }

    #[test]
    fn corrupted_weight_is_detected() {
        let mut f = Forest::new();
        let t = build_weighted(&mut f, &[1, 5, 9, 22]);
        let root = t.root().unwrap();
        f.node_mut(root).weight += 1;
        let report = validate_tree(&f, t, ValidationMode::Structural);
        assert!(!report.passed(Check::WeightSum));
    }

    #[test]
    fn wrong_gap_weight_fails_full_mode_only() {
        let mut f = Forest::new();
        let t = build_weighted(&mut f, &[10, 20, 30]);
        let t = f.reweight_leaf(t, 20, 7).unwrap();
        assert!(validate_tree(&f, t, ValidationMode::Structural).all_passed());
        let report = validate_tree(&f, t, ValidationMode::Full);
        assert!(!report.passed(Check::GapWeighting));
    }

    #[test]
    fn validation_does_not_mutate() {
        let mut f = Forest::new();
        let t = build_weighted(&mut f, &[3, 7, 20, 21, 40]);
        let t = f.shift_tree(t, 17);
        let before = fingerprint(&f, t);
        let work_before = f.work_steps();
        let _ = validate_tree(&f, t, ValidationMode::Full);
        let _ = potential(&f, t);
        assert_eq!(fingerprint(&f, t), before);
        assert_eq!(f.work_steps(), work_before);
    }

    #[test]
    fn potential_examples() {
        let mut f = Forest::new();
        let singleton = f.make_leaf(42, 2, 1);
        assert_eq!(potential(&f, singleton), 0.0);

        let t = build_weighted(&mut f, &[3, 7, 20]);
        let expected = 4.0 + 2.0 * (13f64).log2();
        assert!((potential(&f, t) - expected).abs() < 1e-9);

        // Gaps are differences, so translation leaves the potential intact.
        let before = potential(&f, t);
        let shifted = f.shift_tree(t, 1_000_000);
        assert_eq!(potential(&f, shifted), before);
    }

    #[test]
    fn depth_bound_fault_injection() {
        let mut f = Forest::new();
        let t = build_weighted(&mut f, &(0..64).map(|i| i * 2).collect::<Vec<_>>());
        // Shrink the root weight drastically: deep light leaves now violate
        // the depth inequality.
        let root = t.root().unwrap();
        f.node_mut(root).weight = 4;
        let report = validate_tree(&f, t, ValidationMode::Structural);
        assert!(!report.passed(Check::DepthBound));
    }
}
