//! Trace execution with cost accounting, optional differential checking
//! against the brute-force oracle, and optional per-operation invariant
//! validation.

use mergeset::baseline::BaselineFamily;
use mergeset::check::ValidationMode;
use mergeset::oracle::OracleFamily;
use mergeset::trace::TraceOp;
use mergeset::{SetFamily, SetId};
use std::collections::BTreeSet;
use thiserror::Error;

/// How often live trees are validated during a run.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum CheckMode {
    #[default]
    None,
    Final,
    EveryOp,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub check: CheckMode,
    pub oracle: bool,
}

/// Cost accounting for one executed operation. `u_g` is the key span of
/// the involved set (for merge: of the output set); `work` is the
/// work-counter delta; the potential columns track the family-wide gap
/// potential.
#[derive(Clone, Debug)]
pub struct CostRecord {
    pub op_index: usize,
    pub kind: &'static str,
    pub u_g: u64,
    pub work: u64,
    pub phi_before: f64,
    pub phi_after: f64,
    /// Distinct keys in the set(s) the operation touched (inputs for
    /// merge); drives size-proportional float tolerances. Not in the CSV.
    pub touched_keys: usize,
    /// Extra bookkeeping recorded for merges only; not part of the CSV.
    pub merge: Option<MergeCost>,
}

/// Per-merge bookkeeping for the potential-ledger checks.
#[derive(Clone, Debug)]
pub struct MergeCost {
    pub segments: usize,
    pub input_keys_a: usize,
    pub input_keys_b: usize,
    pub input_weight_a: u128,
    pub input_weight_b: u128,
    /// Sum of the output leaf weights over the first input's elements
    /// (shared keys count toward both sides).
    pub side_weight_a: u128,
    /// Same for the second input's elements.
    pub side_weight_b: u128,
}

#[derive(Debug)]
pub struct RunOutput {
    /// One entry per executed search: `(op_index, result)`.
    pub searches: Vec<(usize, Option<i64>)>,
    pub records: Vec<CostRecord>,
    pub live_sets: usize,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("op {op_index}: {source}")]
    Engine {
        op_index: usize,
        source: mergeset::Error,
    },
    #[error("op {op_index}: divergence from oracle: {detail}")]
    Divergence { op_index: usize, detail: String },
    #[error("op {op_index}: set {set} violates invariants:\n{report}")]
    Invariant {
        op_index: usize,
        set: SetId,
        report: String,
    },
}

/// The operations a trace can drive, implemented by both the production
/// engine and the uniform-weight baseline.
pub trait TraceEngine {
    fn make_set(&mut self, key: i64) -> SetId;
    fn search(&mut self, id: SetId, j: i64) -> Result<Option<i64>, mergeset::Error>;
    fn split(&mut self, id: SetId, j: i64) -> Result<(SetId, SetId), mergeset::Error>;
    fn merge(&mut self, a: SetId, b: SetId) -> Result<SetId, mergeset::Error>;
    fn shift(&mut self, id: SetId, delta: i64) -> Result<(), mergeset::Error>;
    fn work_steps(&self) -> u64;
    fn potential_of(&self, id: SetId) -> Result<f64, mergeset::Error>;
    fn span_of(&self, id: SetId) -> Result<Option<(i64, i64)>, mergeset::Error>;
    fn entries(&self, id: SetId) -> Result<Vec<(i64, u64)>, mergeset::Error>;
    fn entries_with_weights(&self, id: SetId) -> Result<Vec<(i64, u128)>, mergeset::Error>;
    fn live_ids(&self) -> Vec<SetId>;
    fn validate_all(&self) -> Result<(), (SetId, String)>;
    /// Segment count of the most recent merge, when the engine records it.
    fn last_merge_segments(&self) -> Option<usize>;
}

impl TraceEngine for SetFamily {
    fn make_set(&mut self, key: i64) -> SetId {
        SetFamily::make_set(self, key)
    }
    fn search(&mut self, id: SetId, j: i64) -> Result<Option<i64>, mergeset::Error> {
        SetFamily::search(self, id, j)
    }
    fn split(&mut self, id: SetId, j: i64) -> Result<(SetId, SetId), mergeset::Error> {
        SetFamily::split(self, id, j)
    }
    fn merge(&mut self, a: SetId, b: SetId) -> Result<SetId, mergeset::Error> {
        SetFamily::merge(self, a, b)
    }
    fn shift(&mut self, id: SetId, delta: i64) -> Result<(), mergeset::Error> {
        SetFamily::shift(self, id, delta)
    }
    fn work_steps(&self) -> u64 {
        SetFamily::work_steps(self)
    }
    fn potential_of(&self, id: SetId) -> Result<f64, mergeset::Error> {
        SetFamily::potential_of(self, id)
    }
    fn span_of(&self, id: SetId) -> Result<Option<(i64, i64)>, mergeset::Error> {
        SetFamily::span_of(self, id)
    }
    fn entries(&self, id: SetId) -> Result<Vec<(i64, u64)>, mergeset::Error> {
        SetFamily::entries(self, id)
    }
    fn entries_with_weights(&self, id: SetId) -> Result<Vec<(i64, u128)>, mergeset::Error> {
        SetFamily::entries_with_weights(self, id)
    }
    fn live_ids(&self) -> Vec<SetId> {
        SetFamily::live_ids(self)
    }
    fn validate_all(&self) -> Result<(), (SetId, String)> {
        SetFamily::validate_all(self, ValidationMode::Full)
            .map_err(|(id, report)| (id, report.to_string()))
    }
    fn last_merge_segments(&self) -> Option<usize> {
        self.last_merge().map(|s| s.segments)
    }
}

impl TraceEngine for BaselineFamily {
    fn make_set(&mut self, key: i64) -> SetId {
        BaselineFamily::make_set(self, key)
    }
    fn search(&mut self, id: SetId, j: i64) -> Result<Option<i64>, mergeset::Error> {
        BaselineFamily::search(self, id, j)
    }
    fn split(&mut self, id: SetId, j: i64) -> Result<(SetId, SetId), mergeset::Error> {
        BaselineFamily::split(self, id, j)
    }
    fn merge(&mut self, a: SetId, b: SetId) -> Result<SetId, mergeset::Error> {
        BaselineFamily::merge(self, a, b)
    }
    fn shift(&mut self, id: SetId, delta: i64) -> Result<(), mergeset::Error> {
        BaselineFamily::shift(self, id, delta)
    }
    fn work_steps(&self) -> u64 {
        BaselineFamily::work_steps(self)
    }
    fn potential_of(&self, id: SetId) -> Result<f64, mergeset::Error> {
        BaselineFamily::potential_of(self, id)
    }
    fn span_of(&self, id: SetId) -> Result<Option<(i64, i64)>, mergeset::Error> {
        BaselineFamily::span_of(self, id)
    }
    fn entries(&self, id: SetId) -> Result<Vec<(i64, u64)>, mergeset::Error> {
        BaselineFamily::entries(self, id)
    }
    fn entries_with_weights(&self, id: SetId) -> Result<Vec<(i64, u128)>, mergeset::Error> {
        // Uniform weights; reported for interface completeness.
        Ok(BaselineFamily::entries(self, id)?
            .into_iter()
            .map(|(k, _)| (k, 1))
            .collect())
    }
    fn live_ids(&self) -> Vec<SetId> {
        BaselineFamily::live_ids(self)
    }
    fn validate_all(&self) -> Result<(), (SetId, String)> {
        BaselineFamily::validate_all(self).map_err(|(id, report)| (id, report.to_string()))
    }
    fn last_merge_segments(&self) -> Option<usize> {
        None
    }
}

fn span_universe(span: Option<(i64, i64)>) -> u64 {
    match span {
        Some((lo, hi)) => (hi as i128 - lo as i128) as u64,
        None => 0,
    }
}

/// Execute a parsed trace. Emits one [`CostRecord`] per operation; checks
/// against a freshly built oracle when enabled (per-op search results and
/// id assignment, full key-multiset comparison at the end); validates all
/// live trees per operation or at the end per [`CheckMode`].
pub fn run_trace<E: TraceEngine>(
    engine: &mut E,
    ops: &[TraceOp],
    options: &RunOptions,
) -> Result<RunOutput, RunError> {
    let mut oracle = options.oracle.then(OracleFamily::new);
    let mut searches = Vec::new();
    let mut records = Vec::with_capacity(ops.len());
    let mut phi = 0.0f64;

    for (op_index, op) in ops.iter().enumerate() {
        let engine_err = |source| RunError::Engine { op_index, source };
        let work_before = engine.work_steps();
        let phi_before = phi;
        let mut merge_cost = None;
        let mut touched_keys = 1usize;
        let u_g;

        match *op {
            TraceOp::MakeSet { key } => {
                let id = engine.make_set(key);
                if let Some(o) = oracle.as_mut() {
                    let oid = o.make_set(key);
                    if oid != id {
                        return Err(RunError::Divergence {
                            op_index,
                            detail: format!("makeset assigned {id}, oracle {oid}"),
                        });
                    }
                }
                u_g = 0;
                // A fresh singleton has zero potential.
            }
            TraceOp::Search { set, key } => {
                u_g = span_universe(engine.span_of(set).map_err(engine_err)?);
                touched_keys = engine.entries(set).map_err(engine_err)?.len();
                let got = engine.search(set, key).map_err(engine_err)?;
                searches.push((op_index, got));
                if let Some(o) = oracle.as_mut() {
                    let expected = o.search(set, key).map_err(|e| RunError::Divergence {
                        op_index,
                        detail: format!("oracle rejected search: {e}"),
                    })?;
                    if expected != got {
                        return Err(RunError::Divergence {
                            op_index,
                            detail: format!("search({set}, {key}) = {got:?}, oracle {expected:?}"),
                        });
                    }
                }
            }
            TraceOp::Split { set, key } => {
                u_g = span_universe(engine.span_of(set).map_err(engine_err)?);
                touched_keys = engine.entries(set).map_err(engine_err)?.len();
                let phi_in = engine.potential_of(set).map_err(engine_err)?;
                let (a, b) = engine.split(set, key).map_err(engine_err)?;
                phi += engine.potential_of(a).map_err(engine_err)?
                    + engine.potential_of(b).map_err(engine_err)?
                    - phi_in;
                if let Some(o) = oracle.as_mut() {
                    let oids = o.split(set, key).map_err(|e| RunError::Divergence {
                        op_index,
                        detail: format!("oracle rejected split: {e}"),
                    })?;
                    if oids != (a, b) {
                        return Err(RunError::Divergence {
                            op_index,
                            detail: format!("split assigned {a}/{b}, oracle {}/{}", oids.0, oids.1),
                        });
                    }
                }
            }
            TraceOp::Merge { a, b } => {
                let phi_a = engine.potential_of(a).map_err(engine_err)?;
                let phi_b = engine.potential_of(b).map_err(engine_err)?;
                let keys_a: BTreeSet<i64> = engine
                    .entries(a)
                    .map_err(engine_err)?
                    .into_iter()
                    .map(|(k, _)| k)
                    .collect();
                let keys_b: BTreeSet<i64> = engine
                    .entries(b)
                    .map_err(engine_err)?
                    .into_iter()
                    .map(|(k, _)| k)
                    .collect();
                let weight_a: u128 = engine
                    .entries_with_weights(a)
                    .map_err(engine_err)?
                    .iter()
                    .map(|&(_, w)| w)
                    .sum();
                let weight_b: u128 = engine
                    .entries_with_weights(b)
                    .map_err(engine_err)?
                    .iter()
                    .map(|&(_, w)| w)
                    .sum();
                touched_keys = keys_a.len() + keys_b.len();
                let c = engine.merge(a, b).map_err(engine_err)?;
                phi += engine.potential_of(c).map_err(engine_err)? - phi_a - phi_b;
                u_g = span_universe(engine.span_of(c).map_err(engine_err)?);
                let out = engine.entries_with_weights(c).map_err(engine_err)?;
                let side = |keys: &BTreeSet<i64>| -> u128 {
                    out.iter()
                        .filter(|(k, _)| keys.contains(k))
                        .map(|&(_, w)| w)
                        .sum()
                };
                merge_cost = Some(MergeCost {
                    segments: engine.last_merge_segments().unwrap_or(0),
                    input_keys_a: keys_a.len(),
                    input_keys_b: keys_b.len(),
                    input_weight_a: weight_a,
                    input_weight_b: weight_b,
                    side_weight_a: side(&keys_a),
                    side_weight_b: side(&keys_b),
                });
                if let Some(o) = oracle.as_mut() {
                    let oid = o.merge(a, b).map_err(|e| RunError::Divergence {
                        op_index,
                        detail: format!("oracle rejected merge: {e}"),
                    })?;
                    if oid != c {
                        return Err(RunError::Divergence {
                            op_index,
                            detail: format!("merge assigned {c}, oracle {oid}"),
                        });
                    }
                }
            }
            TraceOp::Shift { set, delta } => {
                u_g = span_universe(engine.span_of(set).map_err(engine_err)?);
                touched_keys = engine.entries(set).map_err(engine_err)?.len();
                let phi_in = engine.potential_of(set).map_err(engine_err)?;
                engine.shift(set, delta).map_err(engine_err)?;
                phi += engine.potential_of(set).map_err(engine_err)? - phi_in;
                if let Some(o) = oracle.as_mut() {
                    o.shift(set, delta).map_err(|e| RunError::Divergence {
                        op_index,
                        detail: format!("oracle rejected shift: {e}"),
                    })?;
                }
            }
        }

        records.push(CostRecord {
            op_index,
            kind: op.kind(),
            u_g,
            work: engine.work_steps() - work_before,
            phi_before,
            phi_after: phi,
            touched_keys,
            merge: merge_cost,
        });

        if options.check == CheckMode::EveryOp {
            if let Err((set, report)) = engine.validate_all() {
                return Err(RunError::Invariant {
                    op_index,
                    set,
                    report,
                });
            }
        }
    }

    let last_index = ops.len().saturating_sub(1);
    if options.check == CheckMode::Final {
        if let Err((set, report)) = engine.validate_all() {
            return Err(RunError::Invariant {
                op_index: last_index,
                set,
                report,
            });
        }
    }
    if let Some(o) = oracle.as_ref() {
        let live = engine.live_ids();
        if live != o.live_ids() {
            return Err(RunError::Divergence {
                op_index: last_index,
                detail: "live id sets differ at end of trace".into(),
            });
        }
        for id in live {
            let got = engine.entries(id).expect("live id");
            let expected = o.entries(id).expect("live id");
            if got.as_slice() != expected {
                return Err(RunError::Divergence {
                    op_index: last_index,
                    detail: format!("final contents of {id} differ"),
                });
            }
        }
    }

    Ok(RunOutput {
        searches,
        records,
        live_sets: engine.live_ids().len(),
    })
}

/// Totals for one run: the empirical amortized constant is
/// `total_work / Σ_merges lg(2 + U_C)`.
#[derive(Clone, Copy, Debug)]
pub struct Summary {
    pub ops: usize,
    pub total_work: u64,
    pub merges: usize,
    pub sum_lg_u_merges: f64,
    pub ratio: f64,
}

pub fn summarize(records: &[CostRecord]) -> Summary {
    let total_work: u64 = records.iter().map(|r| r.work).sum();
    let merges = records.iter().filter(|r| r.kind == "merge").count();
    let sum_lg_u_merges: f64 = records
        .iter()
        .filter(|r| r.kind == "merge")
        .map(|r| ((2 + r.u_g) as f64).log2())
        .fold(0.0, |acc, x| acc + x);
    Summary {
        ops: records.len(),
        total_work,
        merges,
        sum_lg_u_merges,
        ratio: if sum_lg_u_merges > 0.0 {
            total_work as f64 / sum_lg_u_merges
        } else {
            0.0
        },
    }
}

/// Write records as CSV with the fixed column set, plus a trailing
/// comment-prefixed summary line when the trace was nonempty.
pub fn write_cost_csv<W: std::io::Write>(mut w: W, records: &[CostRecord]) -> std::io::Result<()> {
    writeln!(w, "op_index,kind,u_g,work,phi_before,phi_after")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{:.6},{:.6}",
            r.op_index, r.kind, r.u_g, r.work, r.phi_before, r.phi_after
        )?;
    }
    if !records.is_empty() {
        let s = summarize(records);
        writeln!(
            w,
            "# summary ops={} total_work={} merges={} sum_lg_u_merges={:.6} ratio={:.6}",
            s.ops, s.total_work, s.merges, s.sum_lg_u_merges, s.ratio
        )?;
    }
    Ok(())
}
